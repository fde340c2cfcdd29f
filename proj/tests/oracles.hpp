#pragma once

// Test-side reference computations, written against the raw geometry and
// textbook formulas rather than the library's intermediate quantities.

#include <Eigen/Dense>

#include "vba/model.hpp"

namespace oracle {

struct Stiffness {
  double k_mass, k_frame, k_hinge, k_beam, k_eff, mass;
};

/// Guided-beam and axial-rod stiffnesses from Young's modulus and geometry.
Stiffness stiffness(const vba::DeviceParams& p);

/// Pull-in voltage of the symmetric parallel-plate frames, from the closed
/// form of the cubic's double root.
double pull_in_voltage(const vba::DeviceParams& p);

/// Smallest eigenvalue of a symmetric 3x3 matrix from the roots of its
/// characteristic polynomial (trigonometric form).
double min_eigenvalue_charpoly(const Eigen::Matrix3d& a);

/// Root of v (1 - v)^2 = beta on [lo, hi] by Newton from the midpoint.
double cubic_root(double beta, double lo, double hi);

/// Least-squares line through (x, y); returns the largest |residual|.
double linear_fit_residual(const double* x, const double* y, int n, double* slope = nullptr,
                           double* intercept = nullptr);

}  // namespace oracle
