#pragma once

#include <string_view>
#include <vector>

#include "vba/capacitance.hpp"
#include "vba/equilibrium.hpp"
#include "vba/model.hpp"

namespace vba {

/// Differential output f1 - f2 in Hz at the solved equilibrium. Positive for
/// positive acceleration.
double frequency_shift(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load);

/// Tangent scale factor at zero acceleration, Hz/g. Central difference with
/// a Richardson check; throws NearCritical when the check fails.
double sf0(const DerivedModel& model, const CapacitanceModel& cap, double voltage, double theta = 0.0);

struct SfSample {
  double a_hat;    // g
  double delta_f;  // Hz
  double sf;       // secant, Hz/g
  double nl_sf;    // SF/SF0 - 1
};

/// Secant scale factor and its nonlinearity over an acceleration grid. The
/// nonlinearity at a^ = 0 is 0 by convention.
std::vector<SfSample> nl_sf(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                            const std::vector<double>& a_grid, double sf0_value);
std::vector<SfSample> nl_sf(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                            const std::vector<double>& a_grid);

enum class RangeCause { DeflectionLimit, StabilityLimit };
std::string_view to_string(RangeCause c);

struct WorkingRange {
  double a_max;  // g
  RangeCause cause;
  double u_at_max;  // m
};

inline constexpr double kDefaultDeflectionLimit = 2e-6;

/// Largest acceleration with a stable equilibrium and |u| <= u_max, reached
/// along the equilibrium branch from a^ = 0. Throws NoRange when a^ = 0
/// already has no stable state.
WorkingRange working_range(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                           double u_max = kDefaultDeflectionLimit);

/// |N2 - N1| / (m a). Throws ZeroAcceleration for a = 0.
double em_amplification(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load);

/// Closed-form relative shift per unit a~ of the linearized parallel-plate
/// model about the symmetric state v*: d(Delta f / f0)/d a~. Throws
/// BeyondCritical at or past the denominator root.
double linearized_sf(double gap_ratio, double slenderness, double geometric_amp, double eta_s, double v_star);

/// Small-voltage limit of the above.
double small_voltage_sf(double gap_ratio, double slenderness, double geometric_amp, double v_star);

/// linearized_sf for a device at voltage V, converted to Hz/g.
double linearized_sf_hz_per_g(const DerivedModel& model, double voltage);

struct MeritReport {
  double voltage;
  double sf0;
  std::vector<SfSample> samples;
  double em_amplification;  // at the first nonzero grid point, 0 if none
  WorkingRange range;
  double v_star;  // frame displacement over g0 at zero acceleration
};

MeritReport merit_report(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                         const std::vector<double>& a_grid, double u_max = kDefaultDeflectionLimit);

}  // namespace vba
