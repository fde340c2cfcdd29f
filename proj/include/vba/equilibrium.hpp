#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "vba/capacitance.hpp"
#include "vba/model.hpp"

namespace vba {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// External loading. Both frames carry the same voltage.
struct Loading {
  double accel = 0;    // m/s^2
  double voltage = 0;  // V
  double theta = 0;    // K above the reference temperature

  static Loading in_g(const DerivedModel& model, double a_hat, double voltage, double theta = 0) {
    return {a_hat * model.params.materials.gravity, voltage, theta};
  }
};

/// Proof-mass and frame displacements, metres.
struct Displacements {
  double u = 0;
  double v1 = 0;
  double v2 = 0;
};

enum class Stability { Stable, Unstable, Critical };
std::string_view to_string(Stability s);

struct EquilibriumState {
  Displacements x;
  double u_hat = 0, v1_hat = 0, v2_hat = 0;
  Stability stability = Stability::Stable;
  double min_eigenvalue = 0;  // of the energy Hessian, N/m
  double n1 = 0, n2 = 0;      // axial forces, N
  double f1 = 0, f2 = 0;      // resonator frequencies, Hz
  double residual_norm = 0;   // N
};

/// Gradient of the potential energy: (r_u, r_v1, r_v2) in N.
Vec3 residual(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x,
              const Loading& load);

/// Second variation of the potential energy, N/m.
Mat3 hessian(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x,
             const Loading& load);

/// Criticality band for the smallest Hessian eigenvalue.
double critical_band(const DerivedModel& model);
Stability classify(const DerivedModel& model, double min_eigenvalue);

/// Force-scaled convergence tolerance, N.
double residual_tolerance(const DerivedModel& model);

/// Derived fields (scaled coordinates, stability, axial forces, frequencies)
/// of a point. Does not check that it is an equilibrium.
EquilibriumState make_state(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x,
                            const Loading& load);

/// Damped Newton on the equilibrium equations. Without a guess the voltage is
/// ramped from zero in ten steps so the solver stays on the physical branch.
EquilibriumState solve(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load,
                       std::optional<Displacements> guess = std::nullopt);

/// beta for which (u^, v^1, v^2) lies on the parallel-plate equilibrium curve.
double parametric_beta(double u_hat, double v1_hat, double v2_hat, double a_tilde, double eta_s);

struct FrameOffsets {
  double w1;  // v^1 = v* + w1
  double w2;  // v^2 = v* - w2
};

/// Closed-form solution of the frames' response linearized about the
/// symmetric state v* for a small inertial load.
FrameOffsets linearized_frames(double eta_s, double v_star, double a_tilde);

/// Stable root of v (1 - v)^2 = beta on the symmetric branch (v < 1/3).
double symmetric_root(double beta);

// ---------------------------------------------------------------- branches

/// What the continuation parameter is: beta at fixed acceleration, or the
/// acceleration in g at fixed voltage.
enum class SweepParam { Beta, AccelG };

enum class EventKind { Fold, Pitchfork, ValidityExit };
std::string_view to_string(EventKind k);

enum class BranchLabel { Symmetric, AsymmetricPlus, AsymmetricMinus, PerturbedUpper, PerturbedLower };
std::string_view to_string(BranchLabel l);

struct BranchPoint {
  double param;  // beta or a^
  EquilibriumState state;
};

struct BranchEvent {
  EventKind kind;
  double param;
  double width;  // bracketing interval in the parameter
  EquilibriumState state;
  Vec3 null_vector = Vec3::Zero();  // scaled (u^, v^1, v^2), pitchfork only
};

struct BranchTrace {
  SweepParam sweep = SweepParam::Beta;
  double fixed = 0;  // acceleration (m/s^2) for beta sweeps, voltage for a^ sweeps
  BranchLabel label = BranchLabel::Symmetric;
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
};

struct TraceOptions {
  double initial_step = 2e-3;  // scaled arclength
  double max_step = 2e-2;
  double min_step_rel = 1e-12;  // floor, relative to the parameter range
  int max_points = 20000;
  int direction = +1;           // initial sign of the parameter change
  bool stop_at_fold = false;
  double event_tol = 1e-8;      // relative bisection width of located events
};

/// Pseudo-arclength continuation from a converged start state. Stops when the
/// parameter leaves [pmin, pmax], the branch leaves the capacitance model's
/// domain (ValidityExit), or max_points is reached. Throws StepCollapse when
/// the step falls below the floor for reasons other than the domain edge.
BranchTrace trace_branch(const DerivedModel& model, const CapacitanceModel& cap, SweepParam sweep, double fixed,
                         double pmin, double pmax, const EquilibriumState& start, BranchLabel label,
                         const TraceOptions& opts = {});

/// Both asymmetric branches emerging from a located pitchfork.
std::pair<BranchTrace, BranchTrace> switch_branches(const DerivedModel& model, const CapacitanceModel& cap,
                                                    const BranchTrace& parent, const BranchEvent& pitchfork,
                                                    double pmin, double pmax, const TraceOptions& opts = {});

/// Full beta-sweep diagram at a fixed acceleration: symmetric branch plus the
/// two asymmetric ones for a = 0, or the two separated branches otherwise.
std::vector<BranchTrace> bifurcation_diagram(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                             double beta_max, const TraceOptions& opts = {});

/// The continuation parameter value of a state under the given sweep.
double sweep_value(const DerivedModel& model, SweepParam sweep, const Loading& load);
Loading sweep_loading(const DerivedModel& model, SweepParam sweep, double fixed, double param);

}  // namespace vba
