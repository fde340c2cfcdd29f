#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vba/capacitance.hpp"
#include "vba/equilibrium.hpp"
#include "vba/model.hpp"

namespace vba {

/// Linear temperature laws of the Young's modulus and of lengths.
struct ThermalLaw {
  double tce = 79e-6;               // gamma_E, 1/K
  double expansion = 2.6e-6;        // alpha, 1/K
  double t_ref = 293.15;            // K

  static ThermalLaw from(const MaterialProps& m) { return {m.tce, m.thermal_expansion, 293.15}; }

  /// Temperature coefficient of the resonator frequency, (gamma_E - alpha)/2.
  double eta() const { return (tce - expansion) / 2.0; }
  /// Stiffness scaling at theta.
  double xi(double theta) const { return 1.0 - tce * theta; }
};

inline constexpr double kThetaMin = -80.0;
inline constexpr double kThetaMax = 40.0;

/// Unstretched resonator frequency at theta. The linear law by default; the
/// exact square-root form when `exact` is set. Throws OutOfThermalRange
/// outside [kThetaMin, kThetaMax].
double f0_at(const DerivedModel& model, const ThermalLaw& law, double theta, bool exact = false);

/// The device at theta: every stiffness and the Euler load scaled by xi, the
/// unstretched frequency following the linear law. Gaps are not expanded.
DerivedModel at_temperature(const DerivedModel& model, double theta);

/// Displacements of the device with every stiffness multiplied by xi, from
/// the unscaled problem at (a / xi, V^2 / xi).
Displacements scaled_displacements(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                   double voltage, double xi);

/// Equilibrium at theta obtained from the reference-temperature problem at
/// (a / xi, V^2 / xi), using the invariance of the equilibrium equations
/// under k -> xi k, a -> xi a, V^2 -> xi V^2.
EquilibriumState scaled_equilibrium(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                    double voltage, double theta);

struct TcsfEstimate {
  double numerical;  // 1/K, finite difference of SF over +/-10 K
  double analytic;   // 3 gamma_E / 2
  double predicted;  // 2 gamma_E - eta_th, the small-voltage law before eta ~ gamma/2
  double sf_ref;     // Hz/g at theta = 0
};

/// Temperature coefficient of the scale factor at voltage V. Throws
/// RegimeViolation when V is outside the SF ~ V^2 regime.
TcsfEstimate tcsf(const DerivedModel& model, const CapacitanceModel& cap, double voltage);

/// Numerical TCSF without the regime check, for any voltage below critical.
double tcsf_unchecked(const DerivedModel& model, const CapacitanceModel& cap, double voltage);

/// Thermometer line plus the scale-factor look-up table.
struct CalibrationRow {
  double voltage;  // V
  double sf_ref;   // Hz/g
  double tcsf;     // 1/K
};

struct CalibrationMap {
  double f0_ref;   // Hz at theta = 0
  double eta_th;   // 1/K
  std::vector<CalibrationRow> rows;  // strictly increasing voltage
  double theta_min = kThetaMin;
  double theta_max = kThetaMax;

  void validate() const;
  /// SF_ref and TCSF at V, piecewise-linear in V^2. Throws OutOfMapRange.
  CalibrationRow at(double voltage) const;
};

/// Builds the map by simulation: f0 line from the model, SF_ref and TCSF per voltage.
CalibrationMap build_calibration_map(const DerivedModel& model, const CapacitanceModel& cap,
                                     const std::vector<double>& voltages);

/// Temperature from the OFF-state (zero voltage) resonator frequency.
double calibrate_off_state(const CalibrationMap& map, double measured_f_ref);

/// Acceleration (in g) from the ON-state differential frequency.
double measure_on_state(const CalibrationMap& map, double voltage, double theta, double measured_delta_f);

void write_calibration_map(std::ostream& out, const CalibrationMap& map);
CalibrationMap read_calibration_map(std::istream& in);

}  // namespace vba
