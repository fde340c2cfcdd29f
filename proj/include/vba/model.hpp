#pragma once

#include <optional>

namespace vba {

/// Material and physical constants. SI units throughout.
struct MaterialProps {
  double density = 2300.0;          // kg/m^3
  double youngs_modulus = 169e9;    // Pa, at the reference temperature
  double tce = 79e-6;               // 1/K, relative decrease of E per kelvin
  double thermal_expansion = 2.6e-6;  // 1/K
  double permittivity = 8.854e-12;  // F/m
  double gravity = 9.8;             // m/s^2, the value used to express SF in Hz/g
};

/// Device geometry. Lengths in metres.
struct DeviceParams {
  double thickness;         // b
  double mass_length;       // L_m
  double mass_width;        // B_m
  double susp_length;       // L_s
  double susp_width;        // d_s
  double frame_susp_length; // L_f
  double frame_susp_width;  // d_f
  double hinge_length;      // L_h
  double hinge_width;       // d_h
  double beam_length;       // L
  double beam_width;        // d_t
  double lever_length;      // L_l
  double offset;            // h
  double gap;               // g_0
  double electrode_length;  // L_e
  double electrode_width;   // d_e
  double overlap;           // d_0e
  double pitch;             // p_e
  int electrode_count;      // n, one side
  MaterialProps materials;

  // Multiply the stretched-beam frequency law by the 0.96 correction
  // coefficient. Off by default.
  bool apply_frequency_correction = false;
  // Replaces the ideal-clamping unstretched frequency when set (Hz).
  std::optional<double> f0_override;

  /// Throws Error{InvalidParams} when an invariant is violated.
  void validate() const;
};

/// The reference device: proof mass 2000x2500 um, 156 electrodes per side,
/// 870 um levers with a 30 um offset.
DeviceParams table1_device();

inline constexpr double kClampedEigenvalue = 4.73;
inline constexpr double kFrequencyCorrection = 0.96;

/// Everything derived from DeviceParams. Plain value; copy and adjust to
/// build synthetic variants (e.g. a different stiffness ratio).
struct DerivedModel {
  DeviceParams params;

  double k_mass;        // k_m, N/m
  double k_frame;       // k_f, N/m
  double k_hinge;       // k_h, N*m/rad (all six hinges of one frame)
  double k_beam;        // k_t, N/m
  double k_frame_sys;   // k_fs = k_f + k_h / L_l^2
  double k_eff;         // sensing-subsystem stiffness seen at the frame
  double mass;          // kg
  double geometric_amp; // A_0 = L_l / h
  double mech_amp;      // A = k_t / (k_eff A_0)
  double I_susp, I_frame, I_hinge, I_beam;  // m^4
  double beam_area;     // A_t, m^2
  double f0;            // unstretched beam frequency, Hz
  double euler_force;   // N_E, N
  double slenderness;   // sqrt(I_t / (A_t L^2))
  double gap_ratio;     // g_0 / L

  double stiffness_ratio() const;  // eta_s
};

DerivedModel derive(const DeviceParams& params);

/// Mechanical amplification of the lever for an arbitrary offset h,
/// other stiffnesses held fixed.
double amplification_at_offset(const DerivedModel& model, double offset);

struct OptimalOffset {
  double offset;             // h_opt, m
  double max_amplification;  // A_max
};

OptimalOffset optimal_offset(const DerivedModel& model);

/// f = f0 sqrt(1 + N/N_E). Throws BucklingExceeded for N <= -N_E.
double beam_frequency(const DerivedModel& model, double axial_force);

/// Dimensionless loading groups of the lumped model.
struct DimensionlessParams {
  double stiffness_ratio;  // eta_s = k_eff g0^2 / (k_m d0e^2)
  double beta;             // electrostatic load
  double accel;            // a~ = m a / (k_m d0e)
};

/// beta per volt squared for this device.
double beta_per_volt2(const DerivedModel& model);

DimensionlessParams nondimensionalize(const DerivedModel& model, double accel, double voltage);

struct DimensionalLoad {
  double accel;    // m/s^2
  double voltage;  // V, non-negative
};

DimensionalLoad dimensionalize(const DerivedModel& model, const DimensionlessParams& dp);

/// a~ per unit a^ (acceleration in g).
double accel_tilde_per_g(const DerivedModel& model);

}  // namespace vba
