#include "vba/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vba/error.hpp"

namespace vba {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidParams, std::string(name) + " must be positive");
  }
}

double second_moment(double thickness, double width) {
  return thickness * width * width * width / 12.0;
}

}  // namespace

void DeviceParams::validate() const {
  require_positive(thickness, "thickness");
  require_positive(mass_length, "mass_length");
  require_positive(mass_width, "mass_width");
  require_positive(susp_length, "susp_length");
  require_positive(susp_width, "susp_width");
  require_positive(frame_susp_length, "frame_susp_length");
  require_positive(frame_susp_width, "frame_susp_width");
  require_positive(hinge_length, "hinge_length");
  require_positive(hinge_width, "hinge_width");
  require_positive(beam_length, "beam_length");
  require_positive(beam_width, "beam_width");
  require_positive(lever_length, "lever_length");
  require_positive(offset, "offset");
  require_positive(gap, "gap");
  require_positive(electrode_length, "electrode_length");
  require_positive(electrode_width, "electrode_width");
  require_positive(overlap, "overlap");
  require_positive(pitch, "pitch");
  if (electrode_count < 1) throw Error(ErrorCode::InvalidParams, "electrode_count must be >= 1");
  if (overlap > electrode_width) throw Error(ErrorCode::InvalidParams, "overlap exceeds electrode width");
  if (gap >= pitch) throw Error(ErrorCode::InvalidParams, "gap must be smaller than the pitch");

  const auto& m = materials;
  require_positive(m.density, "density");
  require_positive(m.youngs_modulus, "youngs_modulus");
  require_positive(m.permittivity, "permittivity");
  require_positive(m.gravity, "gravity");
  if (!(m.tce > 0.0 && m.tce < 1e-3)) throw Error(ErrorCode::InvalidParams, "tce must lie in (0, 1e-3)");
  if (!(m.thermal_expansion > 0.0 && m.thermal_expansion < 1e-3)) {
    throw Error(ErrorCode::InvalidParams, "thermal_expansion must lie in (0, 1e-3)");
  }
  if (f0_override) require_positive(*f0_override, "f0_override");
}

DeviceParams table1_device() {
  constexpr double um = 1e-6;
  DeviceParams p{};
  p.thickness = 50 * um;
  p.mass_length = 2000 * um;
  p.mass_width = 2500 * um;
  p.susp_length = 450 * um;
  p.susp_width = 6 * um;
  p.frame_susp_length = 900 * um;
  p.frame_susp_width = 6 * um;
  p.hinge_length = 32 * um;
  p.hinge_width = 8 * um;
  p.beam_length = 300 * um;
  p.beam_width = 4 * um;
  p.lever_length = 870 * um;
  p.offset = 30 * um;
  p.gap = 2.5 * um;
  p.electrode_length = 17 * um;
  p.electrode_width = 8 * um;
  p.overlap = p.electrode_width / 2;
  p.pitch = 16 * um;
  p.electrode_count = 156;
  p.materials = MaterialProps{};
  return p;
}

double DerivedModel::stiffness_ratio() const {
  const double g0 = params.gap;
  const double d0e = params.overlap;
  return k_eff * g0 * g0 / (k_mass * d0e * d0e);
}

DerivedModel derive(const DeviceParams& params) {
  params.validate();
  const double E = params.materials.youngs_modulus;
  const double b = params.thickness;

  DerivedModel m{};
  m.params = params;
  m.I_susp = second_moment(b, params.susp_width);
  m.I_frame = second_moment(b, params.frame_susp_width);
  m.I_hinge = second_moment(b, params.hinge_width);
  m.I_beam = second_moment(b, params.beam_width);
  m.beam_area = b * params.beam_width;

  const double Ls = params.susp_length;
  const double Lf = params.frame_susp_length;
  const double L = params.beam_length;
  const double Ll = params.lever_length;

  m.k_mass = 48.0 * E * m.I_susp / (Ls * Ls * Ls);
  m.k_frame = 48.0 * E * m.I_frame / (Lf * Lf * Lf);
  m.k_hinge = 6.0 * E * m.I_hinge / params.hinge_length;
  m.k_beam = E * m.beam_area / L;
  m.k_frame_sys = m.k_frame + m.k_hinge / (Ll * Ll);
  m.geometric_amp = Ll / params.offset;
  const double A0 = m.geometric_amp;
  m.k_eff = m.k_beam / (A0 * A0) * (1.0 + A0 * A0 * m.k_frame_sys / m.k_beam);
  m.mech_amp = m.k_beam / (m.k_eff * A0);
  m.mass = params.materials.density * params.mass_length * params.mass_width * b;

  const double pi = std::numbers::pi;
  const double lambda2 = kClampedEigenvalue * kClampedEigenvalue;
  m.f0 = params.f0_override.value_or(
      lambda2 / (2.0 * pi) *
      std::sqrt(E * m.I_beam / (params.materials.density * m.beam_area * L * L * L * L)));
  m.euler_force = 4.0 * pi * pi * E * m.I_beam / (L * L);
  m.slenderness = std::sqrt(m.I_beam / (m.beam_area * L * L));
  m.gap_ratio = params.gap / L;
  return m;
}

double amplification_at_offset(const DerivedModel& model, double offset) {
  if (!(offset > 0.0)) throw Error(ErrorCode::InvalidParams, "offset must be positive");
  const double A0 = model.params.lever_length / offset;
  return A0 / (1.0 + A0 * A0 * model.k_frame_sys / model.k_beam);
}

OptimalOffset optimal_offset(const DerivedModel& model) {
  const double ratio = model.k_frame_sys / model.k_beam;
  return {model.params.lever_length * std::sqrt(ratio), 0.5 / std::sqrt(ratio)};
}

double beam_frequency(const DerivedModel& model, double axial_force) {
  const double corr = model.params.apply_frequency_correction ? kFrequencyCorrection : 1.0;
  const double arg = 1.0 + corr * axial_force / model.euler_force;
  if (!(arg > 0.0)) {
    throw Error(ErrorCode::BucklingExceeded, "compressive axial force reaches the Euler load");
  }
  return model.f0 * std::sqrt(arg);
}

double beta_per_volt2(const DerivedModel& model) {
  const auto& p = model.params;
  const double g0 = p.gap;
  return p.electrode_count * p.materials.permittivity * p.thickness * p.overlap /
         (2.0 * model.k_eff * g0 * g0 * g0);
}

double accel_tilde_per_g(const DerivedModel& model) {
  return model.mass * model.params.materials.gravity / (model.k_mass * model.params.overlap);
}

DimensionlessParams nondimensionalize(const DerivedModel& model, double accel, double voltage) {
  if (voltage < 0.0) throw Error(ErrorCode::InvalidParams, "voltage must be non-negative");
  return {model.stiffness_ratio(), beta_per_volt2(model) * voltage * voltage,
          model.mass * accel / (model.k_mass * model.params.overlap)};
}

DimensionalLoad dimensionalize(const DerivedModel& model, const DimensionlessParams& dp) {
  if (dp.beta < 0.0) throw Error(ErrorCode::InvalidParams, "beta must be non-negative");
  return {dp.accel * model.k_mass * model.params.overlap / model.mass,
          std::sqrt(dp.beta / beta_per_volt2(model))};
}

}  // namespace vba
