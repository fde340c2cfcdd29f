#include "vba/thermal.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "vba/csv.hpp"
#include "vba/error.hpp"
#include "vba/merit.hpp"

namespace vba {

namespace {

constexpr double kTcsfTheta = 10.0;     // K
constexpr double kRegimeTolerance = 0.05;
constexpr double kSfStep = 1e-3;        // g

void check_range(double theta) {
  if (!(theta >= kThetaMin && theta <= kThetaMax)) {
    throw Error(ErrorCode::OutOfThermalRange,
                "theta " + csv::number(theta) + " K outside [" + csv::number(kThetaMin) + ", " +
                    csv::number(kThetaMax) + "] K");
  }
}

// Tangent SF at theta from the reference-temperature problem, with one
// Richardson extrapolation of the central difference.
double sf_scaled(const DerivedModel& model, const CapacitanceModel& cap, double voltage, double theta) {
  auto central = [&](double h) {
    const double a = h * model.params.materials.gravity;
    const auto plus = scaled_equilibrium(model, cap, a, voltage, theta);
    const auto minus = scaled_equilibrium(model, cap, -a, voltage, theta);
    return ((plus.f1 - plus.f2) - (minus.f1 - minus.f2)) / (2.0 * h);
  };
  const double coarse = central(kSfStep);
  const double fine = central(kSfStep / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

[[noreturn]] void bad_map(const std::string& what) { throw Error(ErrorCode::MalformedTable, what); }

}  // namespace

double f0_at(const DerivedModel& model, const ThermalLaw& law, double theta, bool exact) {
  check_range(theta);
  if (exact) return model.f0 * std::sqrt((1.0 - law.tce * theta) * (1.0 + law.expansion * theta));
  return model.f0 * (1.0 - law.eta() * theta);
}

DerivedModel at_temperature(const DerivedModel& model, double theta) {
  const ThermalLaw law = ThermalLaw::from(model.params.materials);
  const double xi = law.xi(theta);
  if (!(xi > 0.0)) throw Error(ErrorCode::OutOfThermalRange, "stiffness scaling is not positive");
  DerivedModel m = model;
  m.f0 = f0_at(model, law, theta);
  m.params.materials.youngs_modulus *= xi;
  m.k_mass *= xi;
  m.k_frame *= xi;
  m.k_hinge *= xi;
  m.k_beam *= xi;
  m.k_frame_sys *= xi;
  m.k_eff *= xi;
  m.euler_force *= xi;
  return m;
}

Displacements scaled_displacements(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                   double voltage, double xi) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidParams, "stiffness scaling must be positive");
  return solve(model, cap, Loading{accel / xi, voltage / std::sqrt(xi), 0.0}).x;
}

EquilibriumState scaled_equilibrium(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                    double voltage, double theta) {
  check_range(theta);
  const double xi = ThermalLaw::from(model.params.materials).xi(theta);
  const Displacements x = scaled_displacements(model, cap, accel, voltage, xi);
  return make_state(model, cap, x, Loading{accel, voltage, theta});
}

double tcsf_unchecked(const DerivedModel& model, const CapacitanceModel& cap, double voltage) {
  const double ref = sf_scaled(model, cap, voltage, 0.0);
  if (ref == 0.0) throw Error(ErrorCode::RegimeViolation, "scale factor vanishes");
  const double hot = sf_scaled(model, cap, voltage, kTcsfTheta);
  const double cold = sf_scaled(model, cap, voltage, -kTcsfTheta);
  return (hot - cold) / (2.0 * kTcsfTheta * ref);
}

TcsfEstimate tcsf(const DerivedModel& model, const CapacitanceModel& cap, double voltage) {
  if (!(voltage > 0.0)) throw Error(ErrorCode::RegimeViolation, "voltage must be positive");
  const ThermalLaw law = ThermalLaw::from(model.params.materials);
  const double ref = sf_scaled(model, cap, voltage, 0.0);

  // SF must follow V^2: against the small-voltage closed form for parallel
  // plates, against the half-voltage value otherwise.
  double expected;
  if (std::holds_alternative<ParallelPlateModel>(cap)) {
    const double beta = beta_per_volt2(model) * voltage * voltage;
    expected = model.f0 * accel_tilde_per_g(model) *
               small_voltage_sf(model.gap_ratio, model.slenderness, model.geometric_amp, beta);
  } else {
    expected = 4.0 * sf_scaled(model, cap, voltage / 2.0, 0.0);
  }
  if (!(std::abs(ref - expected) <= kRegimeTolerance * std::abs(expected))) {
    throw Error(ErrorCode::RegimeViolation, "voltage " + csv::number(voltage) + " V is outside the SF ~ V^2 regime");
  }

  TcsfEstimate e;
  e.sf_ref = ref;
  e.numerical = tcsf_unchecked(model, cap, voltage);
  e.analytic = 1.5 * law.tce;
  e.predicted = 2.0 * law.tce - law.eta();
  return e;
}

void CalibrationMap::validate() const {
  if (!(f0_ref > 0.0)) bad_map("f0 must be positive");
  if (!(eta_th > 0.0)) bad_map("eta_th must be positive");
  if (rows.empty()) bad_map("calibration map has no rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].sf_ref > 0.0)) bad_map("SF_ref must be positive (row " + std::to_string(i + 1) + ")");
    if (!(rows[i].voltage > 0.0)) bad_map("voltage must be positive (row " + std::to_string(i + 1) + ")");
    if (!std::isfinite(rows[i].tcsf)) bad_map("TCSF must be finite (row " + std::to_string(i + 1) + ")");
    if (i > 0 && !(rows[i].voltage > rows[i - 1].voltage)) bad_map("voltages must increase");
  }
}

CalibrationRow CalibrationMap::at(double voltage) const {
  if (rows.empty() || !(voltage >= rows.front().voltage && voltage <= rows.back().voltage)) {
    throw Error(ErrorCode::OutOfMapRange, "voltage " + csv::number(voltage) + " V outside the tabulated range");
  }
  std::size_t i = 0;
  while (i + 1 < rows.size() && rows[i + 1].voltage < voltage) ++i;
  if (i + 1 == rows.size() || rows[i].voltage == voltage) return rows[i];
  const auto& a = rows[i];
  const auto& b = rows[i + 1];
  const double t = (voltage * voltage - a.voltage * a.voltage) / (b.voltage * b.voltage - a.voltage * a.voltage);
  return {voltage, a.sf_ref + t * (b.sf_ref - a.sf_ref), a.tcsf + t * (b.tcsf - a.tcsf)};
}

CalibrationMap build_calibration_map(const DerivedModel& model, const CapacitanceModel& cap,
                                     const std::vector<double>& voltages) {
  CalibrationMap map;
  map.f0_ref = model.f0;
  map.eta_th = ThermalLaw::from(model.params.materials).eta();
  for (double v : voltages) map.rows.push_back({v, sf_scaled(model, cap, v, 0.0), tcsf_unchecked(model, cap, v)});
  map.validate();
  return map;
}

double calibrate_off_state(const CalibrationMap& map, double measured_f_ref) {
  const double theta = (1.0 - measured_f_ref / map.f0_ref) / map.eta_th;
  if (!(theta >= map.theta_min && theta <= map.theta_max)) {
    throw Error(ErrorCode::OutOfMapRange, "reference frequency maps outside the calibrated temperature range");
  }
  return theta;
}

double measure_on_state(const CalibrationMap& map, double voltage, double theta, double measured_delta_f) {
  const CalibrationRow r = map.at(voltage);
  return measured_delta_f / (r.sf_ref * (1.0 + r.tcsf * theta));
}

void write_calibration_map(std::ostream& out, const CalibrationMap& map) {
  out << "f0_Hz," << csv::number(map.f0_ref) << ",eta_th_per_K," << csv::number(map.eta_th) << '\n';
  out << "V_volts,SF_ref_Hz_per_g,TCSF_per_K\n";
  for (const auto& r : map.rows) {
    csv::write_row(out, {csv::number(r.voltage), csv::number(r.sf_ref), csv::number(r.tcsf)});
  }
}

CalibrationMap read_calibration_map(std::istream& in) {
  CalibrationMap map;
  std::string line;
  int lineno = 0;
  auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };
  auto num = [&](const std::string& s) {
    double x;
    if (!csv::parse_number(s, x)) bad_map("non-numeric field '" + s + "'" + where());
    return x;
  };

  bool meta = false, header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    const auto f = csv::split(t);
    if (!meta) {
      if (f.size() != 4 || f[0] != "f0_Hz" || f[2] != "eta_th_per_K") bad_map("expected f0_Hz,<v>,eta_th_per_K,<v>" + where());
      map.f0_ref = num(f[1]);
      map.eta_th = num(f[3]);
      meta = true;
    } else if (!header) {
      if (f != std::vector<std::string>{"V_volts", "SF_ref_Hz_per_g", "TCSF_per_K"}) {
        bad_map("expected header V_volts,SF_ref_Hz_per_g,TCSF_per_K" + where());
      }
      header = true;
    } else {
      if (f.size() != 3) bad_map("expected 3 fields" + where());
      map.rows.push_back({num(f[0]), num(f[1]), num(f[2])});
    }
  }
  if (!header) bad_map("incomplete calibration map");
  map.validate();
  return map;
}

}  // namespace vba
