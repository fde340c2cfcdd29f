// vbasim: equilibria, bifurcation diagrams, figures of merit and thermal
// calibration of the switchable-transmission resonant accelerometer.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vba/config.hpp"
#include "vba/error.hpp"
#include "vba/io.hpp"
#include "vba/merit.hpp"
#include "vba/thermal.hpp"

namespace {

using namespace vba;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Options {
  std::string config;
  std::string preset;
  std::string cap;
  std::string out;
  std::optional<double> accel_g, voltage, theta, beta_max, v_max, u_max_um;
  std::vector<double> voltages, a_grid, thetas;
  std::string scenario;
};

RunConfig resolve(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) throw Error(ErrorCode::ConfigError, "give --config or --preset, not both");
  RunConfig cfg = o.config.empty() ? preset_config(o.preset.empty() ? "table1" : o.preset) : load_config(o.config);
  if (!o.cap.empty()) cfg.cap = make_capacitance(o.cap, cfg.device);
  if (!o.out.empty()) cfg.output_dir = o.out;
  auto& a = cfg.analysis;
  if (o.accel_g) a.accel_g = *o.accel_g;
  if (o.voltage) a.voltage = *o.voltage;
  if (o.theta) a.theta = *o.theta;
  if (o.beta_max) a.beta_max = *o.beta_max;
  if (o.u_max_um) a.u_max = *o.u_max_um * 1e-6;
  if (!o.voltages.empty()) a.voltages = o.voltages;
  if (!o.a_grid.empty()) a.a_grid = o.a_grid;
  if (!o.thetas.empty()) a.thetas = o.thetas;
  if (!o.scenario.empty()) a.scenario = o.scenario;
  return cfg;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

void require_sorted(const std::vector<double>& v, const char* name) {
  require(!v.empty(), std::string(name) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], std::string(name) + " must increase");
}

template <class Rows>
std::string write_csv(const RunConfig& cfg, const std::string& name, const Rows& rows) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = (std::filesystem::path(cfg.output_dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  io::write(out, rows);
  return path;
}

int cmd_equilibria(const RunConfig& cfg) {
  const DerivedModel m = derive(cfg.device);
  const auto& a = cfg.analysis;
  require(a.voltage >= 0.0, "voltage must be non-negative");
  const Loading load = Loading::in_g(m, a.accel_g, a.voltage, a.theta);
  const EquilibriumState s = solve(m, cfg.cap, load);
  const std::string path = write_csv(cfg, "equilibria.csv", std::vector{io::equilibrium_row(a.accel_g, load, s)});
  std::printf("a_hat %g g, V %g V, theta %g K (%s)\n", a.accel_g, a.voltage, a.theta,
              std::string(model_name(cfg.cap)).c_str());
  std::printf("u  = %.6e m\nv1 = %.6e m\nv2 = %.6e m\n", s.x.u, s.x.v1, s.x.v2);
  std::printf("N1 = %.6e N, N2 = %.6e N\nf1 = %.3f Hz, f2 = %.3f Hz\n", s.n1, s.n2, s.f1, s.f2);
  std::printf("stability: %s (min eigenvalue %.6e N/m)\n", std::string(to_string(s.stability)).c_str(),
              s.min_eigenvalue);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_bifurcation(const RunConfig& cfg, std::optional<double> v_max) {
  const DerivedModel m = derive(cfg.device);
  double beta_max = cfg.analysis.beta_max;
  if (v_max) {
    require(*v_max > 0.0, "empty voltage range");
    beta_max = beta_per_volt2(m) * *v_max * *v_max;
  }
  require(beta_max > 0.0, "empty beta range");
  const double accel = cfg.analysis.accel_g * m.params.materials.gravity;
  const auto traces = bifurcation_diagram(m, cfg.cap, accel, beta_max);
  const std::string path = write_csv(cfg, "branches.csv", io::branch_rows(m, traces));
  for (const auto& tr : traces) {
    std::printf("%-17s %5zu points\n", std::string(to_string(tr.label)).c_str(), tr.points.size());
    for (const auto& e : tr.events) {
      std::printf("  %-13s beta = %.9f  V = %.4f V\n", std::string(to_string(e.kind)).c_str(), e.param,
                  std::sqrt(e.param / beta_per_volt2(m)));
    }
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

std::vector<io::RangeRow> ranges(const DerivedModel& m, const RunConfig& cfg) {
  std::vector<io::RangeRow> rows;
  for (double v : cfg.analysis.voltages) {
    const WorkingRange w = working_range(m, cfg.cap, v, cfg.analysis.u_max);
    rows.push_back({v, w.a_max, std::string(to_string(w.cause))});
  }
  return rows;
}

int cmd_merit(const RunConfig& cfg) {
  const auto& a = cfg.analysis;
  require_sorted(a.voltages, "voltages");
  require_sorted(a.a_grid, "a_grid");
  const DerivedModel m = derive(cfg.device);
  std::vector<io::MeritRow> rows;
  for (double v : a.voltages) {
    const double s0 = sf0(m, cfg.cap, v);
    for (const auto& s : nl_sf(m, cfg.cap, v, a.a_grid, s0)) rows.push_back({v, s.a_hat, s.delta_f, s.sf, s0, s.nl_sf});
  }
  const std::string p1 = write_csv(cfg, "merit.csv", rows);
  const std::string p2 = write_csv(cfg, "working_range.csv", ranges(m, cfg));
  std::printf("wrote %s\nwrote %s\n", p1.c_str(), p2.c_str());
  return 0;
}

int cmd_working_range(const RunConfig& cfg) {
  require_sorted(cfg.analysis.voltages, "voltages");
  const DerivedModel m = derive(cfg.device);
  const auto rows = ranges(m, cfg);
  for (const auto& r : rows) std::printf("V = %8.3f V  a_max = %10.4f g  %s\n", r.voltage, r.a_max, r.cause.c_str());
  std::printf("wrote %s\n", write_csv(cfg, "working_range.csv", rows).c_str());
  return 0;
}

int cmd_thermal(const RunConfig& cfg) {
  std::vector<double> thetas = cfg.analysis.thetas;
  if (thetas.empty()) {
    for (int t = static_cast<int>(kThetaMin); t <= static_cast<int>(kThetaMax); t += 10) thetas.push_back(t);
  }
  require_sorted(thetas, "thetas");
  const DerivedModel m = derive(cfg.device);
  const ThermalLaw law = ThermalLaw::from(m.params.materials);
  const double v = cfg.analysis.voltage;
  std::vector<io::ThermalRow> rows;
  for (double t : thetas) rows.push_back({t, f0_at(m, law, t), sf0(m, cfg.cap, v, t)});
  std::printf("eta_th = %.4f ppm/K, f0 = %.3f Hz\n", law.eta() * 1e6, m.f0);
  std::printf("wrote %s\n", write_csv(cfg, "thermal.csv", rows).c_str());
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  require(!cfg.analysis.scenario.empty(), "calibrate needs a scenario file");
  std::ifstream in(cfg.analysis.scenario);
  require(static_cast<bool>(in), "cannot open " + cfg.analysis.scenario);
  std::vector<io::ScenarioRow> scenario;
  try {
    scenario = io::read_scenario(in);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, cfg.analysis.scenario + ": " + e.what());
  }
  require(!scenario.empty(), "scenario has no epochs");

  std::vector<double> voltages = cfg.analysis.voltages;
  if (voltages.empty()) {
    for (const auto& r : scenario) voltages.push_back(r.voltage);
    std::sort(voltages.begin(), voltages.end());
    voltages.erase(std::unique(voltages.begin(), voltages.end()), voltages.end());
  }
  require_sorted(voltages, "voltages");

  const DerivedModel m = derive(cfg.device);
  const CalibrationMap map = build_calibration_map(m, cfg.cap, voltages);
  std::vector<io::CalibrationResultRow> rows;
  for (const auto& r : scenario) {
    const double theta = calibrate_off_state(map, r.f_ref);
    rows.push_back({r.epoch, theta, measure_on_state(map, r.voltage, theta, r.delta_f)});
    std::printf("epoch %d: theta = %.4f K, a_hat = %.6f g\n", r.epoch, rows.back().theta, rows.back().a_hat);
  }
  std::filesystem::create_directories(cfg.output_dir);
  const std::string map_path = (std::filesystem::path(cfg.output_dir) / "calibration_map.csv").string();
  std::ofstream mo(map_path, std::ios::binary);
  write_calibration_map(mo, map);
  std::printf("wrote %s\nwrote %s\n", map_path.c_str(), write_csv(cfg, "calibration.csv", rows).c_str());
  return 0;
}

bool is_config_error(ErrorCode c) {
  return c == ErrorCode::ConfigError || c == ErrorCode::MalformedTable || c == ErrorCode::InvalidParams;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for a differential resonant accelerometer with switchable force transmission"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON run configuration")->envname("VBASIM_CONFIG");
  app.add_option("--preset", o.preset, "built-in configuration (table1)")->envname("VBASIM_PRESET");
  app.add_option("--cap", o.cap, "capacitance model: parallel or poly")
      ->check(CLI::IsMember({"parallel", "poly"}))
      ->envname("VBASIM_CAP");
  app.add_option("--out", o.out, "output directory")->envname("VBASIM_OUT");

  auto* eq = app.add_subcommand("equilibria", "solve one equilibrium");
  auto* bif = app.add_subcommand("bifurcation", "beta sweep with fold/pitchfork detection");
  auto* mer = app.add_subcommand("merit", "scale factor, nonlinearity and working range");
  auto* wr = app.add_subcommand("working-range", "acceleration working range per voltage");
  auto* th = app.add_subcommand("thermal", "resonator frequency and scale factor versus temperature");
  auto* cal = app.add_subcommand("calibrate", "two-phase thermal calibration of a measurement scenario");

  for (auto* sc : {eq, bif}) sc->add_option("--accel-g", o.accel_g, "acceleration, g")->envname("VBASIM_ACCEL_G");
  for (auto* sc : {eq, th}) sc->add_option("--voltage", o.voltage, "transmission voltage, V")->envname("VBASIM_VOLTAGE");
  eq->add_option("--theta", o.theta, "temperature above reference, K")->envname("VBASIM_THETA");
  bif->add_option("--beta-max", o.beta_max, "upper end of the beta sweep")->envname("VBASIM_BETA_MAX");
  std::optional<double> v_max;
  bif->add_option("--v-max", v_max, "upper end of the sweep as a voltage")->envname("VBASIM_V_MAX");
  for (auto* sc : {mer, wr, cal}) {
    sc->add_option("--voltages", o.voltages, "voltage list, V")->delimiter(',')->envname("VBASIM_VOLTAGES");
  }
  mer->add_option("--a-grid", o.a_grid, "acceleration grid, g")->delimiter(',')->envname("VBASIM_A_GRID");
  for (auto* sc : {mer, wr}) sc->add_option("--u-max", o.u_max_um, "proof-mass deflection limit, um")->envname("VBASIM_U_MAX");
  th->add_option("--thetas", o.thetas, "temperature grid, K")->delimiter(',')->envname("VBASIM_THETAS");
  cal->add_option("--scenario", o.scenario, "CSV epoch,V_volts,f_ref_Hz,delta_f_Hz")->envname("VBASIM_SCENARIO");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (eq->parsed()) return cmd_equilibria(cfg);
    if (bif->parsed()) return cmd_bifurcation(cfg, v_max);
    if (mer->parsed()) return cmd_merit(cfg);
    if (wr->parsed()) return cmd_working_range(cfg);
    if (th->parsed()) return cmd_thermal(cfg);
    if (cal->parsed()) return cmd_calibrate(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "vbasim: %s\n", e.what());
    return is_config_error(e.code()) ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "vbasim: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
