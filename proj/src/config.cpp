#include "vba/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vba/error.hpp"

namespace vba {

namespace {

using nlohmann::json;

constexpr double kUm = 1e-6;
constexpr double kGPa = 1e9;

struct LengthField {
  const char* key;
  double DeviceParams::*member;
};

constexpr LengthField kLengths[] = {
    {"thickness_um", &DeviceParams::thickness},
    {"mass_length_um", &DeviceParams::mass_length},
    {"mass_width_um", &DeviceParams::mass_width},
    {"susp_length_um", &DeviceParams::susp_length},
    {"susp_width_um", &DeviceParams::susp_width},
    {"frame_susp_length_um", &DeviceParams::frame_susp_length},
    {"frame_susp_width_um", &DeviceParams::frame_susp_width},
    {"hinge_length_um", &DeviceParams::hinge_length},
    {"hinge_width_um", &DeviceParams::hinge_width},
    {"beam_length_um", &DeviceParams::beam_length},
    {"beam_width_um", &DeviceParams::beam_width},
    {"lever_length_um", &DeviceParams::lever_length},
    {"offset_um", &DeviceParams::offset},
    {"gap_um", &DeviceParams::gap},
    {"electrode_length_um", &DeviceParams::electrode_length},
    {"electrode_width_um", &DeviceParams::electrode_width},
    {"overlap_um", &DeviceParams::overlap},
    {"pitch_um", &DeviceParams::pitch},
};

// Line of the first occurrence of "key" in the source text, 0 if absent.
int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const int line = line_of(text_, key);
    throw Error(ErrorCode::ConfigError,
                (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "'" + key + "': " + what);
  }

  double number(const json& obj, const std::string& key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::vector<double> numbers(const json& obj, const std::string& key) const {
    if (!obj.contains(key)) return {};
    const json& v = obj.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::string string(const json& obj, const std::string& key, const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  const json& object(const json& obj, const std::string& key) const {
    static const json empty = json::object();
    if (!obj.contains(key)) return empty;
    const json& v = obj.at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return v;
  }

  void only(const json& obj, std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(k, "unknown key");
    }
  }

 private:
  const std::string& text_;
};

DeviceParams read_device(const Reader& rd, const json& d) {
  DeviceParams p = table1_device();
  std::vector<std::string_view> known;
  for (const auto& f : kLengths) {
    known.emplace_back(f.key);
    p.*f.member = rd.number(d, f.key, p.*f.member / kUm) * kUm;
  }
  for (const auto& [k, v] : d.items()) {
    const bool length = std::find(known.begin(), known.end(), k) != known.end();
    if (!length && k != "electrode_count" && k != "materials" && k != "apply_frequency_correction" &&
        k != "f0_override_Hz") {
      rd.fail(k, "unknown device key");
    }
  }
  if (d.contains("electrode_count")) {
    const json& n = d.at("electrode_count");
    if (!n.is_number_integer()) rd.fail("electrode_count", "expected an integer");
    p.electrode_count = n.get<int>();
  }
  if (d.contains("apply_frequency_correction")) {
    const json& b = d.at("apply_frequency_correction");
    if (!b.is_boolean()) rd.fail("apply_frequency_correction", "expected true or false");
    p.apply_frequency_correction = b.get<bool>();
  }
  if (d.contains("f0_override_Hz")) p.f0_override = rd.number(d, "f0_override_Hz", 0.0);

  const json& m = rd.object(d, "materials");
  rd.only(m, {"density", "youngs_modulus_GPa", "tce_per_K", "thermal_expansion_per_K", "permittivity", "gravity"});
  auto& mat = p.materials;
  mat.density = rd.number(m, "density", mat.density);
  mat.youngs_modulus = rd.number(m, "youngs_modulus_GPa", mat.youngs_modulus / kGPa) * kGPa;
  mat.tce = rd.number(m, "tce_per_K", mat.tce);
  mat.thermal_expansion = rd.number(m, "thermal_expansion_per_K", mat.thermal_expansion);
  mat.permittivity = rd.number(m, "permittivity", mat.permittivity);
  mat.gravity = rd.number(m, "gravity", mat.gravity);
  try {
    p.validate();
  } catch (const Error& e) {
    rd.fail("device", e.what());
  }
  return p;
}

void require_increasing(const Reader& rd, const std::vector<double>& v, const char* key) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) rd.fail(key, "values must be strictly increasing");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": malformed JSON");
  }
  const Reader rd(text);
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "line 1: top level must be an object");
  rd.only(root, {"device", "capacitance", "analysis", "output_dir"});

  RunConfig cfg;
  cfg.device = read_device(rd, rd.object(root, "device"));

  const json& c = rd.object(root, "capacitance");
  rd.only(c, {"model", "preset", "path"});
  const std::string model = rd.string(c, "model", "parallel_plate");
  if (model == "parallel_plate") {
    if (c.contains("preset") || c.contains("path")) rd.fail("model", "parallel_plate takes no table");
    cfg.cap = ParallelPlateModel::from(cfg.device);
  } else if (model == "polynomial") {
    if (c.contains("preset") == c.contains("path")) rd.fail("model", "polynomial needs exactly one of preset or path");
    try {
      cfg.cap = c.contains("preset") ? polynomial_preset(rd.string(c, "preset", ""), cfg.device.electrode_count)
                                     : load_polynomial_file(rd.string(c, "path", ""));
    } catch (const Error& e) {
      rd.fail(c.contains("preset") ? "preset" : "path", e.what());
    }
  } else {
    rd.fail("model", "expected parallel_plate or polynomial");
  }

  const json& a = rd.object(root, "analysis");
  rd.only(a, {"accel_g", "voltage", "theta_K", "beta_max", "voltages", "a_grid", "thetas_K", "u_max_um", "scenario"});
  auto& an = cfg.analysis;
  an.accel_g = rd.number(a, "accel_g", an.accel_g);
  an.voltage = rd.number(a, "voltage", an.voltage);
  an.theta = rd.number(a, "theta_K", an.theta);
  an.beta_max = rd.number(a, "beta_max", an.beta_max);
  an.voltages = rd.numbers(a, "voltages");
  an.a_grid = rd.numbers(a, "a_grid");
  an.thetas = rd.numbers(a, "thetas_K");
  an.u_max = rd.number(a, "u_max_um", an.u_max / kUm) * kUm;
  an.scenario = rd.string(a, "scenario", "");
  if (an.voltage < 0.0) rd.fail("voltage", "must be non-negative");
  if (!(an.beta_max > 0.0)) rd.fail("beta_max", "must be positive");
  if (!(an.u_max > 0.0)) rd.fail("u_max_um", "must be positive");
  for (double v : an.voltages) {
    if (v < 0.0) rd.fail("voltages", "must be non-negative");
  }
  require_increasing(rd, an.voltages, "voltages");
  require_increasing(rd, an.a_grid, "a_grid");
  require_increasing(rd, an.thetas, "thetas_K");

  cfg.output_dir = rd.string(root, "output_dir", ".");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig preset_config(const std::string& name) {
  if (name != "table1") throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
  RunConfig cfg;
  cfg.device = table1_device();
  cfg.cap = ParallelPlateModel::from(cfg.device);
  cfg.analysis.voltages = {10, 20, 30, 40, 50, 55};
  cfg.analysis.a_grid = {-1, -0.5, 0, 0.5, 1};
  return cfg;
}

CapacitanceModel make_capacitance(const std::string& kind, const DeviceParams& device) {
  if (kind == "parallel") return ParallelPlateModel::from(device);
  if (kind == "poly") return polynomial_preset("paper-eq22", device.electrode_count);
  throw Error(ErrorCode::ConfigError, "unknown capacitance model '" + kind + "'");
}

std::string to_json(const RunConfig& cfg) {
  json d;
  for (const auto& f : kLengths) d[f.key] = cfg.device.*f.member / kUm;
  d["electrode_count"] = cfg.device.electrode_count;
  d["apply_frequency_correction"] = cfg.device.apply_frequency_correction;
  if (cfg.device.f0_override) d["f0_override_Hz"] = *cfg.device.f0_override;
  const auto& m = cfg.device.materials;
  d["materials"] = {{"density", m.density},
                    {"youngs_modulus_GPa", m.youngs_modulus / kGPa},
                    {"tce_per_K", m.tce},
                    {"thermal_expansion_per_K", m.thermal_expansion},
                    {"permittivity", m.permittivity},
                    {"gravity", m.gravity}};
  json root;
  root["device"] = d;
  if (std::holds_alternative<ParallelPlateModel>(cfg.cap)) {
    root["capacitance"] = {{"model", "parallel_plate"}};
  } else {
    root["capacitance"] = {{"model", "polynomial"}, {"preset", "paper-eq22"}};
  }
  const auto& an = cfg.analysis;
  root["analysis"] = {{"accel_g", an.accel_g},   {"voltage", an.voltage},     {"theta_K", an.theta},
                      {"beta_max", an.beta_max}, {"voltages", an.voltages},   {"a_grid", an.a_grid},
                      {"thetas_K", an.thetas},   {"u_max_um", an.u_max / kUm}};
  if (!an.scenario.empty()) root["analysis"]["scenario"] = an.scenario;
  root["output_dir"] = cfg.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace vba
