#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vba/capacitance.hpp"
#include "vba/model.hpp"

namespace vba {

/// Analysis inputs shared by the command-line verbs. Every field has a
/// default so a config file only lists what it changes.
struct AnalysisConfig {
  double accel_g = 0.0;                 // a^
  double voltage = 0.0;                 // V
  double theta = 0.0;                   // K
  double beta_max = 0.2;
  std::vector<double> voltages;         // merit, working range, calibration map
  std::vector<double> a_grid;           // g
  std::vector<double> thetas;           // K
  double u_max = 2e-6;                  // m
  std::string scenario;                 // path of a calibration scenario
};

struct RunConfig {
  DeviceParams device;
  CapacitanceModel cap;
  AnalysisConfig analysis;
  std::string output_dir = ".";
};

/// Parses a JSON config. Device lengths are micrometres, the Young's modulus
/// GPa; everything else SI. Missing device fields fall back to the reference
/// device. Throws Error{ConfigError} with the offending line when known.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Reference device with the parallel-plate model.
RunConfig preset_config(const std::string& name);

/// The capacitance model named by `kind` ("parallel" or "poly") for a device.
CapacitanceModel make_capacitance(const std::string& kind, const DeviceParams& device);

/// The config as JSON in the same units parse_config reads.
std::string to_json(const RunConfig& config);

}  // namespace vba
