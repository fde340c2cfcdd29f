#include "vba/io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "vba/csv.hpp"
#include "vba/error.hpp"

namespace vba::io {

namespace {

using csv::number;

const std::vector<std::string> kEquilibriumHeader = {"a_hat", "V_volts", "theta_K", "u_m",   "v1_m", "v2_m",
                                                     "N1_N",  "N2_N",    "f1_Hz",   "f2_Hz", "stability"};
const std::vector<std::string> kBranchHeader = {"beta", "V_volts", "u_m", "v1_m", "v2_m", "stable", "branch", "event"};
const std::vector<std::string> kMeritHeader = {"V_volts",      "a_hat",        "delta_f_Hz",
                                               "SF_Hz_per_g", "SF0_Hz_per_g", "NL_SF"};
const std::vector<std::string> kRangeHeader = {"V_volts", "a_max_g", "cause"};
const std::vector<std::string> kThermalHeader = {"theta_K", "f0_Hz", "SF_Hz_per_g"};
const std::vector<std::string> kScenarioHeader = {"epoch", "V_volts", "f_ref_Hz", "delta_f_Hz"};
const std::vector<std::string> kCalibrationHeader = {"epoch", "theta_K", "a_hat"};

// Rows of a headed CSV with a fixed column count.
class Reader {
 public:
  Reader(std::istream& in, const std::vector<std::string>& header) : in_(in), width_(header.size()) {
    if (!next() || fields_ != header) fail("unexpected header");
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (csv::trim(line).empty()) continue;
      fields_ = csv::split(line);
      return true;
    }
    return false;
  }

  bool row() {
    if (!next()) return false;
    if (fields_.size() != width_) fail("expected " + std::to_string(width_) + " fields");
    return true;
  }

  double num(std::size_t i) const {
    double x;
    if (!csv::parse_number(fields_[i], x)) fail("non-numeric field '" + fields_[i] + "'");
    return x;
  }

  int integer(std::size_t i) const {
    const double x = num(i);
    if (x != std::floor(x)) fail("expected an integer");
    return static_cast<int>(x);
  }

  const std::string& str(std::size_t i) const { return fields_[i]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedTable, what + " (line " + std::to_string(line_) + ")");
  }

 private:
  std::istream& in_;
  std::size_t width_;
  std::vector<std::string> fields_;
  int line_ = 0;
};

}  // namespace

EquilibriumRow equilibrium_row(double a_hat, const Loading& load, const EquilibriumState& s) {
  return {a_hat, load.voltage, load.theta, s.x.u, s.x.v1, s.x.v2, s.n1, s.n2, s.f1, s.f2,
          std::string(to_string(s.stability))};
}

std::vector<BranchRow> branch_rows(const DerivedModel& model, const std::vector<BranchTrace>& traces) {
  std::vector<BranchRow> rows;
  const double bpv = beta_per_volt2(model);
  auto row = [&](const BranchTrace& tr, double param, const EquilibriumState& s, std::string event) {
    const double beta = tr.sweep == SweepParam::Beta ? param : bpv * tr.fixed * tr.fixed;
    return BranchRow{beta,        std::sqrt(beta / bpv), s.x.u, s.x.v1, s.x.v2, s.stability == Stability::Stable,
                     std::string(to_string(tr.label)), std::move(event)};
  };
  for (const auto& tr : traces) {
    for (const auto& p : tr.points) rows.push_back(row(tr, p.param, p.state, ""));
    for (const auto& e : tr.events) rows.push_back(row(tr, e.param, e.state, std::string(to_string(e.kind))));
  }
  return rows;
}

void write(std::ostream& out, const std::vector<EquilibriumRow>& rows) {
  csv::write_row(out, kEquilibriumHeader);
  for (const auto& r : rows) {
    csv::write_row(out, {number(r.a_hat), number(r.voltage), number(r.theta), number(r.u), number(r.v1),
                         number(r.v2), number(r.n1), number(r.n2), number(r.f1), number(r.f2), r.stability});
  }
}

void write(std::ostream& out, const std::vector<BranchRow>& rows) {
  csv::write_row(out, kBranchHeader);
  for (const auto& r : rows) {
    csv::write_row(out, {number(r.beta), number(r.voltage), number(r.u), number(r.v1), number(r.v2),
                         r.stable ? "1" : "0", r.branch, r.event});
  }
}

void write(std::ostream& out, const std::vector<MeritRow>& rows) {
  csv::write_row(out, kMeritHeader);
  for (const auto& r : rows) {
    csv::write_row(out, {number(r.voltage), number(r.a_hat), number(r.delta_f), number(r.sf), number(r.sf0),
                         number(r.nl_sf)});
  }
}

void write(std::ostream& out, const std::vector<RangeRow>& rows) {
  csv::write_row(out, kRangeHeader);
  for (const auto& r : rows) csv::write_row(out, {number(r.voltage), number(r.a_max), r.cause});
}

void write(std::ostream& out, const std::vector<ThermalRow>& rows) {
  csv::write_row(out, kThermalHeader);
  for (const auto& r : rows) csv::write_row(out, {number(r.theta), number(r.f0), number(r.sf)});
}

void write(std::ostream& out, const std::vector<ScenarioRow>& rows) {
  csv::write_row(out, kScenarioHeader);
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.epoch), number(r.voltage), number(r.f_ref), number(r.delta_f)});
  }
}

void write(std::ostream& out, const std::vector<CalibrationResultRow>& rows) {
  csv::write_row(out, kCalibrationHeader);
  for (const auto& r : rows) csv::write_row(out, {std::to_string(r.epoch), number(r.theta), number(r.a_hat)});
}

std::vector<EquilibriumRow> read_equilibria(std::istream& in) {
  Reader rd(in, kEquilibriumHeader);
  std::vector<EquilibriumRow> out;
  while (rd.row()) {
    out.push_back({rd.num(0), rd.num(1), rd.num(2), rd.num(3), rd.num(4), rd.num(5), rd.num(6), rd.num(7),
                   rd.num(8), rd.num(9), rd.str(10)});
  }
  return out;
}

std::vector<BranchRow> read_branches(std::istream& in) {
  Reader rd(in, kBranchHeader);
  std::vector<BranchRow> out;
  while (rd.row()) {
    if (rd.str(5) != "0" && rd.str(5) != "1") rd.fail("stable must be 0 or 1");
    out.push_back({rd.num(0), rd.num(1), rd.num(2), rd.num(3), rd.num(4), rd.str(5) == "1", rd.str(6), rd.str(7)});
  }
  return out;
}

std::vector<MeritRow> read_merit(std::istream& in) {
  Reader rd(in, kMeritHeader);
  std::vector<MeritRow> out;
  while (rd.row()) out.push_back({rd.num(0), rd.num(1), rd.num(2), rd.num(3), rd.num(4), rd.num(5)});
  return out;
}

std::vector<RangeRow> read_ranges(std::istream& in) {
  Reader rd(in, kRangeHeader);
  std::vector<RangeRow> out;
  while (rd.row()) out.push_back({rd.num(0), rd.num(1), rd.str(2)});
  return out;
}

std::vector<ThermalRow> read_thermal(std::istream& in) {
  Reader rd(in, kThermalHeader);
  std::vector<ThermalRow> out;
  while (rd.row()) out.push_back({rd.num(0), rd.num(1), rd.num(2)});
  return out;
}

std::vector<ScenarioRow> read_scenario(std::istream& in) {
  Reader rd(in, kScenarioHeader);
  std::vector<ScenarioRow> out;
  while (rd.row()) out.push_back({rd.integer(0), rd.num(1), rd.num(2), rd.num(3)});
  return out;
}

std::vector<CalibrationResultRow> read_calibration_results(std::istream& in) {
  Reader rd(in, kCalibrationHeader);
  std::vector<CalibrationResultRow> out;
  while (rd.row()) out.push_back({rd.integer(0), rd.num(1), rd.num(2)});
  return out;
}

}  // namespace vba::io
