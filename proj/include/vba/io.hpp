#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vba/equilibrium.hpp"
#include "vba/merit.hpp"

namespace vba::io {

struct EquilibriumRow {
  double a_hat, voltage, theta;
  double u, v1, v2;
  double n1, n2, f1, f2;
  std::string stability;
};

struct BranchRow {
  double beta, voltage;
  double u, v1, v2;
  bool stable;
  std::string branch;
  std::string event;  // empty for ordinary points
};

struct MeritRow {
  double voltage, a_hat, delta_f, sf, sf0, nl_sf;
};

struct RangeRow {
  double voltage, a_max;
  std::string cause;
};

struct ThermalRow {
  double theta, f0, sf;
};

struct ScenarioRow {
  int epoch;
  double voltage, f_ref, delta_f;
};

struct CalibrationResultRow {
  int epoch;
  double theta, a_hat;
};

EquilibriumRow equilibrium_row(double a_hat, const Loading& load, const EquilibriumState& s);

/// Branch points in trace order, each event appended after its branch as a
/// flagged row.
std::vector<BranchRow> branch_rows(const DerivedModel& model, const std::vector<BranchTrace>& traces);

void write(std::ostream& out, const std::vector<EquilibriumRow>& rows);
void write(std::ostream& out, const std::vector<BranchRow>& rows);
void write(std::ostream& out, const std::vector<MeritRow>& rows);
void write(std::ostream& out, const std::vector<RangeRow>& rows);
void write(std::ostream& out, const std::vector<ThermalRow>& rows);
void write(std::ostream& out, const std::vector<ScenarioRow>& rows);
void write(std::ostream& out, const std::vector<CalibrationResultRow>& rows);

/// Readers check the header and field count and throw MalformedTable with
/// the line number.
std::vector<EquilibriumRow> read_equilibria(std::istream& in);
std::vector<BranchRow> read_branches(std::istream& in);
std::vector<MeritRow> read_merit(std::istream& in);
std::vector<RangeRow> read_ranges(std::istream& in);
std::vector<ThermalRow> read_thermal(std::istream& in);
std::vector<ScenarioRow> read_scenario(std::istream& in);
std::vector<CalibrationResultRow> read_calibration_results(std::istream& in);

}  // namespace vba::io
