#include "vba/capacitance.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "vba/csv.hpp"
#include "vba/error.hpp"

namespace vba {

namespace {

constexpr double kUm = 1e-6;
// Box edges are closed; allow round-off from the m -> um conversion.
constexpr double kBoxSlack = 1e-9;

// Printed coefficients of the three-finger fit (x1e-5), upper sign (side 1).
constexpr PolynomialModel::Table kThreeFingerSide1 = {{
    {1.9e-5, 0.82e-5, -0.15e-5},
    {-7.4e-5, -10.5e-5, -16e-5},
    {16e-5, 25e-5, 16e-5},
    {1359e-5, 977e-5, 1062e-5},
    {5634e-5, 8012e-5, 42805e-5},
}};

int u_power(int r) { return 4 - r; }
int v_power(int s) { return 2 - s; }

PolynomialModel::Table mirror(const PolynomialModel::Table& t) {
  PolynomialModel::Table out = t;
  for (int r = 0; r < 5; ++r) {
    if (u_power(r) % 2 == 1) {
      for (auto& c : out[r]) c = -c;
    }
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedTable, what); }

}  // namespace

ParallelPlateModel ParallelPlateModel::from(const DeviceParams& p) {
  return {p.electrode_count, p.thickness, p.overlap, p.gap, p.materials.permittivity};
}

CapacitanceSample ParallelPlateModel::evaluate(Side side, double u, double v) const {
  const double s = side_sign(side);
  const double gap_now = gap - v;
  if (!(gap_now > 0.0)) throw Error(ErrorCode::GapClosed, "frame displacement closes the gap");
  const double area = overlap + s * u;
  if (!(area > 0.0)) throw Error(ErrorCode::OutOfValidityBox, "electrode overlap vanishes");

  const double k = electrode_count * permittivity * thickness / 2.0;
  CapacitanceSample c;
  c.c = k * area / gap_now;
  c.c_u = k * s / gap_now;
  c.c_v = k * area / (gap_now * gap_now);
  c.c_uu = 0.0;
  c.c_uv = k * s / (gap_now * gap_now);
  c.c_vv = 2.0 * k * area / (gap_now * gap_now * gap_now);
  return c;
}

bool PolynomialModel::in_box(double u, double v) const {
  const double uu = u / kUm;
  const double vv = v / kUm;
  const double su = kBoxSlack * (u_max_um - u_min_um);
  const double sv = kBoxSlack * (v_max_um - v_min_um);
  return uu >= u_min_um - su && uu <= u_max_um + su && vv >= v_min_um - sv && vv <= v_max_um + sv;
}

CapacitanceSample PolynomialModel::evaluate(Side side, double u, double v) const {
  if (!in_box(u, v)) throw Error(ErrorCode::OutOfValidityBox, "outside the fitted (u, v) range");
  const double uu = u / kUm;
  const double vv = v / kUm;
  const auto& t = coeffs[side == Side::One ? 0 : 1];

  // Powers 0..4 of u and 0..2 of v.
  double up[5] = {1, uu, uu * uu, uu * uu * uu, uu * uu * uu * uu};
  double vp[3] = {1, vv, vv * vv};
  auto pw = [](const double* p, int k) { return k < 0 ? 0.0 : p[k]; };

  double P = 0, Pu = 0, Pv = 0, Puu = 0, Puv = 0, Pvv = 0;
  for (int r = 0; r < 5; ++r) {
    const int a = u_power(r);
    for (int s = 0; s < 3; ++s) {
      const int b = v_power(s);
      const double c = t[r][s];
      P += c * up[a] * vp[b];
      Pu += c * a * pw(up, a - 1) * vp[b];
      Pv += c * b * up[a] * pw(vp, b - 1);
      Puu += c * a * (a - 1) * pw(up, a - 2) * vp[b];
      Puv += c * a * b * pw(up, a - 1) * pw(vp, b - 1);
      Pvv += c * b * (b - 1) * up[a] * pw(vp, b - 2);
    }
  }
  const double k = scale * farads_per_unit;
  CapacitanceSample out;
  out.c = k * P;
  out.c_u = k * Pu / kUm;
  out.c_v = k * Pv / kUm;
  out.c_uu = k * Puu / (kUm * kUm);
  out.c_uv = k * Puv / (kUm * kUm);
  out.c_vv = k * Pvv / (kUm * kUm);
  return out;
}

std::string_view model_name(const CapacitanceModel& model) {
  return std::holds_alternative<ParallelPlateModel>(model) ? "parallel_plate" : "polynomial";
}

CapacitanceSample evaluate(const CapacitanceModel& model, Side side, double u, double v) {
  return std::visit([&](const auto& m) { return m.evaluate(side, u, v); }, model);
}

double coenergy_factor(const CapacitanceModel& model) {
  return std::visit([](const auto& m) { return m.coenergy_factor(); }, model);
}

double capacitance(const CapacitanceModel& model, Side side, double u, double v) {
  return evaluate(model, side, u, v).c;
}

ForcePair forces(const CapacitanceModel& model, Side side, double u, double v, double voltage) {
  const auto c = evaluate(model, side, u, v);
  const double q = coenergy_factor(model) * voltage * voltage / 2.0;
  return {q * c.c_v, q * c.c_u};
}

PolynomialModel polynomial_preset(std::string_view name, int electrode_count) {
  if (name != "paper-eq22") malformed("unknown polynomial preset '" + std::string(name) + "'");
  if (electrode_count < 1) malformed("electrode count must be positive");
  PolynomialModel m;
  m.coeffs = {kThreeFingerSide1, mirror(kThreeFingerSide1)};
  m.scale = electrode_count / 3.0;
  m.farads_per_unit = kPresetFaradsPerUnit;
  return m;
}

PolynomialModel load_polynomial(std::istream& in) {
  PolynomialModel m;
  std::array<std::array<std::array<bool, 3>, 5>, 2> seen{};
  bool header = false;
  bool have_scale = false, have_unit = false, have_u = false, have_v = false;
  std::string line;
  int lineno = 0;
  int rows = 0;

  auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto f = csv::split(std::string_view(t).substr(1));
      if (f.empty()) continue;
      const std::string& key = f[0];
      std::vector<double> vals;
      for (std::size_t i = 1; i < f.size(); ++i) {
        double x;
        if (!csv::parse_number(f[i], x)) malformed("bad metadata value" + where());
        vals.push_back(x);
      }
      if (key == "scale" && vals.size() == 1) {
        m.scale = vals[0];
        have_scale = true;
      } else if (key == "farads_per_unit" && vals.size() == 1) {
        m.farads_per_unit = vals[0];
        have_unit = true;
      } else if (key == "u_range_um" && vals.size() == 2) {
        m.u_min_um = vals[0];
        m.u_max_um = vals[1];
        have_u = true;
      } else if (key == "v_range_um" && vals.size() == 2) {
        m.v_min_um = vals[0];
        m.v_max_um = vals[1];
        have_v = true;
      } else {
        malformed("unknown or malformed metadata '" + key + "'" + where());
      }
      continue;
    }
    const auto f = csv::split(t);
    if (!header) {
      if (f != std::vector<std::string>{"side", "r", "s", "coeff_pF_per_um"}) {
        malformed("expected header side,r,s,coeff_pF_per_um" + where());
      }
      header = true;
      continue;
    }
    if (f.size() != 4) malformed("expected 4 fields" + where());
    double side, r, s, c;
    if (!csv::parse_number(f[0], side) || !csv::parse_number(f[1], r) || !csv::parse_number(f[2], s) ||
        !csv::parse_number(f[3], c)) {
      malformed("non-numeric field" + where());
    }
    const int si = static_cast<int>(side), ri = static_cast<int>(r), sj = static_cast<int>(s);
    if (si != side || ri != r || sj != s || si < 1 || si > 2 || ri < 1 || ri > 5 || sj < 1 || sj > 3) {
      malformed("index out of range" + where());
    }
    if (seen[si - 1][ri - 1][sj - 1]) malformed("duplicate entry" + where());
    seen[si - 1][ri - 1][sj - 1] = true;
    m.coeffs[si - 1][ri - 1][sj - 1] = c;
    ++rows;
  }
  if (!header) malformed("empty table");
  if (rows != 30) malformed("expected 5x3 coefficients for each side, got " + std::to_string(rows));
  if (!(have_scale && have_unit && have_u && have_v)) {
    malformed("missing metadata (scale, farads_per_unit, u_range_um, v_range_um)");
  }
  if (!(m.scale > 0.0) || !(m.farads_per_unit > 0.0)) malformed("scale and unit must be positive");
  if (!(m.u_min_um < m.u_max_um) || !(m.v_min_um < m.v_max_um)) malformed("empty validity box");
  return m;
}

PolynomialModel load_polynomial_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open " + path);
  return load_polynomial(in);
}

void write_polynomial(std::ostream& out, const PolynomialModel& m) {
  out << "# scale," << csv::number(m.scale) << '\n';
  out << "# farads_per_unit," << csv::number(m.farads_per_unit) << '\n';
  out << "# u_range_um," << csv::number(m.u_min_um) << ',' << csv::number(m.u_max_um) << '\n';
  out << "# v_range_um," << csv::number(m.v_min_um) << ',' << csv::number(m.v_max_um) << '\n';
  out << "side,r,s,coeff_pF_per_um\n";
  for (int side = 0; side < 2; ++side) {
    for (int r = 0; r < 5; ++r) {
      for (int s = 0; s < 3; ++s) {
        out << side + 1 << ',' << r + 1 << ',' << s + 1 << ',' << csv::number(m.coeffs[side][r][s]) << '\n';
      }
    }
  }
}

}  // namespace vba
