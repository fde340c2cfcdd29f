#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "vba/model.hpp"

namespace vba {

/// Electrode set: 1 is the left frame (overlap grows with u), 2 the right.
enum class Side { One = 1, Two = 2 };

inline double side_sign(Side side) { return side == Side::One ? 1.0 : -1.0; }

/// Capacitance and its partial derivatives in SI units (F, F/m, F/m^2).
/// u is the proof-mass displacement, v the frame displacement toward the mass.
struct CapacitanceSample {
  double c = 0;
  double c_u = 0;
  double c_v = 0;
  double c_uu = 0;
  double c_uv = 0;
  double c_vv = 0;
};

struct ForcePair {
  double fx = 0;  // on the frame, positive pulls it toward the mass
  double fy = 0;  // on the proof mass, along the sensing axis
};

/// Gap-closing, area-changing parallel-plate electrodes.
struct ParallelPlateModel {
  int electrode_count;
  double thickness;
  double overlap;
  double gap;
  double permittivity;

  static ParallelPlateModel from(const DeviceParams& params);

  CapacitanceSample evaluate(Side side, double u, double v) const;
  // The lumped equilibrium equations of this geometry carry twice the
  // co-energy of the capacitance expression.
  double coenergy_factor() const { return 2.0; }
};

/// Polynomial fit C(u, v) = scale * unit * sum c[r][s] u^(4-r) v^(2-s),
/// with u, v in micrometres. Rows with odd powers of u flip sign between sides.
struct PolynomialModel {
  using Table = std::array<std::array<double, 3>, 5>;

  std::array<Table, 2> coeffs;  // [side-1][r][s], already including any printed 1e-5 factor
  double scale = 1.0;           // electrode-count scaling, n/3 for a three-finger fit
  double farads_per_unit = 1e-12;
  double u_min_um = -2.0, u_max_um = 2.0;
  double v_min_um = -0.5, v_max_um = 2.0;

  CapacitanceSample evaluate(Side side, double u, double v) const;
  double coenergy_factor() const { return 1.0; }
  bool in_box(double u, double v) const;
};

using CapacitanceModel = std::variant<ParallelPlateModel, PolynomialModel>;

std::string_view model_name(const CapacitanceModel& model);

CapacitanceSample evaluate(const CapacitanceModel& model, Side side, double u, double v);
double coenergy_factor(const CapacitanceModel& model);

/// Capacitance of one electrode set, F.
double capacitance(const CapacitanceModel& model, Side side, double u, double v);

/// Electrostatic forces on one electrode set at voltage V.
ForcePair forces(const CapacitanceModel& model, Side side, double u, double v, double voltage);

/// Built-in coefficient set of the three-finger boundary-element fit, scaled
/// to the given electrode count. Known presets: "paper-eq22".
PolynomialModel polynomial_preset(std::string_view name, int electrode_count = 156);

/// Effective F per table unit of the built-in preset.
inline constexpr double kPresetFaradsPerUnit = 1.5566e-14;

/// Reads the CSV coefficient table. Throws MalformedTable.
PolynomialModel load_polynomial(std::istream& in);
PolynomialModel load_polynomial_file(const std::string& path);
void write_polynomial(std::ostream& out, const PolynomialModel& model);

}  // namespace vba
