#include "vba/merit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vba/error.hpp"

namespace vba {

namespace {

constexpr double kSfStep = 1e-3;     // g
constexpr int kSfHalvings = 4;
constexpr double kSfAgreement = 1e-4;
constexpr int kRangeSamples = 400;
constexpr int kGoldenIterations = 200;

double shift(const EquilibriumState& s) { return s.f1 - s.f2; }

// Frame displacement at fixed proof-mass position: k_eff v = q c_v(u, v).
// Newton from `guess`; nullopt if no stable root is reached.
std::optional<double> frame_root(const DerivedModel& m, const CapacitanceModel& cap, Side side, double q, double u,
                                 double guess) {
  const double g0 = m.params.gap;
  double v = guess;
  try {
    for (int it = 0; it < 60; ++it) {
      const auto c = evaluate(cap, side, u, v);
      const double r = m.k_eff * v - q * c.c_v;
      const double d = m.k_eff - q * c.c_vv;
      if (!(d > 0.0)) return std::nullopt;
      const double dv = -r / d;
      v += dv;
      if (std::abs(dv) < 1e-15 * g0) {
        const auto c2 = evaluate(cap, side, u, v);
        if (!(m.k_eff - q * c2.c_vv > 0.0)) return std::nullopt;
        return v;
      }
      if (std::abs(dv) > 0.25 * g0) return std::nullopt;
    }
  } catch (const Error& e) {
    if (is_domain_error(e.code())) return std::nullopt;
    throw;
  }
  return std::nullopt;
}

struct RangePoint {
  double u;
  double v1, v2;
  double a_hat;
};

}  // namespace

double frequency_shift(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load) {
  return shift(solve(model, cap, load));
}

double sf0(const DerivedModel& model, const CapacitanceModel& cap, double voltage, double theta) {
  if (voltage == 0.0) return 0.0;
  const EquilibriumState base = solve(model, cap, Loading{0.0, voltage, theta});
  if (base.stability != Stability::Stable) throw Error(ErrorCode::NearCritical, "no stable state at zero acceleration");

  auto central = [&](double h) {
    const auto plus = solve(model, cap, Loading::in_g(model, h, voltage, theta), base.x);
    const auto minus = solve(model, cap, Loading::in_g(model, -h, voltage, theta), base.x);
    return (shift(plus) - shift(minus)) / (2.0 * h);
  };

  double h = kSfStep;
  double coarse = central(h);
  for (int k = 0; k < kSfHalvings; ++k) {
    h *= 0.5;
    const double fine = central(h);
    if (std::abs(fine - coarse) <= kSfAgreement * std::abs(fine)) return fine;
    coarse = fine;
  }
  throw Error(ErrorCode::NearCritical, "scale factor does not settle under step refinement");
}

std::vector<SfSample> nl_sf(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                            const std::vector<double>& a_grid, double sf0_value) {
  std::vector<SfSample> out;
  out.reserve(a_grid.size());
  for (double a : a_grid) {
    if (a == 0.0) {
      out.push_back({0.0, 0.0, sf0_value, 0.0});
      continue;
    }
    const double df = frequency_shift(model, cap, Loading::in_g(model, a, voltage));
    const double sf = df / a;
    out.push_back({a, df, sf, sf0_value != 0.0 ? sf / sf0_value - 1.0 : 0.0});
  }
  return out;
}

std::vector<SfSample> nl_sf(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                            const std::vector<double>& a_grid) {
  return nl_sf(model, cap, voltage, a_grid, sf0(model, cap, voltage));
}

std::string_view to_string(RangeCause c) {
  return c == RangeCause::DeflectionLimit ? "DeflectionLimit" : "StabilityLimit";
}

WorkingRange working_range(const DerivedModel& model, const CapacitanceModel& cap, double voltage, double u_max) {
  if (!(u_max > 0.0)) throw Error(ErrorCode::InvalidParams, "u_max must be positive");
  const double q = coenergy_factor(cap) * voltage * voltage / 2.0;
  const double weight = model.mass * model.params.materials.gravity;

  // Along the branch parametrized by u each frame balances on its own and
  // the acceleration follows from the proof-mass balance.
  auto at = [&](double u, double g1, double g2) -> std::optional<RangePoint> {
    if (q == 0.0) return RangePoint{u, 0.0, 0.0, model.k_mass * u / weight};
    const auto v1 = frame_root(model, cap, Side::One, q, u, g1);
    const auto v2 = frame_root(model, cap, Side::Two, q, u, g2);
    if (!v1 || !v2) return std::nullopt;
    double fy;
    try {
      fy = q * (evaluate(cap, Side::One, u, *v1).c_u + evaluate(cap, Side::Two, u, *v2).c_u);
    } catch (const Error& e) {
      if (is_domain_error(e.code())) return std::nullopt;
      throw;
    }
    return RangePoint{u, *v1, *v2, (model.k_mass * u - fy) / weight};
  };

  EquilibriumState base;
  try {
    base = solve(model, cap, Loading{0.0, voltage, 0.0});
  } catch (const Error& e) {
    throw Error(ErrorCode::NoRange, std::string("no equilibrium at zero acceleration: ") + e.what());
  }
  if (base.stability != Stability::Stable) throw Error(ErrorCode::NoRange, "zero-acceleration state is not stable");

  std::vector<RangePoint> pts;
  pts.push_back(*at(0.0, base.x.v1, base.x.v2));
  for (int k = 1; k <= kRangeSamples; ++k) {
    const double u = u_max * k / kRangeSamples;
    const auto p = at(u, pts.back().v1, pts.back().v2);
    if (!p) break;
    pts.push_back(*p);
  }

  const auto best = std::max_element(pts.begin(), pts.end(),
                                     [](const RangePoint& a, const RangePoint& b) { return a.a_hat < b.a_hat; });
  const bool reached_end = pts.size() == static_cast<std::size_t>(kRangeSamples) + 1;
  if (reached_end && best == pts.end() - 1) {
    return {best->a_hat, RangeCause::DeflectionLimit, best->u};
  }
  if (best == pts.begin()) throw Error(ErrorCode::NoRange, "acceleration cannot increase from zero");

  // Golden-section refinement of the interior maximum of a^(u).
  const std::size_t i = static_cast<std::size_t>(best - pts.begin());
  RangePoint lo = pts[i - 1];
  RangePoint hi = i + 1 < pts.size() ? pts[i + 1] : pts[i];
  double a = lo.u, b = hi.u;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  RangePoint top = pts[i];
  auto eval = [&](double u) {
    auto p = at(u, top.v1, top.v2);
    return p ? *p : RangePoint{u, top.v1, top.v2, -1e300};
  };
  RangePoint c = eval(b - r * (b - a));
  RangePoint d = eval(a + r * (b - a));
  for (int it = 0; it < kGoldenIterations && b - a > 1e-15 * u_max; ++it) {
    if (c.a_hat >= d.a_hat) {
      b = d.u;
      d = c;
      c = eval(b - r * (b - a));
    } else {
      a = c.u;
      c = d;
      d = eval(a + r * (b - a));
    }
  }
  const RangePoint& peak = c.a_hat >= d.a_hat ? c : d;
  if (peak.a_hat > top.a_hat) top = peak;
  return {top.a_hat, RangeCause::StabilityLimit, top.u};
}

double em_amplification(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load) {
  if (load.accel == 0.0) throw Error(ErrorCode::ZeroAcceleration, "amplification undefined at zero acceleration");
  const EquilibriumState s = solve(model, cap, load);
  return std::abs(s.n2 - s.n1) / (model.mass * std::abs(load.accel));
}

double linearized_sf(double gap_ratio, double slenderness, double geometric_amp, double eta_s, double v_star) {
  const double v = v_star;
  const double d = 1.0 - 3.0 * v - 2.0 * eta_s * v * v + 2.0 * eta_s * v * v * v;
  if (!(v >= 0.0) || !(d > 0.0)) throw Error(ErrorCode::BeyondCritical, "at or beyond the critical symmetric state");
  const double pi = std::numbers::pi;
  const double r = slenderness;
  return gap_ratio * v * (1.0 - v) /
         (2.0 * pi * r * std::sqrt(geometric_amp) * d * std::sqrt(gap_ratio * v + 4.0 * pi * pi * r * r * geometric_amp));
}

double small_voltage_sf(double gap_ratio, double slenderness, double geometric_amp, double v_star) {
  const double pi = std::numbers::pi;
  return gap_ratio * v_star / (4.0 * pi * pi * slenderness * slenderness * geometric_amp);
}

double linearized_sf_hz_per_g(const DerivedModel& model, double voltage) {
  const double v = symmetric_root(beta_per_volt2(model) * voltage * voltage);
  return model.f0 * accel_tilde_per_g(model) *
         linearized_sf(model.gap_ratio, model.slenderness, model.geometric_amp, model.stiffness_ratio(), v);
}

MeritReport merit_report(const DerivedModel& model, const CapacitanceModel& cap, double voltage,
                         const std::vector<double>& a_grid, double u_max) {
  MeritReport r{};
  r.voltage = voltage;
  r.v_star = solve(model, cap, Loading{0.0, voltage, 0.0}).v1_hat;
  r.sf0 = sf0(model, cap, voltage);
  r.samples = nl_sf(model, cap, voltage, a_grid, r.sf0);
  const auto nz = std::find_if(a_grid.begin(), a_grid.end(), [](double a) { return a != 0.0; });
  r.em_amplification = nz == a_grid.end() ? 0.0 : em_amplification(model, cap, Loading::in_g(model, *nz, voltage));
  r.range = working_range(model, cap, voltage, u_max);
  return r;
}

}  // namespace vba
