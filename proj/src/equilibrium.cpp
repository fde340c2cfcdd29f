#include "vba/equilibrium.hpp"

#include <cmath>
#include <limits>

#include "vba/error.hpp"
#include "vba/thermal.hpp"

namespace vba {

namespace {

constexpr int kMaxNewton = 100;
constexpr int kRampSteps = 10;
constexpr int kMaxHalvings = 30;

// The device at the loading temperature; `storage` keeps the scaled copy alive.
const DerivedModel& at_load_temperature(const DerivedModel& model, const Loading& load,
                                        std::optional<DerivedModel>& storage) {
  if (load.theta == 0.0) return model;
  storage = at_temperature(model, load.theta);
  return *storage;
}

struct Sides {
  CapacitanceSample one;
  CapacitanceSample two;
};

Sides sample(const CapacitanceModel& cap, const Displacements& x) {
  return {evaluate(cap, Side::One, x.u, x.v1), evaluate(cap, Side::Two, x.u, x.v2)};
}

Vec3 residual_impl(const DerivedModel& m, const CapacitanceModel& cap, const Displacements& x, const Loading& load) {
  Vec3 r(m.k_mass * x.u - m.mass * load.accel, m.k_eff * x.v1, m.k_eff * x.v2);
  if (load.voltage == 0.0) return r;
  const double q = coenergy_factor(cap) * load.voltage * load.voltage / 2.0;
  const auto c = sample(cap, x);
  r(0) -= q * (c.one.c_u + c.two.c_u);
  r(1) -= q * c.one.c_v;
  r(2) -= q * c.two.c_v;
  return r;
}

Mat3 hessian_impl(const DerivedModel& m, const CapacitanceModel& cap, const Displacements& x, const Loading& load) {
  Mat3 h = Mat3::Zero();
  h(0, 0) = m.k_mass;
  h(1, 1) = m.k_eff;
  h(2, 2) = m.k_eff;
  if (load.voltage == 0.0) return h;
  const double q = coenergy_factor(cap) * load.voltage * load.voltage / 2.0;
  const auto c = sample(cap, x);
  h(0, 0) -= q * (c.one.c_uu + c.two.c_uu);
  h(0, 1) = h(1, 0) = -q * c.one.c_uv;
  h(0, 2) = h(2, 0) = -q * c.two.c_uv;
  h(1, 1) -= q * c.one.c_vv;
  h(2, 2) -= q * c.two.c_vv;
  return h;
}

// Damped Newton in coordinates scaled by (d0e, g0, g0) with residual rows
// scaled by (k_m d0e, k_eff g0, k_eff g0).
Displacements newton(const DerivedModel& m, const CapacitanceModel& cap, Displacements x, const Loading& load) {
  const double d0e = m.params.overlap;
  const double g0 = m.params.gap;
  const Vec3 xs(d0e, g0, g0);
  const Vec3 rs(m.k_mass * d0e, m.k_eff * g0, m.k_eff * g0);
  const double tol = residual_tolerance(m);

  auto scaled_norm = [&](const Vec3& r) { return r.cwiseQuotient(rs).norm(); };
  auto shifted = [&](const Displacements& base, const Vec3& dz, double lambda) {
    return Displacements{base.u + lambda * dz(0) * xs(0), base.v1 + lambda * dz(1) * xs(1),
                         base.v2 + lambda * dz(2) * xs(2)};
  };

  Vec3 r;
  try {
    r = residual_impl(m, cap, x, load);
  } catch (const Error& e) {
    if (is_domain_error(e.code())) throw Error(ErrorCode::LeftValidityDomain, "initial guess outside the model domain");
    throw;
  }

  int polish = 0;
  for (int it = 0; it < kMaxNewton; ++it) {
    const bool converged = r.norm() < tol;
    if (converged && polish >= 2) return x;

    const Mat3 h = hessian_impl(m, cap, x, load);
    const Mat3 js = rs.cwiseInverse().asDiagonal() * h * xs.asDiagonal();
    const Vec3 dz = js.fullPivLu().solve(-r.cwiseQuotient(rs));
    if (!dz.allFinite()) {
      if (converged) return x;
      throw Error(ErrorCode::NoConvergence, "singular Jacobian");
    }

    const double n0 = scaled_norm(r);
    bool accepted = false;
    bool domain_hit = false;
    double lambda = 1.0;
    for (int k = 0; k < kMaxHalvings; ++k, lambda *= 0.5) {
      const Displacements trial = shifted(x, dz, lambda);
      Vec3 rt;
      try {
        rt = residual_impl(m, cap, trial, load);
      } catch (const Error& e) {
        if (!is_domain_error(e.code())) throw;
        domain_hit = true;
        continue;
      }
      if (scaled_norm(rt) < n0) {
        x = trial;
        r = rt;
        accepted = true;
        break;
      }
      if (converged) break;  // polishing only accepts full, improving steps
    }
    if (converged) {
      if (!accepted) return x;
      ++polish;
      continue;
    }
    if (!accepted) {
      if (domain_hit) throw Error(ErrorCode::LeftValidityDomain, "Newton steps leave the model domain");
      throw Error(ErrorCode::NoConvergence, "line search failed");
    }
  }
  if (r.norm() < tol) return x;
  throw Error(ErrorCode::NoConvergence, "no convergence within 100 iterations");
}

}  // namespace

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Critical: return "critical";
  }
  return "?";
}

Vec3 residual(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x, const Loading& load) {
  std::optional<DerivedModel> storage;
  return residual_impl(at_load_temperature(model, load, storage), cap, x, load);
}

Mat3 hessian(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x, const Loading& load) {
  std::optional<DerivedModel> storage;
  return hessian_impl(at_load_temperature(model, load, storage), cap, x, load);
}

double critical_band(const DerivedModel& model) { return 1e-8 * model.k_mass; }

Stability classify(const DerivedModel& model, double min_eigenvalue) {
  const double band = critical_band(model);
  if (std::abs(min_eigenvalue) < band) return Stability::Critical;
  return min_eigenvalue > 0 ? Stability::Stable : Stability::Unstable;
}

double residual_tolerance(const DerivedModel& model) { return 1e-12 * model.k_mass * model.params.overlap; }

EquilibriumState make_state(const DerivedModel& model, const CapacitanceModel& cap, const Displacements& x,
                            const Loading& load) {
  std::optional<DerivedModel> storage;
  const DerivedModel& m = at_load_temperature(model, load, storage);

  EquilibriumState s;
  s.x = x;
  s.u_hat = x.u / m.params.overlap;
  s.v1_hat = x.v1 / m.params.gap;
  s.v2_hat = x.v2 / m.params.gap;
  s.residual_norm = residual_impl(m, cap, x, load).norm();

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(hessian_impl(m, cap, x, load), Eigen::EigenvaluesOnly);
  s.min_eigenvalue = eig.eigenvalues()(0);
  s.stability = classify(m, s.min_eigenvalue);

  s.n1 = m.k_beam * x.v1 / m.geometric_amp;
  s.n2 = m.k_beam * x.v2 / m.geometric_amp;
  s.f1 = beam_frequency(m, s.n1);
  s.f2 = beam_frequency(m, s.n2);
  return s;
}

EquilibriumState solve(const DerivedModel& model, const CapacitanceModel& cap, const Loading& load,
                       std::optional<Displacements> guess) {
  if (load.voltage < 0.0) throw Error(ErrorCode::InvalidParams, "voltage must be non-negative");
  std::optional<DerivedModel> storage;
  const DerivedModel& m = at_load_temperature(model, load, storage);

  Displacements x;
  if (guess) {
    x = newton(m, cap, *guess, load);
  } else {
    x = {m.mass * load.accel / m.k_mass, 0.0, 0.0};
    for (int k = 1; k <= kRampSteps; ++k) {
      Loading step = load;
      step.voltage = load.voltage * k / kRampSteps;
      x = newton(m, cap, x, step);
    }
  }
  return make_state(model, cap, x, load);
}

double parametric_beta(double u_hat, double v1_hat, double v2_hat, double a_tilde, double eta_s) {
  if (v1_hat == v2_hat) throw Error(ErrorCode::SymmetricDegenerate, "v1 == v2 leaves beta undetermined");
  return (u_hat - a_tilde) * (1.0 - v1_hat) * (1.0 - v2_hat) / (eta_s * (v1_hat - v2_hat));
}

FrameOffsets linearized_frames(double eta_s, double v_star, double a_tilde) {
  const double v = v_star;
  const double base = 1.0 + eta_s * v * v * v - eta_s * v * v;
  const double a11 = (base - (2.0 * a_tilde + 3.0) * v) / (1.0 - v);
  const double a22 = (base + (2.0 * a_tilde - 3.0) * v) / (1.0 - v);
  const double a12 = -eta_s * v * v;
  const double det = a11 * a22 - a12 * a12;
  // The a~ = 0 determinant vanishes on 1 - 3v - 2 eta v^2 + 2 eta v^3 = 0.
  const double crit = 1.0 - 3.0 * v - 2.0 * eta_s * v * v + 2.0 * eta_s * v * v * v;
  if (!(v >= 0.0 && v < 1.0) || !(crit > 0.0) || !(det > 0.0)) {
    throw Error(ErrorCode::SingularSystem, "linearized frame system is singular at or beyond the critical state");
  }
  const double rhs = a_tilde * v;
  return {(a22 * rhs - a12 * rhs) / det, (a11 * rhs - a12 * rhs) / det};
}

double symmetric_root(double beta) {
  constexpr double beta_pi = 4.0 / 27.0;
  if (beta < 0.0 || beta > beta_pi) throw Error(ErrorCode::BeyondCritical, "no stable symmetric state");
  double lo = 0.0, hi = 1.0 / 3.0;
  for (int i = 0; i < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon(); ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * (1 - mid) * (1 - mid) < beta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace vba
