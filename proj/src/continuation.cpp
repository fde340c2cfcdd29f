// Pseudo-arclength continuation of the equilibrium curve with fold and
// pitchfork detection.

#include <algorithm>
#include <cmath>

#include "vba/equilibrium.hpp"
#include "vba/error.hpp"

namespace vba {

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

constexpr int kMaxCorrector = 12;
constexpr double kMinTangentCosine = 0.9;
constexpr double kSwitchPerturbation = 1e-6;

enum class Outcome { Ok, Diverged, Domain };

// The equilibrium equations as G(y) = 0 with y = (u^, v^1, v^2, p), where p is
// beta or a~ and every row is dimensionless.
class Problem {
 public:
  Problem(const DerivedModel& m, const CapacitanceModel& cap, SweepParam sweep, double fixed)
      : m_(m), cap_(cap), sweep_(sweep), fixed_(fixed) {
    xs_ = Vec3(m.params.overlap, m.params.gap, m.params.gap);
    rs_ = Vec3(m.k_mass * m.params.overlap, m.k_eff * m.params.gap, m.k_eff * m.params.gap);
    beta_per_v2_ = beta_per_volt2(m);
    at_per_g_ = accel_tilde_per_g(m);
    tol_ = residual_tolerance(m);
  }

  // External parameter (beta or a^) <-> internal (beta or a~).
  double to_internal(double p) const { return sweep_ == SweepParam::Beta ? p : p * at_per_g_; }
  double to_external(double p) const { return sweep_ == SweepParam::Beta ? p : p / at_per_g_; }

  Loading loading(double p) const {
    if (sweep_ == SweepParam::Beta) return {fixed_, std::sqrt(std::max(p, 0.0) / beta_per_v2_), 0.0};
    return {p / at_per_g_ * m_.params.materials.gravity, fixed_, 0.0};
  }

  Displacements disp(const Vec4& y) const { return {y(0) * xs_(0), y(1) * xs_(1), y(2) * xs_(2)}; }

  Vec4 scaled(const EquilibriumState& s, double p_internal) const {
    return Vec4(s.x.u / xs_(0), s.x.v1 / xs_(1), s.x.v2 / xs_(2), p_internal);
  }

  Vec3 raw_residual(const Vec4& y) const { return residual(m_, cap_, disp(y), loading(y(3))); }
  Vec3 g(const Vec4& y) const { return raw_residual(y).cwiseQuotient(rs_); }

  Mat3 gx(const Vec4& y) const {
    return rs_.cwiseInverse().asDiagonal() * hessian(m_, cap_, disp(y), loading(y(3))) * xs_.asDiagonal();
  }

  Mat34 jacobian(const Vec4& y) const {
    Mat34 j;
    j.leftCols<3>() = gx(y);
    Vec3 gp;
    if (sweep_ == SweepParam::Beta) {
      const Displacements x = disp(y);
      const auto c1 = evaluate(cap_, Side::One, x.u, x.v1);
      const auto c2 = evaluate(cap_, Side::Two, x.u, x.v2);
      const double f = coenergy_factor(cap_) / 2.0 / beta_per_v2_;
      gp = Vec3(-f * (c1.c_u + c2.c_u), -f * c1.c_v, -f * c2.c_v);
    } else {
      gp = Vec3(-m_.k_mass * m_.params.overlap, 0.0, 0.0);
    }
    j.col(3) = gp.cwiseQuotient(rs_);
    return j;
  }

  // Unit tangent oriented along `prev`.
  Vec4 tangent(const Vec4& y, const Vec4& prev) const {
    Mat4 a;
    a.topRows<3>() = jacobian(y);
    a.row(3) = prev.transpose();
    Vec4 t = a.fullPivLu().solve(Vec4(0, 0, 0, 1));
    if (!t.allFinite() || t.norm() == 0.0) throw Error(ErrorCode::SingularSystem, "tangent undefined");
    return t.normalized();
  }

  // Newton on G(y) = 0, n . (y - anchor) = 0.
  Outcome correct(Vec4& y, const Vec4& anchor, const Vec4& n, int* iterations = nullptr) const {
    try {
      for (int it = 0; it < kMaxCorrector; ++it) {
        const Vec3 r = raw_residual(y);
        const double c = n.dot(y - anchor);
        Mat4 a;
        a.topRows<3>() = jacobian(y);
        a.row(3) = n.transpose();
        Vec4 rhs;
        rhs.head<3>() = -r.cwiseQuotient(rs_);
        rhs(3) = -c;
        const Vec4 dy = a.fullPivLu().solve(rhs);
        if (!dy.allFinite()) return Outcome::Diverged;
        y += dy;
        if (iterations) *iterations = it + 1;
        if (dy.norm() < 1e-13 && raw_residual(y).norm() < tol_) {
          // one more step to settle at round-off
          const Vec3 r2 = raw_residual(y);
          a.topRows<3>() = jacobian(y);
          rhs.head<3>() = -r2.cwiseQuotient(rs_);
          rhs(3) = -n.dot(y - anchor);
          const Vec4 d2 = a.fullPivLu().solve(rhs);
          if (d2.allFinite()) {
            const Vec4 y2 = y + d2;
            if (raw_residual(y2).norm() <= r2.norm()) y = y2;
          }
          return Outcome::Ok;
        }
        if (dy.norm() > 0.5) return Outcome::Diverged;
      }
      return raw_residual(y).norm() < tol_ ? Outcome::Ok : Outcome::Diverged;
    } catch (const Error& e) {
      if (is_domain_error(e.code())) return Outcome::Domain;
      throw;
    }
  }

  // Whether the domain edge lies within a short scaled distance ahead.
  bool near_edge(const Vec4& y, const Vec4& t) const {
    for (double s : {1e-6, 1e-4, 1e-2}) {
      try {
        const Displacements x = disp(y + s * t);
        evaluate(cap_, Side::One, x.u, x.v1);
        evaluate(cap_, Side::Two, x.u, x.v2);
      } catch (const Error& e) {
        if (is_domain_error(e.code())) return true;
        throw;
      }
    }
    return false;
  }

  EquilibriumState state(const Vec4& y) const { return make_state(m_, cap_, disp(y), loading(y(3))); }

  BranchPoint point(const Vec4& y) const { return {to_external(y(3)), state(y)}; }

  Mat3 physical_hessian(const Vec4& y) const { return hessian(m_, cap_, disp(y), loading(y(3))); }

  // Null direction of the Hessian in scaled coordinates, unit length.
  Vec3 null_direction(const Vec4& y) const {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(physical_hessian(y));
    return eig.eigenvectors().col(0).cwiseQuotient(xs_).normalized();
  }

  const DerivedModel& model() const { return m_; }
  SweepParam sweep() const { return sweep_; }
  double fixed() const { return fixed_; }

 private:
  const DerivedModel& m_;
  const CapacitanceModel& cap_;
  SweepParam sweep_;
  double fixed_;
  Vec3 xs_, rs_;
  double beta_per_v2_, at_per_g_, tol_;
};

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Bisection on the arclength between y (tangent t) and a step of length ds for
// the zero of a test function; returns the located point and the bracketing
// interval in the parameter.
template <class TestFn>
std::pair<Vec4, double> refine(const Problem& pb, const Vec4& y, const Vec4& t, double ds, double tol_rel,
                               TestFn test) {
  const double f0 = test(y);
  double lo = 0.0, hi = ds;
  Vec4 ylo = y, yhi = y + ds * t;
  pb.correct(yhi, y + ds * t, t);
  Vec4 ymid = yhi;
  while (hi - lo > tol_rel * ds) {
    const double mid = 0.5 * (lo + hi);
    ymid = y + mid * t;
    if (pb.correct(ymid, y + mid * t, t) != Outcome::Ok) break;
    if (sign(test(ymid)) == sign(f0)) {
      lo = mid;
      ylo = ymid;
    } else {
      hi = mid;
      yhi = ymid;
    }
  }
  Vec4 ym = y + 0.5 * (lo + hi) * t;
  if (pb.correct(ym, y + 0.5 * (lo + hi) * t, t) != Outcome::Ok) ym = ylo;
  return {ym, std::abs(yhi(3) - ylo(3))};
}

struct TraceRun {
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
};

// Core loop: y0 is a converged point, t0 its oriented unit tangent.
TraceRun run(const Problem& pb, Vec4 y, Vec4 t, double pmin, double pmax, const TraceOptions& opts,
             bool skip_first_events) {
  TraceRun out;
  out.points.push_back(pb.point(y));

  const double range = std::max(pmax - pmin, 1e-300);
  const double floor = opts.min_step_rel * range;
  double ds = opts.initial_step;
  double det_prev = pb.gx(y).determinant();
  bool first = skip_first_events;
  bool domain_seen = false;  // since the last accepted step

  while (static_cast<int>(out.points.size()) < opts.max_points) {
    Vec4 ynew = y + ds * t;
    int iters = 0;
    const Outcome oc = pb.correct(ynew, y + ds * t, t, &iters);
    Vec4 tnew;
    bool ok = oc == Outcome::Ok;
    if (ok) {
      try {
        tnew = pb.tangent(ynew, t);
        ok = tnew.dot(t) > kMinTangentCosine;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (!ok) {
      domain_seen = domain_seen || oc == Outcome::Domain;
      ds *= 0.5;
      if (ds < floor) {
        if (domain_seen || pb.near_edge(y, t)) {
          BranchEvent ev{EventKind::ValidityExit, pb.to_external(y(3)), 0.0, pb.state(y)};
          out.events.push_back(ev);
          return out;
        }
        throw Error(ErrorCode::StepCollapse, "continuation step fell below the floor");
      }
      continue;
    }

    if (ynew(3) < pmin || ynew(3) > pmax) return out;

    const double det_new = pb.gx(ynew).determinant();
    if (!first) {
      if (sign(t(3)) != sign(tnew(3)) && sign(t(3)) != 0) {
        auto [ye, width] = refine(pb, y, t, ds, opts.event_tol, [&](const Vec4& yy) { return pb.tangent(yy, t)(3); });
        out.events.push_back({EventKind::Fold, pb.to_external(ye(3)), std::abs(pb.to_external(width)), pb.state(ye)});
      } else if (sign(det_prev) != sign(det_new)) {
        auto [ye, width] = refine(pb, y, t, ds, opts.event_tol, [&](const Vec4& yy) { return pb.gx(yy).determinant(); });
        BranchEvent ev{EventKind::Pitchfork, pb.to_external(ye(3)), std::abs(pb.to_external(width)), pb.state(ye)};
        ev.null_vector = pb.null_direction(ye);
        out.events.push_back(ev);
      }
    }
    first = false;
    domain_seen = false;

    out.points.push_back(pb.point(ynew));
    const bool folded = !out.events.empty() && out.events.back().kind == EventKind::Fold;
    y = ynew;
    t = tnew;
    det_prev = det_new;
    if (folded && opts.stop_at_fold) return out;
    if (iters <= 3) ds = std::min(ds * 1.3, opts.max_step);
  }
  return out;
}

BranchTrace assemble(const Problem& pb, BranchLabel label, TraceRun run) {
  BranchTrace tr;
  tr.sweep = pb.sweep();
  tr.fixed = pb.fixed();
  tr.label = label;
  tr.points = std::move(run.points);
  tr.events = std::move(run.events);
  return tr;
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Fold: return "fold";
    case EventKind::Pitchfork: return "pitchfork";
    case EventKind::ValidityExit: return "validity_exit";
  }
  return "?";
}

std::string_view to_string(BranchLabel l) {
  switch (l) {
    case BranchLabel::Symmetric: return "symmetric";
    case BranchLabel::AsymmetricPlus: return "asymmetric_plus";
    case BranchLabel::AsymmetricMinus: return "asymmetric_minus";
    case BranchLabel::PerturbedUpper: return "perturbed_upper";
    case BranchLabel::PerturbedLower: return "perturbed_lower";
  }
  return "?";
}

double sweep_value(const DerivedModel& model, SweepParam sweep, const Loading& load) {
  if (sweep == SweepParam::Beta) return beta_per_volt2(model) * load.voltage * load.voltage;
  return load.accel / model.params.materials.gravity;
}

Loading sweep_loading(const DerivedModel& model, SweepParam sweep, double fixed, double param) {
  if (sweep == SweepParam::Beta) return {fixed, std::sqrt(std::max(param, 0.0) / beta_per_volt2(model)), 0.0};
  return {param * model.params.materials.gravity, fixed, 0.0};
}

BranchTrace trace_branch(const DerivedModel& model, const CapacitanceModel& cap, SweepParam sweep, double fixed,
                         double pmin, double pmax, const EquilibriumState& start, BranchLabel label,
                         const TraceOptions& opts) {
  if (!(pmin < pmax)) throw Error(ErrorCode::InvalidParams, "empty sweep range");
  const Problem pb(model, cap, sweep, fixed);
  // The state carries no loading. Recover the parameter from the frame
  // balance (V^2 in least squares over both frames) or the mass balance.
  double pstart;
  {
    const Displacements x = start.x;
    if (sweep == SweepParam::Beta) {
      const auto c1 = evaluate(cap, Side::One, x.u, x.v1);
      const auto c2 = evaluate(cap, Side::Two, x.u, x.v2);
      const double f = coenergy_factor(cap) / 2.0;
      const double denom = c1.c_v * c1.c_v + c2.c_v * c2.c_v;
      const double v2 = denom > 0 ? model.k_eff * (x.v1 * c1.c_v + x.v2 * c2.c_v) / (f * denom) : 0.0;
      pstart = beta_per_volt2(model) * std::max(v2, 0.0);
    } else {
      const double q = coenergy_factor(cap) * fixed * fixed / 2.0;
      double fy = 0.0;
      if (fixed != 0.0) {
        fy = q * (evaluate(cap, Side::One, x.u, x.v1).c_u + evaluate(cap, Side::Two, x.u, x.v2).c_u);
      }
      const double a = (model.k_mass * x.u - fy) / model.mass;
      pstart = pb.to_internal(a / model.params.materials.gravity);
    }
  }
  Vec4 y = pb.scaled(start, pstart);
  if (pb.correct(y, y, Vec4(0, 0, 0, 1)) != Outcome::Ok) {
    throw Error(ErrorCode::NoConvergence, "start state is not on the branch");
  }
  const Vec4 t = pb.tangent(y, Vec4(0, 0, 0, opts.direction >= 0 ? 1.0 : -1.0));
  return assemble(pb, label, run(pb, y, t, pb.to_internal(pmin), pb.to_internal(pmax), opts, false));
}

std::pair<BranchTrace, BranchTrace> switch_branches(const DerivedModel& model, const CapacitanceModel& cap,
                                                    const BranchTrace& parent, const BranchEvent& pitchfork,
                                                    double pmin, double pmax, const TraceOptions& opts) {
  if (pitchfork.kind != EventKind::Pitchfork) throw Error(ErrorCode::InvalidParams, "event is not a pitchfork");
  const Problem pb(model, cap, parent.sweep, parent.fixed);
  const Vec4 ystar = pb.scaled(pitchfork.state, pb.to_internal(pitchfork.param));
  Vec4 phi = Vec4::Zero();
  phi.head<3>() = pitchfork.null_vector.normalized();

  auto one = [&](double dir) {
    const Vec4 anchor = ystar + dir * kSwitchPerturbation * phi;
    Vec4 y = anchor;
    if (pb.correct(y, anchor, phi) != Outcome::Ok) {
      throw Error(ErrorCode::NoConvergence, "branch switching failed to converge");
    }
    const Vec4 t = pb.tangent(y, dir * phi);
    const double uhat_dir = t(0) != 0.0 ? t(0) : y(0);
    const BranchLabel label = uhat_dir > 0 ? BranchLabel::AsymmetricPlus : BranchLabel::AsymmetricMinus;
    return assemble(pb, label, run(pb, y, t, pb.to_internal(pmin), pb.to_internal(pmax), opts, true));
  };
  BranchTrace a = one(+1.0);
  BranchTrace b = one(-1.0);
  if (a.label == BranchLabel::AsymmetricMinus) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::vector<BranchTrace> bifurcation_diagram(const DerivedModel& model, const CapacitanceModel& cap, double accel,
                                             double beta_max, const TraceOptions& opts) {
  std::vector<BranchTrace> out;
  const EquilibriumState origin = solve(model, cap, Loading{accel, 0.0, 0.0});
  if (accel == 0.0) {
    BranchTrace sym = trace_branch(model, cap, SweepParam::Beta, 0.0, 0.0, beta_max, origin, BranchLabel::Symmetric, opts);
    const auto it = std::find_if(sym.events.begin(), sym.events.end(),
                                 [](const BranchEvent& e) { return e.kind == EventKind::Pitchfork; });
    if (it != sym.events.end()) {
      auto [plus, minus] = switch_branches(model, cap, sym, *it, 0.0, beta_max, opts);
      out.push_back(std::move(sym));
      out.push_back(std::move(plus));
      out.push_back(std::move(minus));
    } else {
      out.push_back(std::move(sym));
    }
    return out;
  }

  out.push_back(trace_branch(model, cap, SweepParam::Beta, accel, 0.0, beta_max, origin, BranchLabel::PerturbedLower, opts));

  // The separated branch passes near the unstable part of the symmetric
  // branch; seed it there and carry the seed to the target acceleration.
  const double bpv = beta_per_volt2(model);
  for (double vs : {0.31, 0.3333, 0.36, 0.4, 0.5}) {
    const double beta = vs * (1 - vs) * (1 - vs);
    if (beta > beta_max) continue;
    const double voltage = std::sqrt(beta / bpv);
    // Natural-parameter homotopy in the acceleration.
    Displacements x{0.0, vs * model.params.gap, vs * model.params.gap};
    constexpr int kSteps = 200;
    bool ok = true;
    try {
      EquilibriumState s = solve(model, cap, Loading{0.0, voltage, 0.0}, x);
      for (int k = 1; k <= kSteps; ++k) {
        s = solve(model, cap, Loading{accel * k / kSteps, voltage, 0.0}, s.x);
      }
      x = s.x;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) continue;
    const EquilibriumState seed = solve(model, cap, Loading{accel, voltage, 0.0}, x);
    // Reject a seed that fell back onto the lower branch.
    const auto& lower = out.front().points;
    const bool on_lower = std::any_of(lower.begin(), lower.end(), [&](const BranchPoint& p) {
      return std::abs(p.param - beta) < 1e-6 && std::abs(p.state.v1_hat - seed.v1_hat) < 1e-4 &&
             std::abs(p.state.u_hat - seed.u_hat) < 1e-4;
    });
    if (on_lower) continue;

    TraceOptions fwd = opts, back = opts;
    fwd.direction = +1;
    back.direction = -1;
    BranchTrace up = trace_branch(model, cap, SweepParam::Beta, accel, 0.0, beta_max, seed, BranchLabel::PerturbedUpper, fwd);
    BranchTrace down = trace_branch(model, cap, SweepParam::Beta, accel, 0.0, beta_max, seed, BranchLabel::PerturbedUpper, back);
    BranchTrace joined = up;
    joined.points.assign(down.points.rbegin(), down.points.rend());
    if (!joined.points.empty()) joined.points.pop_back();  // seed appears in both
    joined.points.insert(joined.points.end(), up.points.begin(), up.points.end());
    joined.events = down.events;
    joined.events.insert(joined.events.end(), up.events.begin(), up.events.end());
    out.push_back(std::move(joined));
    break;
  }
  return out;
}

}  // namespace vba
