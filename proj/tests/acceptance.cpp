// Acceptance criteria. Runs every criterion (or those named on the command
// line) and prints one PASS/FAIL line for each; exits non-zero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vba/equilibrium.hpp"
#include "vba/error.hpp"
#include "vba/merit.hpp"
#include "vba/thermal.hpp"

using namespace vba;

namespace {

// Collects sub-checks of one criterion.
class Verdict {
 public:
  void check(bool ok, const char* fmt, double value) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, value);
    if (!detail_.empty()) detail_ += "; ";
    detail_ += std::string(ok ? "" : "FAILED ") + buf;
    pass_ = pass_ && ok;
  }
  bool pass() const { return pass_; }
  const std::string& detail() const { return detail_; }

 private:
  bool pass_ = true;
  std::string detail_;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const BranchEvent* find_event(const BranchTrace& tr, EventKind kind) {
  const auto it = std::find_if(tr.events.begin(), tr.events.end(), [&](const BranchEvent& e) { return e.kind == kind; });
  return it == tr.events.end() ? nullptr : &*it;
}

struct Device {
  DerivedModel m = derive(table1_device());
  CapacitanceModel pp = ParallelPlateModel::from(m.params);
  CapacitanceModel poly = polynomial_preset("paper-eq22", m.params.electrode_count);
};

BranchTrace symmetric_branch(const Device& d, const CapacitanceModel& cap) {
  return trace_branch(d.m, cap, SweepParam::Beta, 0.0, 0.0, 0.2, solve(d.m, cap, Loading{}), BranchLabel::Symmetric);
}

void pull_in(Verdict& v) {
  const Device d;
  const Timer t;
  const auto tr = symmetric_branch(d, d.pp);
  const double secs = t.seconds();
  const auto* fold = find_event(tr, EventKind::Fold);
  v.check(fold != nullptr, "fold found (%g)", fold ? 1.0 : 0.0);
  if (!fold) return;
  v.check(std::abs(fold->param - 4.0 / 27.0) <= 1e-6, "|beta - 4/27| = %.2e", std::abs(fold->param - 4.0 / 27.0));
  v.check(std::abs(fold->state.v1_hat - 1.0 / 3.0) <= 1e-6, "|v - 1/3| = %.2e", std::abs(fold->state.v1_hat - 1.0 / 3.0));
  const double volts = std::sqrt(fold->param / beta_per_volt2(d.m));
  v.check(std::abs(volts - 62.5) <= 0.5, "V_PI = %.3f V", volts);
  v.check(secs < 1.0, "runtime %.3f s", secs);
}

void pitchfork(Verdict& v) {
  const Device d;
  const double eta = d.m.stiffness_ratio();
  v.check(std::abs(eta - 1.3) <= 0.05, "eta_s = %.4f (expected 1.3 +/- 0.05)", eta);
  const Timer t;
  const auto tr = symmetric_branch(d, d.pp);
  const double secs = t.seconds();
  const auto* pf = find_event(tr, EventKind::Pitchfork);
  v.check(pf != nullptr, "pitchfork found (%g)", pf ? 1.0 : 0.0);
  if (!pf) return;
  v.check(std::abs(pf->param - 0.145) <= 0.003, "beta_b = %.5f", pf->param);
  const double volts = std::sqrt(pf->param / beta_per_volt2(d.m));
  v.check(std::abs(volts - 62.0) <= 1.0, "V_b = %.3f V", volts);
  v.check(secs < 5.0, "runtime %.3f s", secs);
}

void polynomial_critical_voltage(Verdict& v) {
  const Device d;
  const Timer t;
  const auto tr = symmetric_branch(d, d.poly);
  const double secs = t.seconds();
  const auto* pf = find_event(tr, EventKind::Pitchfork);
  v.check(pf != nullptr, "pitchfork on the trivial branch (%g)", pf ? 1.0 : 0.0);
  if (!pf) return;
  const double volts = std::sqrt(pf->param / beta_per_volt2(d.m));
  v.check(std::abs(volts - 57.0) <= 1.0, "V_cr = %.3f V", volts);
  bool stable_before = true, unstable_after = true;
  for (const auto& p : tr.points) {
    if (p.param < pf->param - 1e-4 && p.state.v1_hat < pf->state.v1_hat) stable_before &= p.state.stability == Stability::Stable;
    if (p.state.v1_hat > pf->state.v1_hat + 1e-3) unstable_after &= p.state.stability == Stability::Unstable;
  }
  v.check(stable_before && unstable_after, "stability lost at the event (%g)", stable_before && unstable_after ? 1.0 : 0.0);
  v.check(secs < 10.0, "runtime %.3f s", secs);
}

void working_range_crossover(Verdict& v) {
  const Device d;
  auto cause = [&](double volts) { return working_range(d.m, d.poly, volts).cause; };
  double lo = 30.0, hi = 56.5;
  v.check(cause(lo) == RangeCause::DeflectionLimit && cause(hi) == RangeCause::StabilityLimit,
          "causes bracket the switch (%g)", 1.0);
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (cause(mid) == RangeCause::DeflectionLimit ? lo : hi) = mid;
  }
  const double cross = 0.5 * (lo + hi);
  v.check(std::abs(cross - 51.0) <= 1.5, "crossover at %.3f V", cross);

  // a_max(V) on a grid: one switch, non-increasing within each regime.
  int switches = 0;
  bool monotone = true;
  WorkingRange prev = working_range(d.m, d.poly, 0.0);
  for (double volts = 1.0; volts <= 56.5; volts += 0.5) {
    const WorkingRange w = working_range(d.m, d.poly, volts);
    if (w.cause != prev.cause) ++switches;
    else if (w.a_max > prev.a_max * (1 + 1e-12)) monotone = false;
    prev = w;
  }
  v.check(switches == 1, "regime switches on the grid: %g", switches);
  v.check(monotone, "a_max monotone within each regime (%g)", monotone ? 1.0 : 0.0);
}

void cross_model_scale_factor(Verdict& v) {
  DeviceParams p = table1_device();
  p.offset = 60e-6;
  const DerivedModel m = derive(p);
  const double sf = sf0(m, ParallelPlateModel::from(p), 14.0);
  v.check(std::abs(sf / 20.7 - 1) <= 0.05, "SF(14 V, h = 60 um) = %.3f Hz/g (expected 20.7 +/- 5%%)", sf);
  const double df = frequency_shift(m, ParallelPlateModel::from(p), Loading::in_g(m, 1.0, 14.0));
  v.check(std::abs(df / 20.7 - 1) <= 0.05, "delta_f(1 g) = %.3f Hz", df);
}

void thermal_frequency_law(Verdict& v) {
  const Device d;
  const ThermalLaw law = ThermalLaw::from(d.m.params.materials);
  v.check(std::abs(law.eta() * 1e6 - 38.2) <= 0.1, "eta_th = %.4f ppm/K", law.eta() * 1e6);
  double worst = 0;
  for (double t = kThetaMin; t <= kThetaMax; t += 0.5) {
    worst = std::max(worst, std::abs(f0_at(d.m, law, t) / f0_at(d.m, law, t, true) - 1));
  }
  v.check(worst < 1e-5, "max linearization error %.3e%%", worst * 100);
}

void tcsf_criterion(Verdict& v) {
  const Device d;
  const auto est = tcsf(d.m, d.pp, 10.0);
  v.check(est.numerical >= 100e-6 && est.numerical <= 140e-6, "TCSF(10 V) = %.2f ppm/K", est.numerical * 1e6);
  v.check(est.analytic >= 100e-6 && est.analytic <= 140e-6, "3 gamma/2 = %.2f ppm/K", est.analytic * 1e6);
  double th[9], sf[9];
  for (int i = 0; i < 9; ++i) {
    th[i] = -40.0 + 10.0 * i;
    sf[i] = sf0(d.m, d.pp, 20.0, th[i]);
  }
  const double worst = oracle::linear_fit_residual(th, sf, 9) / sf[4];
  v.check(worst <= 0.01, "SF(theta) linear over +/-40 K, max deviation %.2e", worst);
}

void scaling_invariance(Verdict& v) {
  const Device d;
  double worst = 0;
  for (const auto* cap : {&d.pp, &d.poly}) {
    for (double xi : {0.8, 0.95, 1.05}) {
      DeviceParams p = d.m.params;
      p.materials.youngs_modulus *= xi;
      const auto direct = solve(derive(p), *cap, Loading{3.0 * 9.8, 40.0, 0.0}).x;
      const auto scaled = scaled_displacements(d.m, *cap, 3.0 * 9.8, 40.0, xi);
      worst = std::max({worst, std::abs(scaled.u / direct.u - 1), std::abs(scaled.v1 / direct.v1 - 1),
                        std::abs(scaled.v2 / direct.v2 - 1)});
    }
  }
  v.check(worst <= 1e-9, "max relative displacement difference %.2e", worst);
}

void closed_form_oracles(Verdict& v) {
  const Device d;
  const DerivedModel& m = d.m;
  const double eta = m.stiffness_ratio();
  const double at_per_accel = m.mass / (m.k_mass * m.params.overlap);

  // Parametric beta on every non-symmetric continuation point.
  const double a_02 = 0.2 / at_per_accel;
  std::vector<BranchTrace> traces = bifurcation_diagram(m, d.pp, 0.0, 0.2);
  for (auto& tr : bifurcation_diagram(m, d.pp, a_02, 0.2)) traces.push_back(std::move(tr));
  double worst = 0;
  int count = 0;
  for (const auto& tr : traces) {
    const double at = tr.fixed * at_per_accel;
    for (const auto& p : tr.points) {
      if (std::abs(p.state.v1_hat - p.state.v2_hat) < 1e-6 || p.param <= 0.0) continue;
      const double b = parametric_beta(p.state.u_hat, p.state.v1_hat, p.state.v2_hat, at, eta);
      worst = std::max(worst, std::abs(b / p.param - 1));
      ++count;
    }
  }
  v.check(count > 100 && worst <= 1e-9, "parametric beta over %g points", count);
  v.check(worst <= 1e-9, "max relative error %.2e", worst);

  // Linearized frame offsets at a~ = 1e-4.
  const double bpv = beta_per_volt2(m);
  double lin = 0;
  for (double beta : {0.01, 0.05, 0.1, 0.13}) {
    const double vs = symmetric_root(beta);
    const auto s = solve(m, d.pp, Loading{1e-4 / at_per_accel, std::sqrt(beta / bpv), 0.0});
    const auto w = linearized_frames(eta, vs, 1e-4);
    lin = std::max({lin, std::abs((s.v1_hat - vs) / w.w1 - 1), std::abs((vs - s.v2_hat) / w.w2 - 1)});
  }
  v.check(lin <= 1e-3, "linearized offsets within %.2e", lin);

  // Closed-form SF against the numerical tangent SF.
  const double to_hz = m.f0 * accel_tilde_per_g(m);
  double cf = 0;
  for (double beta : {0.005, 0.01, 0.02, 0.035, 0.05}) {
    const double volts = std::sqrt(beta / bpv);
    const double closed = to_hz * linearized_sf(m.gap_ratio, m.slenderness, m.geometric_amp, eta, symmetric_root(beta));
    cf = std::max(cf, std::abs(sf0(m, d.pp, volts) / closed - 1));
  }
  v.check(cf <= 0.02, "closed-form SF within %.2e for beta <= 0.05", cf);

  // Small-voltage slope.
  const double pi = std::numbers::pi;
  const double slope = to_hz * m.gap_ratio / (4 * pi * pi * m.slenderness * m.slenderness * m.geometric_amp);
  const double beta = 1e-3;
  const double numeric = sf0(m, d.pp, std::sqrt(beta / bpv)) / beta;
  v.check(std::abs(numeric / slope - 1) <= 0.02, "small-voltage slope within %.2e", std::abs(numeric / slope - 1));
}

void symmetry(Verdict& v) {
  const Device d;
  double mirror = 0, odd = 0;
  for (const auto* cap : {&d.pp, &d.poly}) {
    for (double a : {0.05, 0.5, 2.0, 5.0}) {
      for (double volts : {15.0, 35.0, 50.0}) {
        const auto p = solve(d.m, *cap, Loading::in_g(d.m, a, volts));
        const auto n = solve(d.m, *cap, Loading::in_g(d.m, -a, volts));
        mirror = std::max({mirror, std::abs(p.u_hat + n.u_hat) / std::abs(p.u_hat),
                           std::abs(p.v1_hat - n.v2_hat) / p.v1_hat, std::abs(p.v2_hat - n.v1_hat) / p.v2_hat});
        odd = std::max(odd, std::abs((p.f1 - p.f2) + (n.f1 - n.f2)) / std::abs(p.f1 - p.f2));
      }
    }
  }
  v.check(mirror <= 1e-9, "mirror map (a -> -a) within %.2e", mirror);
  v.check(odd <= 1e-9, "delta_f odd within %.2e", odd);

  // Stability labels against the characteristic-polynomial route.
  const double band = critical_band(d.m);
  int checked = 0, mismatched = 0;
  auto compare = [&](const CapacitanceModel& cap, const EquilibriumState& s, const Loading& load) {
    const double lam = oracle::min_eigenvalue_charpoly(hessian(d.m, cap, s.x, load));
    const Stability expect = std::abs(lam) < band ? Stability::Critical : (lam > 0 ? Stability::Stable : Stability::Unstable);
    ++checked;
    if (expect != s.stability) ++mismatched;
  };
  const double a_02 = 0.2 / accel_tilde_per_g(d.m) * d.m.params.materials.gravity;
  for (const auto* cap : {&d.pp, &d.poly}) {
    for (double accel : {0.0, a_02}) {
      for (const auto& tr : bifurcation_diagram(d.m, *cap, accel, 0.2)) {
        for (const auto& p : tr.points) compare(*cap, p.state, sweep_loading(d.m, tr.sweep, tr.fixed, p.param));
      }
    }
  }
  v.check(mismatched == 0, "stability labels: %g mismatches", mismatched);
  v.check(checked > 500, "labels compared on %g states", checked);
}

struct Criterion {
  int number;
  const char* name;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "pull-in point (parallel plate)", pull_in},
      {2, "pitchfork (parallel plate)", pitchfork},
      {3, "polynomial critical voltage", polynomial_critical_voltage},
      {4, "working-range crossover", working_range_crossover},
      {5, "cross-model scale factor", cross_model_scale_factor},
      {6, "thermal frequency law", thermal_frequency_law},
      {7, "TCSF", tcsf_criterion},
      {8, "scaling invariance", scaling_invariance},
      {9, "closed-form oracles", closed_form_oracles},
      {10, "symmetry properties", symmetry},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.number) == wanted.end()) continue;
    Verdict v;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.check(false, "%s", 0.0);
      std::printf("criterion %d threw: %s\n", c.number, e.what());
    }
    std::printf("[%s] %2d %s: %s\n", v.pass() ? "PASS" : "FAIL", c.number, c.name, v.detail().c_str());
    if (!v.pass()) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
