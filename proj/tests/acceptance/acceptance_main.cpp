// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: relaxflow_acceptance [config_dir]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "relaxflow/config.hpp"
#include "relaxflow/dynamics.hpp"
#include "relaxflow/elliptic.hpp"
#include "relaxflow/energetics.hpp"
#include "relaxflow/harness.hpp"
#include "relaxflow/relent.hpp"
#include "test_util.hpp"

using namespace relaxflow;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string config_dir;

ExperimentConfig config_for(const std::string& name) {
  return load_config(config_dir + "/" + name + ".ini");
}

struct SweepBundle {
  ExperimentConfig config;
  SweepReport report;
};

SweepBundle run_sweep(const std::string& name) {
  SweepBundle b{config_for(name), {}};
  SweepOptions opt;
  opt.keep_trajectories = true;
  std::fprintf(stderr, "sweep %s ...\n", name.c_str());
  b.report = sweep_eps(b.config, opt);
  std::fprintf(stderr, "  done in %.1f s\n", b.report.wall_seconds);
  return b;
}

Verdict rate_criterion(const SweepBundle& b) {
  const SweepReport& r = b.report;
  std::ostringstream d;
  for (const auto& p : r.points) {
    if (!p.ok) return {false, "eps=" + fmt(p.eps) + ": " + p.error};
    d << "sup(" << fmt(p.eps) << ")=" << fmt(p.sup_value) << ' ';
  }
  const bool ok = r.fit_ok && r.monotone && r.fit.slope >= 3.5 && r.fit.slope <= 4.5 &&
                  r.fit.r2 >= 0.98;
  d << "slope=" << fmt(r.fit.slope) << " r2=" << fmt(r.fit.r2)
    << (r.monotone ? " monotone" : " not monotone") << " (" << fmt(r.wall_seconds) << " s)";
  return {ok, d.str()};
}

// max per-step energy residual over a short run at a fixed step
double worst_energy_residual(const ExperimentConfig& c, double eps, double dt, double T) {
  const EnergyModel m = make_model(c);
  Spectral ops(make_grid(c));
  StepControl ctl = relax_control(c);
  ctl.dt = dt;
  ctl.stiff_ratio = 0.0;
  const Trajectory t = run_relax(m, initial_relax_state(c, m, eps, ops), eps, T, T, ctl, ops);
  if (t.aborted) throw NumericalError("energy run aborted: " + t.abort_reason);
  const auto r = energy_dissipation_residual(t);
  return *std::max_element(r.begin(), r.end());
}

Verdict energy_criterion(const std::vector<const SweepBundle*>& sweeps) {
  std::ostringstream d;
  bool ok = true;
  for (const SweepBundle* b : sweeps) {
    const ExperimentConfig& c = b->config;
    const EnergyModel m = make_model(c);
    Spectral ops(make_grid(c));
    const double eps = c.eps_list.front();
    const double cfl = cfl_dt_relax(m, initial_relax_state(c, m, eps, ops), eps, c.cfl_safety);
    const double dt = std::min(cfl, 1e-3);
    const double T = 40 * dt;
    const double ratio = worst_energy_residual(c, eps, dt, T) / worst_energy_residual(c, eps, dt / 2, T);
    ok = ok && ratio >= 3.5;
    d << m.name() << " ratio=" << fmt(ratio) << ' ';
    for (const auto& p : b->report.points) {
      if (!p.energy_nonincreasing) {
        ok = false;
        d << "[energy increase at eps=" << fmt(p.eps) << "] ";
      }
    }
    if (b->report.limit && !energy_nonincreasing(*b->report.limit)) {
      ok = false;
      d << "[limit energy increase] ";
    }
  }
  return {ok, d.str()};
}

Verdict mass_criterion(const std::vector<const SweepBundle*>& sweeps) {
  double worst = 0.0;
  for (const SweepBundle* b : sweeps) {
    worst = std::max(worst, b->report.limit_mass_drift);
    for (const auto& p : b->report.points) worst = std::max(worst, p.mass_drift);
  }
  return {worst <= 1e-10, "max relative drift " + fmt(worst) + " over relaxation and limit runs"};
}

std::vector<EnergyModel> models_at(double gamma) {
  const GammaLaw law(1.0, gamma);
  return {EnergyModel::euler(law), EnergyModel::euler_poisson(law, 0.1, 1.0),
          EnergyModel::euler_korteweg(law, 0.01)};
}

Verdict stress_criterion() {
  double worst = 0.0;
  for (int dim : {1, 2}) {
    const TorusGrid g(dim, 128);
    Spectral ops(g);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const ScalarField rho = test::random_band_limited(g, seed, 5, 0.2, 1.0);
      for (double gamma : {1.5, 2.0})
        for (const EnergyModel& m : models_at(gamma))
          worst = std::max(worst, stress_identity_residual(m, rho, ops));
    }
  }
  return {worst < 1e-8, "max relative residual " + fmt(worst) + " (3 models, 1D and 2D)"};
}

Verdict elliptic_criterion() {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  double dense = 0.0;
  for (double beta : {0.0, 0.5, 1.0}) {
    ScalarField rho = test::random_band_limited(g, 17, 15, 1.0, 1.0);
    for (int i = 0; i < 32; ++i) rho[i] += 0.05 * (i % 2 == 0 ? 1.0 : -1.0);
    const ScalarField c = solve_screened_poisson(rho, beta, ops);
    const Eigen::VectorXd o = test::dense_screened_poisson(rho, beta);
    for (int i = 0; i < 32; ++i) dense = std::max(dense, std::abs(c[i] - o[i]));
  }
  double ident = 0.0;
  for (int dim : {1, 2}) {
    const TorusGrid g2(dim, dim == 1 ? 256 : 64);
    Spectral o2(g2);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const ScalarField rho = test::random_band_limited(g2, seed, 8, 0.4, 1.0);
      for (double beta : {0.0, 1.0}) {
        const ScalarField c = solve_screened_poisson(rho, beta, o2);
        const double scale = integral(o2.gradient(c).norm_squared()) + beta * integral(c * c);
        ident = std::max(ident, energy_identity_residual(rho, c, beta, o2) / scale);
      }
    }
  }
  return {dense <= 1e-10 && ident <= 1e-10,
          "dense max-abs " + fmt(dense) + ", energy identity relative " + fmt(ident)};
}

Verdict gateaux_criterion() {
  const TorusGrid g(1, 128);
  Spectral ops(g);
  const ScalarField rho = test::random_band_limited(g, 41, 4, 0.3, 1.0);
  const ScalarField dir = test::random_band_limited(g, 42, 4, 1.0);
  std::ostringstream d;
  bool ok = true;
  // gamma = 1.5 so that no energy is quadratic (a quadratic one is exact at every tau)
  for (const EnergyModel& m : models_at(1.5)) {
    const GateauxLadder l = gateaux_check(m, rho, dir, {1e-2, 1e-3, 1e-4}, ops);
    double lo = INFINITY, hi = -INFINITY;
    for (double r : l.observed_rates()) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double last = l.relative_residuals.back();
    ok = ok && lo >= 1.9 && hi <= 2.1 && last <= 1e-6;
    d << m.name() << " rates [" << fmt(lo) << ", " << fmt(hi) << "] err " << fmt(last) << "; ";
  }
  return {ok, d.str()};
}

Verdict lemma_criterion() {
  const test::LemmaBox box;
  std::mt19937 gen(2718);
  std::uniform_real_distribution<double> u(1e-3, 10.0);
  std::uniform_real_distribution<double> rb(box.rho_bar_lo, box.rho_bar_hi);
  std::uniform_real_distribution<double> near(0.0, box.r0);
  std::uniform_real_distribution<double> far(std::log(box.r0), std::log(box.rho_max));
  int identity_bad = 0, violations = 0;
  std::ostringstream d;
  for (double gamma : {1.4, 1.5, 5.0 / 3.0, 2.0, 3.0}) {
    const GammaLaw law(1.0, gamma);
    for (int s = 0; s < 10000; ++s) {
      const double r = u(gen), b = u(gen);
      const double hr = law.relative_internal_energy(r, b);
      const double pr = law.relative_pressure(r, b);
      if (std::abs(pr - (gamma - 1.0) * hr) > 1e-12 * std::abs(pr)) ++identity_bad;
    }
    const double c1 =
        test::min_ratio(law, 0.0, box.r0, box.rho_bar_lo, box.rho_bar_hi, 2.0, 1500, false);
    const double c2 =
        test::min_ratio(law, box.r0, box.rho_max, box.rho_bar_lo, box.rho_bar_hi, gamma, 1500, true);
    for (int s = 0; s < 10000; ++s) {
      const double b = rb(gen);
      const double r = near(gen);
      if (law.relative_internal_energy(r, b) < c1 * (r - b) * (r - b)) ++violations;
      const double q = std::exp(far(gen));
      if (law.relative_internal_energy(q, b) < c2 * std::pow(std::abs(q - b), gamma)) ++violations;
    }
    if (gamma >= 2.0) {
      const double c0 = test::min_ratio(law, 0.0, 50.0, box.rho_bar_lo, box.rho_bar_hi, 2.0, 1500,
                                        false);
      std::uniform_real_distribution<double> wide(0.0, 50.0);
      for (int s = 0; s < 10000; ++s) {
        const double r = wide(gen), b = rb(gen);
        if (law.relative_internal_energy(r, b) < c0 * (r - b) * (r - b)) ++violations;
      }
      d << "c0(" << fmt(gamma) << ")=" << fmt(c0) << ' ';
    }
  }
  d << "identity failures " << identity_bad << ", bound violations " << violations;
  return {identity_bad == 0 && violations == 0, d.str()};
}

Verdict convexity_criterion(const SweepBundle& ks) {
  const ExperimentConfig& c = ks.config;
  const EnergyModel m = make_model(c);
  const TorusGrid g = make_grid(c);
  Spectral ops(g);
  const ScalarField rho0 = make_initial(c, m, c.epsilon, ops).rho;

  // K from perturbations of the initial density, independent of the runs
  std::vector<ScalarField> samples;
  for (int k = 1; k <= 8; ++k)
    for (double a : {0.01, 0.05})
      samples.push_back(rho0 + ScalarField::from_function(g, [=](double x, double) {
                          return a * std::cos(k * x);
                        }));
  for (unsigned seed = 1; seed <= 16; ++seed)
    samples.push_back(rho0 + test::random_band_limited(g, seed, 6, 0.03));
  const KEstimate est = estimate_K(samples, rho0, m.screening(), m.law(), ops);
  const ConvexityCheck cc = check_convexity(est.k_hat, m.chemosensitivity());
  if (!cc.holds) return {false, "lambda_hat=" + fmt(cc.lambda_hat) + " not positive"};

  const Trajectory& limit = *ks.report.limit;
  std::size_t checked = 0;
  double worst = INFINITY;  // min over times of (lhs - lambda int h_rel) / int h_rel
  bool ok = true;
  for (const auto& p : ks.report.points) {
    const Trajectory& t = *p.trajectory;
    for (std::size_t i = 0; i < t.relax_snapshots.size(); ++i) {
      const ScalarField& rho = t.relax_snapshots[i].rho;
      const ScalarField& rb = limit.limit_snapshots[i].rho;
      const double h = integrated_relative_internal_energy(m.law(), rho, rb);
      const ScalarField dc =
          solve_screened_poisson(rho, m.screening(), ops) - solve_screened_poisson(rb, m.screening(), ops);
      const double lhs = h - 0.5 * m.chemosensitivity() * integral((rho - rb) * dc);
      const double gap = lhs - cc.lambda_hat * h;
      // equality is attained by a pure first mode, so allow rounding only
      if (gap < -1e-12 * h) ok = false;
      if (h > 0.0) worst = std::min(worst, gap / h);
      ++checked;
    }
  }
  return {ok, "K_hat=" + fmt(est.k_hat) + " lambda_hat=" + fmt(cc.lambda_hat) + ", " +
                  std::to_string(checked) + " output times, min relative margin " + fmt(worst)};
}

Verdict error_term_criterion(const SweepBundle& ks) {
  const EnergyModel m = make_model(ks.config);
  Spectral ops(make_grid(ks.config));
  double lo = INFINITY, hi = -INFINITY;
  for (const LimitState& s : ks.report.limit->limit_snapshots) {
    for (double eps : ks.config.eps_list) {
      const double r = l2_norm(error_term(m, s.rho, eps, ops)) /
                       l2_norm(error_term(m, s.rho, 0.5 * eps, ops));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  return {lo >= 1.8 && hi <= 2.2, "ratio range [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Verdict gradflow_criterion(const ExperimentConfig& ch) {
  const EnergyModel m = make_model(ch);
  const TorusGrid g = make_grid(ch);
  Spectral ops(g);
  const ScalarField ra = make_initial(ch, m, ch.epsilon, ops).rho;
  const ScalarField rb = ra + ScalarField::from_function(g, [](double x, double) {
                           return 0.01 * std::cos(2.0 * x) + 0.005 * std::sin(3.0 * x);
                         });
  const double T = 0.02;
  auto imbalance = [&](double dt, double& ratio_to_diss) {
    StepControl c = limit_control(ch, m);
    c.dt = dt;
    const Trajectory a = run_limit(m, LimitState{ra, 0.0}, T, 4 * dt, c, ops);
    const Trajectory b = run_limit(m, LimitState{rb, 0.0}, T, 4 * dt, c, ops);
    if (a.aborted || b.aborted) throw NumericalError("Cahn-Hilliard run aborted");
    const IdentityResidual res = gradflow_relent_residual(a, b, m, ops);
    const auto diss = gradflow_dissipation(a, b, m, ops);
    double d = 0.0;
    for (std::size_t i = 0; i < diss.size(); ++i) d += diss[i] * res.dt[i];
    ratio_to_diss = res.integrated_abs() / d;
    return res.integrated_abs();
  };
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  const double dt = 5e-5;
  const double i1 = imbalance(dt, f1), i2 = imbalance(dt / 2, f2), i3 = imbalance(dt / 4, f3);
  // the semi-implicit step is first order
  const double o1 = std::log2(i1 / i2), o2 = std::log2(i2 / i3);
  const bool ok = f1 <= 0.01 && f2 <= 0.01 && f3 <= 0.01 && o1 >= 0.8 && o2 >= 0.8;
  return {ok, "imbalance/dissipation " + fmt(f1) + ", " + fmt(f2) + ", " + fmt(f3) +
                  "; observed order " + fmt(o1) + ", " + fmt(o2)};
}

Verdict inequality_criterion(const std::vector<const SweepBundle*>& sweeps) {
  std::ostringstream d;
  bool ok = true;
  for (const SweepBundle* b : sweeps) {
    std::size_t times = 0;
    double worst = -INFINITY;  // max over times of imbalance / tolerance
    for (const auto& p : b->report.points) {
      if (!p.inequality) {
        ok = false;
        d << "[no inequality report at eps=" << fmt(p.eps) << "] ";
        continue;
      }
      const InequalityReport& r = *p.inequality;
      ok = ok && r.holds();
      for (std::size_t i = 0; i < r.t.size(); ++i)
        worst = std::max(worst, r.imbalance[i] / r.tolerance[i]);
      times += r.t.size();
    }
    const auto& last = b->report.points.back();
    const bool ablation = last.inequality && last.inequality->ablation_violates();
    ok = ok && ablation;
    d << b->report.model << ": " << times << " times, max imbalance/tol " << fmt(worst)
      << (ablation ? ", ablation violates" : ", ablation does NOT violate") << "; ";
  }
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  config_dir = argc > 1 ? argv[1] : RELAXFLOW_CONFIG_DIR;

  std::vector<std::pair<std::string, Verdict>> rows;
  auto record = [&](const std::string& name, const std::function<Verdict()>& f) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    rows.emplace_back(name, v);
    std::printf("%-4s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", rows.size(), name.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  };

  SweepBundle ks, ch, pm;
  bool sweeps_ok = true;
  try {
    ks = run_sweep("keller_segel");
    ch = run_sweep("cahn_hilliard");
    pm = run_sweep("porous_medium");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sweep setup failed: %s\n", e.what());
    sweeps_ok = false;
  }
  auto need = [&] {
    if (!sweeps_ok) throw NumericalError("sweeps did not run");
  };
  const std::vector<const SweepBundle*> all{&ks, &ch, &pm};

  record("eps^4 rate euler_poisson -> keller_segel", [&] { need(); return rate_criterion(ks); });
  record("eps^4 rate euler_korteweg -> cahn_hilliard", [&] { need(); return rate_criterion(ch); });
  record("eps^4 rate euler -> porous_medium", [&] { need(); return rate_criterion(pm); });
  record("energy dissipation", [&] { need(); return energy_criterion(all); });
  record("mass conservation", [&] { need(); return mass_criterion(all); });
  record("stress identity", stress_criterion);
  record("elliptic solver", elliptic_criterion);
  record("gateaux oracle", gateaux_criterion);
  record("relative energy lemma", lemma_criterion);
  record("convexity of H_c", [&] { need(); return convexity_criterion(ks); });
  record("error term scaling", [&] { need(); return error_term_criterion(ks); });
  record("gradient flow identity", [&] { need(); return gradflow_criterion(ch.config); });
  record("relaxation vs limit inequality", [&] {
    need();
    return inequality_criterion({&ks, &ch});
  });

  const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.second.pass; });
  std::printf("%zu/%zu criteria passed\n", rows.size() - failed, rows.size());
  return failed == 0 ? 0 : 1;
}
