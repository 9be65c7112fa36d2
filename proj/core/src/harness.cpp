#include "relaxflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "relaxflow/elliptic.hpp"

namespace relaxflow {

TorusGrid make_grid(const ExperimentConfig& config) {
  return TorusGrid(config.dim, config.n, config.length);
}

EnergyModel make_model(const ExperimentConfig& config) {
  const GammaLaw law(config.k, config.gamma);
  if (config.model == "euler") {
    std::optional<ScalarField> v;
    if (config.confinement == "cosine") {
      const TorusGrid grid = make_grid(config);
      const double w = kTwoPi / config.length;
      const double s = config.confinement_strength;
      v = ScalarField::from_function(grid, [&](double x, double y) {
        return config.dim == 1 ? s * std::cos(w * x) : s * (std::cos(w * x) + std::cos(w * y));
      });
    }
    return EnergyModel::euler(law, std::move(v));
  }
  if (config.model == "euler_poisson")
    return EnergyModel::euler_poisson(law, config.chemosensitivity, config.screening);
  if (config.model == "euler_korteweg") return EnergyModel::euler_korteweg(law, config.capillarity);
  throw ConfigError("unknown model variant " + config.model);
}

StepControl relax_control(const ExperimentConfig& config) {
  StepControl c;
  c.dt = config.dt;
  c.cfl_safety = config.cfl_safety;
  c.scheme = config.relax_scheme == "if_ssprk3" ? Scheme::ImexIntegratingFactor
                                                  : Scheme::ExponentialRk3;
  c.stiff_ratio = config.stiff_ratio;
  c.rho_min = config.rho_min;
  return c;
}

StepControl limit_control(const ExperimentConfig& config, const EnergyModel& model) {
  StepControl c;
  c.dt = config.limit_dt;
  c.cfl_safety = config.cfl_safety;
  if (config.limit_scheme == "rk4") c.scheme = Scheme::ExplicitRk4;
  else if (config.limit_scheme == "semi_implicit") c.scheme = Scheme::SemiImplicitSpectral;
  else c.scheme = default_limit_scheme(model);
  c.rho_min = config.rho_min;
  return c;
}

InitialData make_initial(const ExperimentConfig& config, const EnergyModel& model, double eps,
                         Spectral& ops) {
  const TorusGrid grid = make_grid(config);
  require_same_grid(grid, ops.grid(), "make_initial");
  const double w = kTwoPi / config.length;
  const double a = config.amplitude;
  const double base = config.rho_inf;
  ScalarField rho = ScalarField::from_function(grid, [&](double x, double y) {
    return config.dim == 1 ? base + a * std::cos(w * x)
                           : base + a * std::cos(w * x) * std::cos(w * y);
  });
  if (!(rho.min() > 0.0)) throw ConfigError("initial profile is not positive");

  InitialData out{rho, std::nullopt};
  switch (config.prep) {
    case MomentumPrep::Zero: break;
    case MomentumPrep::Equilibrium:
      out.m = equilibrium_momentum(model, rho, eps, ops);
      break;
    case MomentumPrep::Perturbed: {
      VectorField m = equilibrium_momentum(model, rho, eps, ops);
      // a few random low modes per component, fixed by the seed
      std::mt19937_64 gen(config.seed);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      constexpr int modes = 4;
      for (int axis = 0; axis < grid.dim(); ++axis) {
        std::vector<double> ca(modes * 2);
        for (double& v : ca) v = coef(gen);
        const ScalarField noise = ScalarField::from_function(grid, [&](double x, double y) {
          double s = 0.0;
          const double z = axis == 0 ? x : y;
          for (int k = 1; k <= modes; ++k)
            s += ca[2 * (k - 1)] * std::cos(k * w * z) + ca[2 * (k - 1) + 1] * std::sin(k * w * z);
          return s;
        });
        m[axis] += config.perturbation * noise;
      }
      out.m = std::move(m);
      break;
    }
  }
  return out;
}

RelaxState initial_relax_state(const ExperimentConfig& config, const EnergyModel& model,
                               double eps, Spectral& ops) {
  InitialData d = make_initial(config, model, eps, ops);
  VectorField m = d.m ? std::move(*d.m) : VectorField(d.rho.grid());
  return RelaxState{std::move(d.rho), std::move(m), 0.0};
}

std::vector<double> comparison_times(const ExperimentConfig& config, double eps) {
  return snapshot_schedule(0.0, config.final_time, config.output_interval,
                           config.layer_fraction * eps * eps);
}

SlopeFit slope_fit(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw DomainError("slope_fit: at least three points required");
  double sx = 0.0, sy = 0.0;
  for (const auto& [e, v] : pairs) {
    if (!(e > 0.0) || !(v > 0.0) || !std::isfinite(v))
      throw DomainError("slope_fit: values must be positive");
    sx += std::log(e);
    sy += std::log(v);
  }
  const double n = static_cast<double>(pairs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [e, v] : pairs) {
    const double dx = std::log(e) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DomainError("slope_fit: epsilon values must differ");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [e, v] : pairs) {
    const double r = std::log(v) - (fit.intercept + fit.slope * std::log(e));
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

std::vector<double> comparison_series(const EnergyModel& model, const Trajectory& relax,
                                      const Trajectory& limit, double eps, Spectral& ops) {
  const std::size_t n = std::min(relax.relax_snapshots.size(), limit.limit_snapshots.size());
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    const RelaxState& s = relax.relax_snapshots[i];
    const ScalarField& rho_bar = limit.limit_snapshots[i].rho;
    const VectorField m_bar = equilibrium_momentum(model, rho_bar, eps, ops);
    if (model.kind() == ModelKind::EulerKorteweg)
      out.push_back(psi(s.rho, s.m, rho_bar, m_bar, model.law(), model.capillarity(), ops));
    else
      out.push_back(phi(s.rho, s.m, rho_bar, m_bar, model.law()));
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// phi and psi columns of the series rows that coincide with snapshots
void annotate_series(Trajectory& relax, const Trajectory& limit, const EnergyModel& model,
                     double eps, Spectral& ops) {
  const double ck = model.capillarity();
  for (std::size_t i = 0; i < relax.relax_snapshots.size() && i < limit.limit_snapshots.size();
       ++i) {
    const std::size_t row = relax.snapshot_rows[i];
    const RelaxState& s = relax.relax_snapshots[i];
    const ScalarField& rho_bar = limit.limit_snapshots[i].rho;
    const VectorField m_bar = equilibrium_momentum(model, rho_bar, eps, ops);
    relax.series[row].phi = phi(s.rho, s.m, rho_bar, m_bar, model.law());
    relax.series[row].psi = psi(s.rho, s.m, rho_bar, m_bar, model.law(), ck, ops);
  }
}

SweepPoint run_point(const ExperimentConfig& config, const EnergyModel& model,
                     const Trajectory& limit, const std::vector<double>& times, double eps,
                     const SweepOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepPoint p;
  p.eps = eps;
  try {
    Spectral ops(make_grid(config));
    const RelaxState init = initial_relax_state(config, model, eps, ops);
    Trajectory traj = run_relax(model, init, eps, times, relax_control(config), ops);
    p.steps = traj.steps;
    p.cfl_warnings = traj.cfl_warnings;
    p.mass_drift = max_mass_drift(traj);
    const auto res = energy_dissipation_residual(traj);
    p.max_energy_residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
    p.energy_nonincreasing = energy_nonincreasing(traj);
    if (traj.aborted) {
      p.error = "relaxation run aborted: " + traj.abort_reason;
    } else {
      p.values = comparison_series(model, traj, limit, eps, ops);
      p.sup_value = *std::max_element(p.values.begin(), p.values.end());
      annotate_series(traj, limit, model, eps, ops);
      if (options.inequality)
        p.inequality = relax_limit_inequality_residual(traj, limit, model, eps, ops);
      p.ok = std::isfinite(p.sup_value) && p.sup_value > 0.0;
      if (!p.ok) p.error = "comparison measure is not positive";
    }
    if (options.keep_trajectories) p.trajectory = std::move(traj);
  } catch (const std::exception& e) {
    p.ok = false;
    p.error = e.what();
  }
  p.wall_seconds = seconds_since(t0);
  return p;
}

}  // namespace

SweepReport sweep_eps(const ExperimentConfig& config, const SweepOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const EnergyModel model = make_model(config);
  SweepReport rep;
  rep.model = model.name();
  rep.measure = model.kind() == ModelKind::EulerKorteweg ? "psi" : "phi";

  // one snapshot grid for all runs, resolving the layer of the smallest eps
  const std::vector<double> times = comparison_times(config, config.eps_list.back());
  Trajectory limit = [&] {
    Spectral ops(make_grid(config));
    const InitialData d = make_initial(config, model, config.eps_list.front(), ops);
    return run_limit(model, LimitState{d.rho, 0.0}, times, limit_control(config, model), ops);
  }();
  rep.limit_mass_drift = max_mass_drift(limit);
  if (limit.aborted) {
    for (double eps : config.eps_list) {
      SweepPoint p;
      p.eps = eps;
      p.error = "limit run aborted: " + limit.abort_reason;
      rep.points.push_back(p);
    }
    rep.limit = std::move(limit);
    rep.wall_seconds = seconds_since(t0);
    return rep;
  }

  rep.points.resize(config.eps_list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.eps_list.size(); i = next++)
      rep.points[i] = run_point(config, model, limit, times, config.eps_list[i], options);
  };
  const int nworkers =
      std::max(1, std::min<int>(options.workers, static_cast<int>(config.eps_list.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nworkers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::pair<double, double>> pairs;
  bool all_ok = true;
  for (const auto& p : rep.points) {
    if (p.ok) pairs.emplace_back(p.eps, p.sup_value);
    else all_ok = false;
  }
  if (pairs.size() >= 3) {
    rep.fit = slope_fit(pairs);
    rep.fit_ok = true;
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    if (!(rep.points[i].sup_value < rep.points[i - 1].sup_value)) rep.monotone = false;
  }
  rep.pass = all_ok && rep.fit_ok && rep.monotone && rep.fit.slope >= config.slope_min &&
             rep.fit.slope <= config.slope_max && rep.fit.r2 >= config.r2_min;
  if (options.keep_trajectories) rep.limit = std::move(limit);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

bool CheckReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
}

CheckReport check_suite(const ExperimentConfig& config) {
  CheckReport rep;
  const EnergyModel model = make_model(config);
  rep.model = model.name();
  const TorusGrid grid = make_grid(config);
  Spectral ops(grid);
  const double eps = config.epsilon;
  const RelaxState init = initial_relax_state(config, model, eps, ops);
  const ScalarField& rho0 = init.rho;

  auto add = [&](std::string name, bool pass, double value, double threshold,
                 std::string detail = {}) {
    rep.items.push_back({std::move(name), pass, value, threshold, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what());
    }
  };

  guarded("stress_identity", [&] {
    const double r = stress_identity_residual(model, rho0, ops);
    add("stress_identity", r < 1e-8, r, 1e-8);
  });

  guarded("gateaux", [&] {
    const double w = kTwoPi / config.length;
    const ScalarField dir = ScalarField::from_function(grid, [&](double x, double y) {
      return std::sin(2.0 * w * x) + 0.5 * std::cos(w * (x + y));
    });
    const GateauxLadder g = gateaux_check(model, rho0, dir, {1e-2, 1e-3, 1e-4}, ops);
    const double r = g.relative_residuals.back();
    add("gateaux", r <= 1e-6, r, 1e-6);
  });

  if (model.kind() == ModelKind::EulerPoisson) {
    guarded("elliptic_identity", [&] {
      const ScalarField c = solve_screened_poisson(rho0, model.screening(), ops);
      const double scale = integral(ops.gradient(c).norm_squared()) +
                           model.screening() * integral(c * c);
      const double r = scale > 0.0 ? energy_identity_residual(rho0, c, model.screening(), ops) / scale
                                   : 0.0;
      add("elliptic_identity", r <= 1e-10, r, 1e-10);
    });
    guarded("convexity", [&] {
      std::vector<ScalarField> samples;
      const double w = kTwoPi / config.length;
      for (int k = 1; k <= 6; ++k)
        samples.push_back(rho0 + ScalarField::from_function(grid, [&](double x, double) {
                            return 0.1 * config.amplitude * std::cos(k * w * x);
                          }));
      const KEstimate est = estimate_K(samples, rho0, model.screening(), model.law(), ops);
      const ConvexityCheck cc = check_convexity(est.k_hat, model.chemosensitivity());
      add("convexity", cc.holds, cc.lambda_hat, 0.0);
    });
  }

  guarded("limit_mass_form", [&] {
    const ScalarField r = rhs_limit(model, rho0, ops);
    const double v = std::abs(integral(r));
    add("limit_mass_form", v < 1e-12 * std::max(1.0, l2_norm(r)), v, 1e-12);
  });

  guarded("equilibrium_consistency", [&] {
    const VectorField mb = equilibrium_momentum(model, rho0, eps, ops);
    const RelaxRates rr = rhs_relax(model, RelaxState{rho0, mb, 0.0}, eps, ops, config.rho_min);
    const ScalarField lim = rhs_limit(model, rho0, ops);
    const double denom = std::max(l2_norm(lim), std::numeric_limits<double>::min());
    const double r = l2_norm(rr.rho_dot - lim) / denom;
    add("equilibrium_consistency", r < 1e-10, r, 1e-10);
  });

  guarded("error_term_scaling", [&] {
    const double a = l2_norm(error_term(model, rho0, eps, ops));
    const double b = l2_norm(error_term(model, rho0, 0.5 * eps, ops));
    const double r = b > 0.0 ? a / b : 2.0;
    add("error_term_scaling", r >= 1.8 && r <= 2.2, r, 2.0);
  });

  guarded("relaxation_run", [&] {
    const Trajectory t = run_relax(model, init, eps, config.final_time, config.output_interval,
                                   relax_control(config), ops);
    add("relaxation_completed", !t.aborted, static_cast<double>(t.steps), 0.0, t.abort_reason);
    const double drift = max_mass_drift(t);
    add("relaxation_mass", drift <= 1e-10, drift, 1e-10);
    add("relaxation_energy_decay", energy_nonincreasing(t), 0.0, 0.0);
    add("relaxation_cfl", t.cfl_warnings == 0, static_cast<double>(t.cfl_warnings), 0.0);
  });

  guarded("limit_run", [&] {
    const Trajectory t = run_limit(model, LimitState{rho0, 0.0}, config.final_time,
                                   config.output_interval, limit_control(config, model), ops);
    add("limit_completed", !t.aborted, static_cast<double>(t.steps), 0.0, t.abort_reason);
    const double drift = max_mass_drift(t);
    add("limit_mass", drift <= 1e-10, drift, 1e-10);
    add("limit_energy_decay", energy_nonincreasing(t), 0.0, 0.0);
  });
  return rep;
}

}  // namespace relaxflow
