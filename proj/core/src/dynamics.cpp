#include "relaxflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relaxflow/elliptic.hpp"

namespace relaxflow {

namespace {

// d/dx_axis of the 2/3-truncated field in one transform pair
ScalarField dealiased_partial(Spectral& ops, const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid();
  const double kcut = kTwoPi / g.length_per_axis() * g.dealias_cutoff() * (1.0 + 1e-12);
  return ops.apply_symbol(f, [axis, kcut](double kx, double ky) -> Spectral::Complex {
    if (std::abs(kx) > kcut || std::abs(ky) > kcut) return 0.0;
    return Spectral::Complex(0.0, axis == 0 ? kx : ky);
  });
}

// sum_a d_a D(v_a)
ScalarField dealiased_divergence(Spectral& ops, const VectorField& v) {
  ScalarField out = dealiased_partial(ops, v[0], 0);
  for (int a = 1; a < v.dim(); ++a) out += dealiased_partial(ops, v[a], a);
  return out;
}

void require_finite(const ScalarField& f, const char* where) {
  if (!f.all_finite()) throw NumericalError(std::string(where) + ": non-finite values");
}

void require_finite(const VectorField& v, const char* where) {
  if (!v.all_finite()) throw NumericalError(std::string(where) + ": non-finite values");
}

void require_positive(const ScalarField& rho, const char* where) {
  for (double v : rho.values()) {
    if (!(v > 0.0)) throw DomainError(std::string(where) + ": density must be positive");
  }
}

void require_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("epsilon must be positive");
}

const ScalarField* ptr(const std::optional<ScalarField>& c) { return c ? &*c : nullptr; }

// directional derivative of mu at rho along drho (confinement is constant in time)
ScalarField mu_variation(const EnergyModel& model, const ScalarField& rho, const ScalarField& drho,
                         Spectral& ops) {
  const GammaLaw& law = model.law();
  ScalarField dmu(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i)
    dmu[i] = law.internal_energy_second_derivative(rho[i]) * drho[i];
  switch (model.kind()) {
    case ModelKind::Euler: break;
    case ModelKind::EulerPoisson:
      dmu -= model.chemosensitivity() * solve_screened_poisson(drho, model.screening(), ops);
      break;
    case ModelKind::EulerKorteweg:
      dmu -= model.capillarity() * ops.laplacian(drho);
      break;
  }
  return dmu;
}

}  // namespace

std::vector<double> Trajectory::snapshot_times() const {
  std::vector<double> t;
  for (const auto& s : relax_snapshots) t.push_back(s.time);
  for (const auto& s : limit_snapshots) t.push_back(s.time);
  return t;
}

RelaxRates rhs_relax(const EnergyModel& model, const RelaxState& state, double eps, Spectral& ops,
                     double rho_min) {
  require_eps(eps);
  require_same_grid(state.rho.grid(), state.m.grid(), "rhs_relax");
  require_finite(state.rho, "rhs_relax");
  require_finite(state.m, "rhs_relax");
  const ScalarField& rho = state.rho;
  const VectorField u = velocity(rho, state.m, rho_min);
  const int dim = rho.grid().dim();

  const auto c = chemoattractant(model, rho, ops);
  const VectorField gmu = ops.gradient(variational_derivative(model, rho, ops, ptr(c)));

  RelaxRates out{-(1.0 / eps) * ops.divergence(state.m), VectorField(rho.grid()),
                 -1.0 / (eps * eps)};
  for (int a = 0; a < dim; ++a) {
    ScalarField flux = dealiased_partial(ops, state.m[a] * u[0], 0);
    for (int b = 1; b < dim; ++b) flux += dealiased_partial(ops, state.m[a] * u[b], b);
    flux += ops.dealias(rho * gmu[a]);
    out.m_transport[a] = -(1.0 / eps) * flux;
  }
  require_finite(out.rho_dot, "rhs_relax");
  require_finite(out.m_transport, "rhs_relax");
  return out;
}

TensorField stress(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                   const ScalarField* c) {
  const GammaLaw& law = model.law();
  TensorField s(rho.grid());
  ScalarField iso = -pressure(law, rho);
  switch (model.kind()) {
    case ModelKind::Euler: break;
    case ModelKind::EulerPoisson: {
      std::optional<ScalarField> own;
      if (!c) {
        own = solve_screened_poisson(rho, model.screening(), ops);
        c = &*own;
      }
      const double cx = model.chemosensitivity();
      const VectorField gc = ops.gradient(*c);
      iso += 0.5 * cx * (model.screening() * (*c * *c) + gc.norm_squared());
      iso += (cx * mean(rho)) * *c;
      s.add_outer(gc, gc, -cx);
      break;
    }
    case ModelKind::EulerKorteweg: {
      const double ck = model.capillarity();
      const VectorField gr = ops.gradient(rho);
      iso += 0.5 * ck * gr.norm_squared();
      iso += ck * (rho * ops.laplacian(rho));
      s.add_outer(gr, gr, -ck);
      break;
    }
  }
  s.add_isotropic(iso);
  return s;
}

double stress_identity_residual(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                                const ScalarField* c) {
  std::optional<ScalarField> own;
  if (model.needs_chemoattractant() && !c) {
    own = solve_screened_poisson(rho, model.screening(), ops);
    c = &*own;
  }
  const TensorField s = stress(model, rho, ops, c);
  const VectorField force = rho * ops.gradient(contact_variational_derivative(model, rho, ops, c));
  const int dim = rho.grid().dim();
  VectorField div_s(rho.grid());
  for (int a = 0; a < dim; ++a) {
    ScalarField acc = ops.partial(s(a, 0), 0);
    for (int b = 1; b < dim; ++b) acc += ops.partial(s(a, b), b);
    div_s[a] = acc;
  }
  const double denom = l2_norm(force);
  const double num = l2_norm(div_s + force);
  if (denom == 0.0) return num == 0.0 ? 0.0 : num;
  return num / denom;
}

ScalarField rhs_limit(const EnergyModel& model, const ScalarField& rho, Spectral& ops) {
  require_positive(rho, "rhs_limit");
  const VectorField gmu = ops.gradient(variational_derivative(model, rho, ops));
  ScalarField out = dealiased_divergence(ops, rho * gmu);
  require_finite(out, "rhs_limit");
  return out;
}

VectorField equilibrium_momentum(const EnergyModel& model, const ScalarField& rho_bar, double eps,
                                 Spectral& ops) {
  require_eps(eps);
  require_positive(rho_bar, "equilibrium_momentum");
  const VectorField gmu = ops.gradient(variational_derivative(model, rho_bar, ops));
  VectorField m(rho_bar.grid());
  for (int a = 0; a < m.dim(); ++a) m[a] = -eps * ops.dealias(rho_bar * gmu[a]);
  return m;
}

VectorField equilibrium_momentum_rate(const EnergyModel& model, const ScalarField& rho_bar,
                                      double eps, Spectral& ops) {
  require_eps(eps);
  require_positive(rho_bar, "equilibrium_momentum_rate");
  const ScalarField rho_t = rhs_limit(model, rho_bar, ops);
  const VectorField gmu = ops.gradient(variational_derivative(model, rho_bar, ops));
  const VectorField gmu_t = ops.gradient(mu_variation(model, rho_bar, rho_t, ops));
  VectorField mt(rho_bar.grid());
  for (int a = 0; a < mt.dim(); ++a)
    mt[a] = -eps * ops.dealias(rho_t * gmu[a] + rho_bar * gmu_t[a]);
  return mt;
}

VectorField error_term(const EnergyModel& model, const ScalarField& rho_bar, double eps,
                       Spectral& ops) {
  VectorField e = equilibrium_momentum_rate(model, rho_bar, eps, ops);
  const VectorField m = equilibrium_momentum(model, rho_bar, eps, ops);
  const int dim = rho_bar.grid().dim();
  for (int a = 0; a < dim; ++a) {
    ScalarField flux = dealiased_partial(ops, m[a] * m[0] / rho_bar, 0);
    for (int b = 1; b < dim; ++b) flux += dealiased_partial(ops, m[a] * m[b] / rho_bar, b);
    e[a] += (1.0 / eps) * flux;
  }
  require_finite(e, "error_term");
  return e;
}

double cfl_dt_relax(const EnergyModel& model, const RelaxState& state, double eps, double safety,
                    double rho_min) {
  require_eps(eps);
  if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("cfl safety must lie in (0, 1]");
  const TorusGrid& g = state.rho.grid();
  const double rho_max = state.rho.max();
  const double umax = std::sqrt(velocity(state.rho, state.m, rho_min).norm_squared().max());
  const double kmax = kTwoPi / g.length_per_axis() * (g.points_per_axis() / 2);
  double c2 = model.law().pressure_derivative(rho_max);
  c2 += model.capillarity() * rho_max * kmax * kmax;
  const double speed = (umax + std::sqrt(c2)) * std::sqrt(static_cast<double>(g.dim()));
  if (!(speed > 0.0)) return std::numeric_limits<double>::infinity();
  return safety * eps * g.spacing() / speed;
}

double cfl_dt_limit(const EnergyModel& model, const ScalarField& rho, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("cfl safety must lie in (0, 1]");
  const TorusGrid& g = rho.grid();
  const double rho_max = rho.max();
  const double kcut = kTwoPi / g.length_per_axis() * g.dealias_cutoff();
  const double k2 = kcut * kcut * g.dim();
  const double rate = (model.law().pressure_derivative(rho_max) +
                       model.chemosensitivity() * rho_max + model.capillarity() * rho_max * k2) *
                      k2;
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  // RK4 covers roughly [-2.78, 0] on the real axis
  return safety * 2.5 / rate;
}

namespace {

// phi_1..phi_3 of x = -dt/eps^2; series near zero avoids the cancellation
struct PhiFunctions {
  double e, p1, p2, p3;
};

PhiFunctions phi_functions(double x) {
  PhiFunctions f;
  f.e = std::exp(x);
  if (std::abs(x) < 0.5) {
    // phi_k(x) = sum_j x^j / (j + k)!
    double t1 = 1.0, t2 = 0.5, t3 = 1.0 / 6.0;
    f.p1 = f.p2 = f.p3 = 0.0;
    for (int j = 0; j < 30; ++j) {
      f.p1 += t1;
      f.p2 += t2;
      f.p3 += t3;
      t1 *= x / (j + 2);
      t2 *= x / (j + 3);
      t3 *= x / (j + 4);
    }
  } else {
    f.p1 = std::expm1(x) / x;
    f.p2 = (f.p1 - 1.0) / x;
    f.p3 = (f.p2 - 0.5) / x;
  }
  return f;
}

// applied to every stage so the velocity is defined where rhs_relax needs it
void floor_vacuum(RelaxState& s, double rho_min) {
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (s.rho[i] <= rho_min) {
      s.rho[i] = rho_min;
      for (int a = 0; a < s.m.dim(); ++a) s.m[a][i] = 0.0;
    }
  }
}

RelaxState step_if_ssprk3(const EnergyModel& model, const RelaxState& state, double dt,
                          double eps, Spectral& ops, double rho_min) {
  const double s = 1.0 / (eps * eps);
  const double e_full = std::exp(-dt * s);
  const double e_half = std::exp(-0.5 * dt * s);
  const double e_back = std::exp(0.5 * dt * s);

  const RelaxRates r0 = rhs_relax(model, state, eps, ops, rho_min);
  RelaxState s1{state.rho + dt * r0.rho_dot, e_full * (state.m + dt * r0.m_transport),
                state.time + dt};
  floor_vacuum(s1, rho_min);

  const RelaxRates r1 = rhs_relax(model, s1, eps, ops, rho_min);
  RelaxState s2{0.75 * state.rho + 0.25 * (s1.rho + dt * r1.rho_dot),
                (0.75 * e_half) * state.m + (0.25 * e_back) * (s1.m + dt * r1.m_transport),
                state.time + 0.5 * dt};
  floor_vacuum(s2, rho_min);

  const RelaxRates r2 = rhs_relax(model, s2, eps, ops, rho_min);
  return RelaxState{(1.0 / 3.0) * state.rho + (2.0 / 3.0) * (s2.rho + dt * r2.rho_dot),
                    (e_full / 3.0) * state.m + (2.0 * e_half / 3.0) * (s2.m + dt * r2.m_transport),
                    state.time + dt};
}

// Cox-Matthews ETD3; with zero friction it is Kutta's third-order method,
// which is what the density sees
RelaxState step_etd3(const EnergyModel& model, const RelaxState& state, double dt, double eps,
                     Spectral& ops, double rho_min) {
  const double x = -dt / (eps * eps);
  const PhiFunctions h = phi_functions(0.5 * x);
  const PhiFunctions f = phi_functions(x);

  const RelaxRates r0 = rhs_relax(model, state, eps, ops, rho_min);
  RelaxState a{state.rho + (0.5 * dt) * r0.rho_dot,
               h.e * state.m + (0.5 * dt * h.p1) * r0.m_transport, state.time + 0.5 * dt};
  floor_vacuum(a, rho_min);

  const RelaxRates ra = rhs_relax(model, a, eps, ops, rho_min);
  RelaxState b{state.rho + dt * (2.0 * ra.rho_dot - r0.rho_dot),
               f.e * state.m + (dt * f.p1) * (2.0 * ra.m_transport - r0.m_transport),
               state.time + dt};
  floor_vacuum(b, rho_min);

  const RelaxRates rb = rhs_relax(model, b, eps, ops, rho_min);
  const double w0 = f.p1 - 3.0 * f.p2 + 4.0 * f.p3;
  const double wa = 4.0 * f.p2 - 8.0 * f.p3;
  const double wb = 4.0 * f.p3 - f.p2;
  RelaxState out{state.rho + (dt / 6.0) * (r0.rho_dot + 4.0 * ra.rho_dot + rb.rho_dot),
                 f.e * state.m, state.time + dt};
  out.m += (dt * w0) * r0.m_transport;
  out.m += (dt * wa) * ra.m_transport;
  out.m += (dt * wb) * rb.m_transport;
  return out;
}

}  // namespace

RelaxState step_relax(const EnergyModel& model, const RelaxState& state, double dt, double eps,
                      Spectral& ops, double rho_min, Scheme scheme) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step_relax: dt must be positive");
  require_eps(eps);
  RelaxState out = [&] {
    switch (scheme) {
      case Scheme::ExponentialRk3: return step_etd3(model, state, dt, eps, ops, rho_min);
      case Scheme::ImexIntegratingFactor:
        return step_if_ssprk3(model, state, dt, eps, ops, rho_min);
      default: throw DomainError("step_relax: scheme does not apply to relaxation runs");
    }
  }();
  require_finite(out.rho, "step_relax");
  require_finite(out.m, "step_relax");
  floor_vacuum(out, rho_min);
  return out;
}

Scheme default_limit_scheme(const EnergyModel& model) {
  return model.kind() == ModelKind::EulerKorteweg ? Scheme::SemiImplicitSpectral
                                                   : Scheme::ExplicitRk4;
}

LimitState step_limit(const EnergyModel& model, const LimitState& state, double dt, Scheme scheme,
                      Spectral& ops) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step_limit: dt must be positive");
  const ScalarField& rho = state.rho;
  LimitState out{rho, state.time + dt};
  switch (scheme) {
    case Scheme::ExplicitRk4: {
      const ScalarField k1 = rhs_limit(model, rho, ops);
      const ScalarField k2 = rhs_limit(model, rho + (0.5 * dt) * k1, ops);
      const ScalarField k3 = rhs_limit(model, rho + (0.5 * dt) * k2, ops);
      const ScalarField k4 = rhs_limit(model, rho + dt * k3, ops);
      out.rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      break;
    }
    case Scheme::SemiImplicitSpectral: {
      // (1 + dt A k^4) rho_new = rho + dt (F(rho) + A k^4 rho)  with A = C_kappa rho_max,
      // i.e. the explicit update divided by the biharmonic factor
      const double a = model.capillarity() * rho.max();
      const ScalarField f = rhs_limit(model, rho, ops);
      out.rho = rho + ops.apply_symbol(dt * f, [a, dt](double kx, double ky) -> Spectral::Complex {
        const double k2 = kx * kx + ky * ky;
        return 1.0 / (1.0 + dt * a * k2 * k2);
      });
      break;
    }
    case Scheme::ExponentialRk3:
    case Scheme::ImexIntegratingFactor:
      throw DomainError("step_limit: relaxation schemes do not apply to the limit equation");
  }
  require_finite(out.rho, "step_limit");
  require_positive(out.rho, "step_limit");
  return out;
}

SeriesRow relax_diagnostics(const EnergyModel& model, const RelaxState& state, double eps,
                            Spectral& ops, double rho_min) {
  SeriesRow row;
  row.t = state.time;
  row.mass = integral(state.rho);
  row.kinetic = kinetic_energy(state.rho, state.m, rho_min);
  row.potential = potential_energy(model, state.rho, ops);
  row.total_energy = row.kinetic + row.potential;
  row.dissipation = 2.0 * row.kinetic / (eps * eps);  // eps^-2 int |m|^2 / rho
  row.phi = std::numeric_limits<double>::quiet_NaN();
  row.psi = std::numeric_limits<double>::quiet_NaN();
  return row;
}

SeriesRow limit_diagnostics(const EnergyModel& model, const LimitState& state, Spectral& ops) {
  SeriesRow row;
  row.t = state.time;
  row.mass = integral(state.rho);
  row.kinetic = 0.0;
  row.potential = potential_energy(model, state.rho, ops);
  row.total_energy = row.potential;
  const VectorField gmu = ops.gradient(variational_derivative(model, state.rho, ops));
  row.dissipation = integral(state.rho * gmu.norm_squared());
  row.phi = std::numeric_limits<double>::quiet_NaN();
  row.psi = std::numeric_limits<double>::quiet_NaN();
  return row;
}

namespace {

double checked_dt(double dt0) {
  if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw DomainError("time step must be positive");
  return dt0;
}

void check_times(double t0, const std::vector<double>& times) {
  if (times.empty()) throw DomainError("snapshot times must not be empty");
  double prev = t0;
  for (double t : times) {
    if (!std::isfinite(t) || !(t > prev)) throw DomainError("snapshot times must increase");
    prev = t;
  }
}

// steps covering [a, b] with size <= dt0
std::size_t segment_steps(double a, double b, double dt0) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / dt0 * (1.0 - 1e-12))));
}

void finish_residual(std::vector<SeriesRow>& series) {
  SeriesRow& b = series.back();
  const SeriesRow& a = series[series.size() - 2];
  b.energy_residual = std::abs((b.total_energy - a.total_energy) / (b.t - a.t) +
                               0.5 * (a.dissipation + b.dissipation));
}

}  // namespace

std::vector<double> snapshot_schedule(double t0, double T, double output_interval,
                                      double layer_step) {
  if (!(T > t0) || !std::isfinite(T)) throw DomainError("final time must exceed the start time");
  const double span = T - t0;
  if (output_interval <= 0.0) output_interval = span;
  const double ratio = span / output_interval;
  const double outputs = std::round(ratio);
  if (outputs < 1.0 || std::abs(ratio - outputs) > 1e-9 * std::max(1.0, ratio))
    throw DomainError("output interval must divide the final time");
  std::vector<double> times;
  if (layer_step > 0.0 && layer_step < output_interval) {
    // geometric refinement of the first interval, ratio 2
    std::vector<double> early;
    for (double h = 0.5 * output_interval; h >= 0.5 * layer_step; h *= 0.5) early.push_back(h);
    for (auto it = early.rbegin(); it != early.rend(); ++it) times.push_back(t0 + *it);
  }
  const auto n = static_cast<std::size_t>(outputs);
  for (std::size_t k = 1; k <= n; ++k)
    times.push_back(k == n ? T : t0 + static_cast<double>(k) * output_interval);
  return times;
}

Trajectory run_relax(const EnergyModel& model, const RelaxState& initial, double eps,
                     const std::vector<double>& times, const StepControl& control,
                     Spectral& ops) {
  require_eps(eps);
  check_times(initial.time, times);
  double dt0 = control.dt > 0.0
                   ? control.dt
                   : cfl_dt_relax(model, initial, eps, control.cfl_safety, control.rho_min);
  if (control.stiff_ratio > 0.0) dt0 = std::min(dt0, control.stiff_ratio * eps * eps);
  checked_dt(dt0);

  Trajectory traj{model, eps};
  traj.output_interval = times.size() > 1 ? times.back() - times[times.size() - 2]
                                          : times.back() - initial.time;
  RelaxState state = initial;
  traj.relax_snapshots.push_back(state);
  traj.snapshot_rows.push_back(0);
  traj.series.push_back(relax_diagnostics(model, state, eps, ops, control.rho_min));

  try {
    double t_prev = initial.time;
    for (double t_next : times) {
      const std::size_t n = segment_steps(t_prev, t_next, dt0);
      const double h = (t_next - t_prev) / static_cast<double>(n);
      traj.dt = std::max(traj.dt, h);
      for (std::size_t j = 1; j <= n; ++j) {
        state = step_relax(model, state, h, eps, ops, control.rho_min, control.scheme);
        ++traj.steps;
        state.time = j == n ? t_next : t_prev + static_cast<double>(j) * h;
        if (h > cfl_dt_relax(model, state, eps, 1.0, control.rho_min)) ++traj.cfl_warnings;
        traj.series.push_back(relax_diagnostics(model, state, eps, ops, control.rho_min));
        finish_residual(traj.series);
      }
      traj.relax_snapshots.push_back(state);
      traj.snapshot_rows.push_back(traj.series.size() - 1);
      t_prev = t_next;
    }
  } catch (const std::exception& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
  }
  return traj;
}

Trajectory run_relax(const EnergyModel& model, const RelaxState& initial, double eps, double T,
                     double output_interval, const StepControl& control, Spectral& ops) {
  return run_relax(model, initial, eps, snapshot_schedule(initial.time, T, output_interval),
                   control, ops);
}

Trajectory run_limit(const EnergyModel& model, const LimitState& initial,
                     const std::vector<double>& times, const StepControl& control,
                     Spectral& ops) {
  check_times(initial.time, times);
  const Scheme scheme = (control.scheme == Scheme::ExplicitRk4 ||
                         control.scheme == Scheme::SemiImplicitSpectral)
                            ? control.scheme
                            : default_limit_scheme(model);
  const double dt0 = checked_dt(
      control.dt > 0.0 ? control.dt : cfl_dt_limit(model, initial.rho, control.cfl_safety));

  Trajectory traj{model, std::nullopt};
  traj.output_interval = times.size() > 1 ? times.back() - times[times.size() - 2]
                                          : times.back() - initial.time;
  LimitState state = initial;
  traj.limit_snapshots.push_back(state);
  traj.snapshot_rows.push_back(0);
  traj.series.push_back(limit_diagnostics(model, state, ops));

  try {
    double t_prev = initial.time;
    for (double t_next : times) {
      const std::size_t n = segment_steps(t_prev, t_next, dt0);
      const double h = (t_next - t_prev) / static_cast<double>(n);
      traj.dt = std::max(traj.dt, h);
      for (std::size_t j = 1; j <= n; ++j) {
        state = step_limit(model, state, h, scheme, ops);
        ++traj.steps;
        state.time = j == n ? t_next : t_prev + static_cast<double>(j) * h;
        if (scheme == Scheme::ExplicitRk4 && h > cfl_dt_limit(model, state.rho, 1.0))
          ++traj.cfl_warnings;
        traj.series.push_back(limit_diagnostics(model, state, ops));
        finish_residual(traj.series);
      }
      traj.limit_snapshots.push_back(state);
      traj.snapshot_rows.push_back(traj.series.size() - 1);
      t_prev = t_next;
    }
  } catch (const std::exception& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
  }
  return traj;
}

Trajectory run_limit(const EnergyModel& model, const LimitState& initial, double T,
                     double output_interval, const StepControl& control, Spectral& ops) {
  return run_limit(model, initial, snapshot_schedule(initial.time, T, output_interval), control,
                   ops);
}

std::vector<double> energy_dissipation_residual(const Trajectory& traj) {
  if (!traj.is_relaxation())
    throw DomainError("energy_dissipation_residual: relaxation trajectory required");
  std::vector<double> r;
  for (std::size_t i = 1; i < traj.series.size(); ++i) r.push_back(traj.series[i].energy_residual);
  return r;
}

std::vector<double> limit_dissipation_residual(const Trajectory& traj) {
  if (traj.is_relaxation())
    throw DomainError("limit_dissipation_residual: limit trajectory required");
  std::vector<double> r;
  for (std::size_t i = 1; i < traj.series.size(); ++i) r.push_back(traj.series[i].energy_residual);
  return r;
}

bool energy_nonincreasing(const Trajectory& traj, double slack) {
  for (std::size_t i = 1; i < traj.series.size(); ++i) {
    const SeriesRow& a = traj.series[i - 1];
    const SeriesRow& b = traj.series[i];
    const double dt = b.t - a.t;
    const double tol = slack * b.energy_residual * dt + 1e-13 * std::abs(a.total_energy);
    if (b.total_energy - a.total_energy > tol) return false;
  }
  return true;
}

double max_mass_drift(const Trajectory& traj) {
  if (traj.series.empty()) return 0.0;
  const double m0 = traj.series.front().mass;
  double drift = 0.0;
  for (const auto& row : traj.series) drift = std::max(drift, std::abs(row.mass - m0));
  return m0 != 0.0 ? drift / std::abs(m0) : drift;
}

}  // namespace relaxflow
