#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relaxflow/energetics.hpp"
#include "relaxflow/field.hpp"

namespace relaxflow {

struct RelaxState {
  ScalarField rho;
  VectorField m;
  double time = 0.0;
};

struct LimitState {
  ScalarField rho;
  double time = 0.0;
};

/// Relaxation: ExponentialRk3 (default) or ImexIntegratingFactor (SSP-RK3 in
/// integrating-factor variables). Limit: ExplicitRk4 or SemiImplicitSpectral.
enum class Scheme { ExponentialRk3, ImexIntegratingFactor, ExplicitRk4, SemiImplicitSpectral };

struct StepControl {
  /// Fixed step; 0 selects the CFL step of the initial state.
  double dt = 0.0;
  double cfl_safety = 0.4;
  Scheme scheme = Scheme::ExponentialRk3;
  /// Relaxation only: dt <= stiff_ratio * eps^2 keeps the exponential
  /// scheme accurate on the slow manifold. Values <= 0 disable the cap.
  double stiff_ratio = 0.125;
  double rho_min = kDefaultRhoMin;
};

/// One row per accepted step (row 0 is the initial state).
struct SeriesRow {
  double t = 0.0;
  double mass = 0.0;
  double total_energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double dissipation = 0.0;
  double phi = 0.0;  // filled by comparisons against a reference run; NaN otherwise
  double psi = 0.0;
  double energy_residual = 0.0;
};

struct Trajectory {
  Trajectory(EnergyModel m, std::optional<double> eps) : model(std::move(m)), epsilon(eps) {}

  EnergyModel model;
  std::optional<double> epsilon;  // empty for limit runs
  double dt = 0.0;  // largest step taken
  double output_interval = 0.0;
  std::size_t steps = 0;
  std::size_t cfl_warnings = 0;
  std::vector<RelaxState> relax_snapshots;
  std::vector<LimitState> limit_snapshots;
  std::vector<SeriesRow> series;
  std::vector<std::size_t> snapshot_rows;  // series row of each snapshot
  bool aborted = false;
  std::string abort_reason;

  bool is_relaxation() const { return epsilon.has_value(); }
  std::vector<double> snapshot_times() const;
};

struct RelaxRates {
  ScalarField rho_dot;
  VectorField m_transport;
  double stiff_coefficient;  // -1/eps^2
};

/// Semi-discrete right-hand side of the scaled relaxation system, split into
/// transport/forcing and the linear friction coefficient.
RelaxRates rhs_relax(const EnergyModel& model, const RelaxState& state, double eps, Spectral& ops,
                     double rho_min = kDefaultRhoMin);

/// Stress tensor with div S = -rho grad(delta E / delta rho) (contact part).
/// For Euler-Poisson `c` may be supplied; otherwise it is solved for.
TensorField stress(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                   const ScalarField* c = nullptr);

/// ||div S + rho grad mu|| / ||rho grad mu||, 0 when both vanish.
double stress_identity_residual(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                                const ScalarField* c = nullptr);

/// div(rho grad(delta E / delta rho)), products dealiased.
ScalarField rhs_limit(const EnergyModel& model, const ScalarField& rho, Spectral& ops);

/// m_bar = -eps rho_bar grad(delta E / delta rho)(rho_bar).
VectorField equilibrium_momentum(const EnergyModel& model, const ScalarField& rho_bar, double eps,
                                 Spectral& ops);

/// d/dt m_bar along the limit flow, by the chain rule through rhs_limit.
VectorField equilibrium_momentum_rate(const EnergyModel& model, const ScalarField& rho_bar,
                                      double eps, Spectral& ops);

/// e_bar = d/dt m_bar + (1/eps) div(m_bar (x) m_bar / rho_bar); linear in eps.
VectorField error_term(const EnergyModel& model, const ScalarField& rho_bar, double eps,
                       Spectral& ops);

/// Largest stable transport step for the relaxation system (friction is exact).
double cfl_dt_relax(const EnergyModel& model, const RelaxState& state, double eps, double safety,
                    double rho_min = kDefaultRhoMin);
/// Explicit diffusive step bound for the limit equations.
double cfl_dt_limit(const EnergyModel& model, const ScalarField& rho, double safety);

/// One relaxation step with the friction integrated exactly. ExponentialRk3
/// also keeps every stage on the equilibrium m = eps^2 f for constant forcing
/// f; the integrating-factor SSP-RK3 stages miss it by O((dt/eps^2)^2).
/// Densities below rho_min are floored and their momentum zeroed.
RelaxState step_relax(const EnergyModel& model, const RelaxState& state, double dt, double eps,
                      Spectral& ops, double rho_min = kDefaultRhoMin,
                      Scheme scheme = Scheme::ExponentialRk3);

/// RK4 (ExplicitRk4) or the stabilised semi-implicit step (SemiImplicitSpectral).
LimitState step_limit(const EnergyModel& model, const LimitState& state, double dt, Scheme scheme,
                      Spectral& ops);

/// Scheme used by default for the limit of a model: semi-implicit for
/// Euler-Korteweg, RK4 otherwise.
Scheme default_limit_scheme(const EnergyModel& model);

/// Snapshot times t0 + k * output_interval up to T. With layer_step > 0 the
/// first interval is also sampled at t0 + output_interval / 2^j down to
/// about layer_step, so fast initial layers are resolved by quadratures.
std::vector<double> snapshot_schedule(double t0, double T, double output_interval,
                                      double layer_step = 0.0);

/// Runs through the given snapshot times (strictly increasing, after the
/// initial time); each gap is split into equal steps no larger than the
/// control step. Numerical failures abort the run and return the partial
/// trajectory with aborted = true.
Trajectory run_relax(const EnergyModel& model, const RelaxState& initial, double eps,
                     const std::vector<double>& times, const StepControl& control, Spectral& ops);
Trajectory run_limit(const EnergyModel& model, const LimitState& initial,
                     const std::vector<double>& times, const StepControl& control, Spectral& ops);
/// Uniform snapshots every output_interval up to T.
Trajectory run_relax(const EnergyModel& model, const RelaxState& initial, double eps, double T,
                     double output_interval, const StepControl& control, Spectral& ops);
Trajectory run_limit(const EnergyModel& model, const LimitState& initial, double T,
                     double output_interval, const StepControl& control, Spectral& ops);

/// Energy bookkeeping of one state.
SeriesRow relax_diagnostics(const EnergyModel& model, const RelaxState& state, double eps,
                            Spectral& ops, double rho_min = kDefaultRhoMin);
SeriesRow limit_diagnostics(const EnergyModel& model, const LimitState& state, Spectral& ops);

/// Per-step |(TE_{n+1} - TE_n)/dt + (D_n + D_{n+1})/2| (trapezoidal dissipation).
std::vector<double> energy_dissipation_residual(const Trajectory& traj);
std::vector<double> limit_dissipation_residual(const Trajectory& traj);

/// True when total energy never increases by more than `slack` times the
/// largest per-step residual times dt.
bool energy_nonincreasing(const Trajectory& traj, double slack = 1.0);

/// Relative drift |M(t) - M(0)| / M(0) maximised over the series.
double max_mass_drift(const Trajectory& traj);

}  // namespace relaxflow
