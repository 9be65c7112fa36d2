#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relaxflow/config.hpp"
#include "relaxflow/dynamics.hpp"
#include "relaxflow/energetics.hpp"
#include "relaxflow/relent.hpp"

namespace relaxflow {

EnergyModel make_model(const ExperimentConfig& config);
TorusGrid make_grid(const ExperimentConfig& config);
StepControl relax_control(const ExperimentConfig& config);
StepControl limit_control(const ExperimentConfig& config, const EnergyModel& model);

struct InitialData {
  ScalarField rho;
  std::optional<VectorField> m;  // empty for the zero prep
};

/// rho0 = rho_inf + a cos(2 pi x / L) [cos(2 pi y / L)]; momentum from the
/// configured prep at the given epsilon.
InitialData make_initial(const ExperimentConfig& config, const EnergyModel& model, double eps,
                         Spectral& ops);
RelaxState initial_relax_state(const ExperimentConfig& config, const EnergyModel& model,
                               double eps, Spectral& ops);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Snapshot grid of comparison runs: every output_interval, plus a graded
/// refinement of the first interval down to layer_fraction * eps^2.
std::vector<double> comparison_times(const ExperimentConfig& config, double eps);

/// Least squares of log(value) against log(eps); needs >= 3 positive pairs.
SlopeFit slope_fit(std::span<const std::pair<double, double>> pairs);

struct SweepPoint {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  double sup_value = 0.0;  // sup over snapshots of phi (psi for Euler-Korteweg)
  std::vector<double> values;  // per snapshot
  double max_energy_residual = 0.0;
  bool energy_nonincreasing = false;
  double mass_drift = 0.0;
  std::size_t steps = 0;
  std::size_t cfl_warnings = 0;
  double wall_seconds = 0.0;
  std::optional<InequalityReport> inequality;
  std::optional<Trajectory> trajectory;
};

struct SweepReport {
  std::string model;
  std::string measure;  // phi or psi
  std::vector<SweepPoint> points;
  std::optional<Trajectory> limit;
  double limit_mass_drift = 0.0;
  bool fit_ok = false;
  SlopeFit fit;
  bool monotone = false;
  bool pass = false;
  double wall_seconds = 0.0;
};

struct SweepOptions {
  int workers = 1;
  bool keep_trajectories = false;
  bool inequality = true;
};

/// One limit run, then a relaxation run per epsilon from well-prepared data
/// (or the configured prep), compared at the snapshot times.
SweepReport sweep_eps(const ExperimentConfig& config, const SweepOptions& options);

/// sup of the comparison measure along one relaxation run against a limit run.
std::vector<double> comparison_series(const EnergyModel& model, const Trajectory& relax,
                                      const Trajectory& limit, double eps, Spectral& ops);

struct CheckItem {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct CheckReport {
  std::string model;
  std::vector<CheckItem> items;
  bool all_pass() const;
};

/// Module invariant checks on the configured model and initial data.
CheckReport check_suite(const ExperimentConfig& config);

}  // namespace relaxflow
