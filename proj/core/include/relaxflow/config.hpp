#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relaxflow/field.hpp"

namespace relaxflow {

/// Malformed or out-of-range configuration.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class MomentumPrep { Zero, Equilibrium, Perturbed };

/// Plain-text experiment description; see configs/*.ini for the format.
struct ExperimentConfig {
  // [grid]
  int dim = 1;
  int n = 256;
  double length = kTwoPi;

  // [model]
  std::string model = "euler_poisson";  // euler | euler_poisson | euler_korteweg
  double k = 1.0;
  double gamma = 2.0;
  double chemosensitivity = 0.1;
  double screening = 1.0;
  double capillarity = 0.01;
  std::string confinement = "none";  // none | cosine
  double confinement_strength = 0.0;

  // [time]
  double final_time = 0.25;
  double dt = 0.0;        // relaxation step, 0 = CFL
  double limit_dt = 0.0;  // limit step, 0 = CFL
  double cfl_safety = 0.4;
  double stiff_ratio = 0.125;
  std::string relax_scheme = "etd3";  // etd3 | if_ssprk3
  std::string limit_scheme = "auto";  // auto | rk4 | semi_implicit
  double output_interval = 0.005;
  // comparison runs sample the first output interval down to layer_fraction * eps^2
  // (0 disables the refinement)
  double layer_fraction = 0.0625;

  // [initial]
  std::string profile = "cosine";
  double amplitude = 0.2;
  double rho_inf = 1.0;
  MomentumPrep prep = MomentumPrep::Equilibrium;
  std::uint64_t seed = 1;
  double perturbation = 1e-3;
  double epsilon = 0.1;  // used by simulate / identity / check
  double rho_min = 1e-8;

  // [sweep]
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  double slope_min = 3.5;
  double slope_max = 4.5;
  double r2_min = 0.98;

  // [output]
  std::string out_dir = "out";
  int cadence = 1;  // write every cadence-th series row
  int workers = 1;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

std::string to_string(MomentumPrep prep);

}  // namespace relaxflow
