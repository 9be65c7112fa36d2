#pragma once

#include <string>

#include "relaxflow/config.hpp"
#include "relaxflow/dynamics.hpp"
#include "relaxflow/harness.hpp"
#include "relaxflow/relent.hpp"

namespace relaxflow {

/// Series CSV: t, mass, total_energy, kinetic, potential, dissipation, phi,
/// psi, energy_residual. Every cadence-th row plus the last one.
void write_series_csv(const std::string& path, const Trajectory& traj, int cadence = 1);

/// Field dumps of the final snapshot plus checkpoint.json
/// {model, parameters, epsilon, time, step}. Returns the JSON path.
std::string write_checkpoint(const std::string& dir, const Trajectory& traj,
                             const ExperimentConfig& config);

void write_sweep_json(const std::string& path, const SweepReport& report,
                      const ExperimentConfig& config);
void write_check_json(const std::string& path, const CheckReport& report);
void write_identity_json(const std::string& path, const InequalityReport& report, double eps,
                         const std::string& model);

std::string format_sweep_table(const SweepReport& report);
std::string format_check_table(const CheckReport& report);

/// Reads every sweep/check/identity/simulate JSON under dir, writes
/// dir/report.json and returns a plain-text table. `all_pass` reports the
/// conjunction of the recorded pass flags.
std::string consolidate_reports(const std::string& dir, bool& all_pass);

}  // namespace relaxflow
