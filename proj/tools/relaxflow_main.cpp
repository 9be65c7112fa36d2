// relaxflow command line: simulate / sweep / check / identity / report.
// Exit codes: 0 pass, 1 numerical failure, 2 configuration error.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "relaxflow/config.hpp"
#include "relaxflow/dynamics.hpp"
#include "relaxflow/harness.hpp"
#include "relaxflow/relent.hpp"
#include "relaxflow/report.hpp"

namespace fs = std::filesystem;
using namespace relaxflow;

namespace {

constexpr int kPass = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Globals {
  std::string out;
  int workers = 0;
  long long seed = -1;
  bool quiet = false;
};

ExperimentConfig load(const std::string& path, const Globals& g) {
  ExperimentConfig c = load_config(path);
  if (!g.out.empty()) c.out_dir = g.out;
  if (g.workers > 0) c.workers = g.workers;
  if (g.seed >= 0) c.seed = static_cast<std::uint64_t>(g.seed);
  c.validate();
  return c;
}

std::string eps_tag(double eps) {
  std::ostringstream s;
  s << "eps_" << std::setprecision(6) << eps;
  return s.str();
}

int cmd_simulate(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  const EnergyModel model = make_model(c);
  Spectral ops(make_grid(c));
  const RelaxState init = initial_relax_state(c, model, c.epsilon, ops);
  const Trajectory t =
      run_relax(model, init, c.epsilon, c.final_time, c.output_interval, relax_control(c), ops);
  // persisted even when the run aborted
  write_series_csv((fs::path(c.out_dir) / "series.csv").string(), t, c.cadence);
  write_checkpoint((fs::path(c.out_dir) / "checkpoint").string(), t, c);
  const double drift = max_mass_drift(t);
  const bool decay = energy_nonincreasing(t);
  const bool pass = !t.aborted && drift <= 1e-10 && decay;
  nlohmann::ordered_json j;
  j["kind"] = "simulate";
  j["model"] = model.name();
  j["epsilon"] = c.epsilon;
  j["steps"] = t.steps;
  j["dt"] = t.dt;
  j["aborted"] = t.aborted;
  j["mass_drift"] = drift;
  j["energy_nonincreasing"] = decay;
  j["cfl_warnings"] = t.cfl_warnings;
  j["pass"] = pass;
  std::ofstream((fs::path(c.out_dir) / "simulate.json").string()) << j.dump(2) << '\n';
  if (!g.quiet) {
    std::cout << "simulate " << model.name() << " eps=" << c.epsilon << " steps=" << t.steps
              << " dt=" << t.dt << " mass_drift=" << drift
              << " energy_decay=" << (decay ? "yes" : "no") << '\n';
    if (t.aborted) std::cout << "aborted: " << t.abort_reason << '\n';
  }
  return pass ? kPass : kNumerical;
}

int cmd_sweep(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  SweepOptions opt;
  opt.workers = c.workers;
  opt.keep_trajectories = true;
  const SweepReport rep = sweep_eps(c, opt);
  write_sweep_json((fs::path(c.out_dir) / "sweep.json").string(), rep, c);
  for (const auto& p : rep.points) {
    const fs::path dir = fs::path(c.out_dir) / eps_tag(p.eps);
    if (p.trajectory) write_series_csv((dir / "series.csv").string(), *p.trajectory, c.cadence);
    if (p.inequality) p.inequality->write_csv((dir / "inequality.csv").string());
  }
  if (rep.limit)
    write_series_csv((fs::path(c.out_dir) / "limit_series.csv").string(), *rep.limit, c.cadence);
  if (!g.quiet) std::cout << format_sweep_table(rep);
  return rep.pass ? kPass : kNumerical;
}

int cmd_check(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  const CheckReport rep = check_suite(c);
  write_check_json((fs::path(c.out_dir) / "check.json").string(), rep);
  if (!g.quiet) std::cout << format_check_table(rep);
  return rep.all_pass() ? kPass : kNumerical;
}

int cmd_identity(const std::string& path, const Globals& g) {
  const ExperimentConfig c = load(path, g);
  const EnergyModel model = make_model(c);
  Spectral ops(make_grid(c));
  const RelaxState init = initial_relax_state(c, model, c.epsilon, ops);
  const std::vector<double> times = comparison_times(c, c.epsilon);
  const Trajectory limit =
      run_limit(model, LimitState{init.rho, 0.0}, times, limit_control(c, model), ops);
  const Trajectory relax = run_relax(model, init, c.epsilon, times, relax_control(c), ops);
  if (relax.aborted || limit.aborted) {
    if (!g.quiet) std::cout << "run aborted: " << relax.abort_reason << limit.abort_reason << '\n';
    return kNumerical;
  }
  const InequalityReport rep = relax_limit_inequality_residual(relax, limit, model, c.epsilon, ops);
  rep.write_csv((fs::path(c.out_dir) / "identity.csv").string());
  write_identity_json((fs::path(c.out_dir) / "identity.json").string(), rep, c.epsilon,
                      model.name());
  if (!g.quiet) {
    std::cout << "identity " << model.name() << " eps=" << c.epsilon << '\n';
    std::cout << "  t            lhs          rhs          imbalance    tolerance\n";
    for (std::size_t i = 0; i < rep.t.size(); i += std::max<std::size_t>(1, rep.t.size() / 10)) {
      std::cout << std::scientific << std::setprecision(4) << "  " << rep.t[i] << "  "
                << rep.lhs[i] << "  " << rep.rhs[i] << "  " << rep.imbalance[i] << "  "
                << rep.tolerance[i] << '\n';
    }
    std::cout << "  inequality " << (rep.holds() ? "holds" : "VIOLATED") << '\n';
  }
  return rep.holds() ? kPass : kNumerical;
}

int cmd_report(const std::string& dir, const Globals& g) {
  bool all_pass = false;
  const std::string table = consolidate_reports(dir, all_pass);
  if (!g.quiet) std::cout << table;
  return all_pass ? kPass : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relaxflow: high-friction relaxation and gradient-flow simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "output directory (overrides the config)");
  app.add_option("--workers", g.workers, "parallel sweep workers")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed for perturbed initial data")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", g.quiet, "suppress tables on stdout");

  std::string target;
  auto* sim = app.add_subcommand("simulate", "run one relaxation trajectory");
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep and rate fit");
  auto* check = app.add_subcommand("check", "module invariant checks");
  auto* ident = app.add_subcommand("identity", "relaxation vs limit relative energy inequality");
  auto* rep = app.add_subcommand("report", "consolidate JSON reports in a directory");
  for (auto* s : {sim, sweep, check, ident}) {
    s->add_option("config", target, "experiment config (.ini)")->required();
    s->fallthrough();
  }
  rep->add_option("dir", target, "directory with reports")->required();
  rep->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(target, g);
    if (*sweep) return cmd_sweep(target, g);
    if (*check) return cmd_check(target, g);
    if (*ident) return cmd_identity(target, g);
    if (*rep) return cmd_report(target, g);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kConfig;
}
