#include "relaxflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace relaxflow {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  return out;
}

Json parameters(const ExperimentConfig& c) {
  Json j;
  j["dim"] = c.dim;
  j["n"] = c.n;
  j["length"] = c.length;
  j["k"] = c.k;
  j["gamma"] = c.gamma;
  if (c.model == "euler_poisson") {
    j["chemosensitivity"] = c.chemosensitivity;
    j["screening"] = c.screening;
  }
  if (c.model == "euler_korteweg") j["capillarity"] = c.capillarity;
  if (c.model == "euler") {
    j["confinement"] = c.confinement;
    j["confinement_strength"] = c.confinement_strength;
  }
  j["final_time"] = c.final_time;
  j["output_interval"] = c.output_interval;
  j["amplitude"] = c.amplitude;
  j["rho_inf"] = c.rho_inf;
  j["momentum"] = to_string(c.prep);
  j["seed"] = c.seed;
  return j;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string fmt(double v, const char* spec = "%.4e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_series_csv(const std::string& path, const Trajectory& traj, int cadence) {
  if (cadence < 1) throw DomainError("cadence must be >= 1");
  auto out = open_out(path);
  out << std::setprecision(17);
  out << "t,mass,total_energy,kinetic,potential,dissipation,phi,psi,energy_residual\n";
  for (std::size_t i = 0; i < traj.series.size(); ++i) {
    if (i % cadence != 0 && i + 1 != traj.series.size()) continue;
    const SeriesRow& r = traj.series[i];
    out << r.t << ',' << r.mass << ',' << r.total_energy << ',' << r.kinetic << ','
        << r.potential << ',' << r.dissipation << ',' << r.phi << ',' << r.psi << ','
        << r.energy_residual << '\n';
  }
}

std::string write_checkpoint(const std::string& dir, const Trajectory& traj,
                             const ExperimentConfig& config) {
  fs::create_directories(dir);
  Json j;
  j["model"] = traj.model.name();
  j["parameters"] = parameters(config);
  if (traj.epsilon) j["epsilon"] = *traj.epsilon;
  else j["epsilon"] = nullptr;
  j["step"] = traj.steps;
  j["aborted"] = traj.aborted;
  if (traj.aborted) j["abort_reason"] = traj.abort_reason;
  Json files = Json::array();
  if (traj.is_relaxation()) {
    const RelaxState& s = traj.relax_snapshots.back();
    j["time"] = s.time;
    write_field_csv((fs::path(dir) / "rho.csv").string(), s.rho);
    files.push_back("rho.csv");
    for (int a = 0; a < s.m.dim(); ++a) {
      const std::string name = "m" + std::to_string(a) + ".csv";
      write_field_csv((fs::path(dir) / name).string(), s.m[a]);
      files.push_back(name);
    }
  } else {
    const LimitState& s = traj.limit_snapshots.back();
    j["time"] = s.time;
    write_field_csv((fs::path(dir) / "rho.csv").string(), s.rho);
    files.push_back("rho.csv");
  }
  j["fields"] = files;
  const std::string path = (fs::path(dir) / "checkpoint.json").string();
  write_json(path, j);
  return path;
}

void write_sweep_json(const std::string& path, const SweepReport& report,
                      const ExperimentConfig& config) {
  Json j;
  j["kind"] = "sweep";
  j["model"] = report.model;
  j["measure"] = report.measure;
  Json eps = Json::array(), sup = Json::array(), points = Json::array();
  for (const auto& p : report.points) {
    eps.push_back(p.eps);
    sup.push_back(p.ok ? Json(p.sup_value) : Json(nullptr));
    Json q;
    q["eps"] = p.eps;
    q["ok"] = p.ok;
    if (!p.error.empty()) q["error"] = p.error;
    q["sup"] = p.sup_value;
    q["steps"] = p.steps;
    q["cfl_warnings"] = p.cfl_warnings;
    q["mass_drift"] = p.mass_drift;
    q["max_energy_residual"] = p.max_energy_residual;
    q["energy_nonincreasing"] = p.energy_nonincreasing;
    if (p.inequality) {
      double worst = -INFINITY;
      for (std::size_t i = 0; i < p.inequality->t.size(); ++i)
        worst = std::max(worst, p.inequality->imbalance[i] - p.inequality->tolerance[i]);
      q["inequality_holds"] = p.inequality->holds();
      q["inequality_worst_margin"] = worst;
      q["ablation_violates"] = p.inequality->ablation_violates();
    }
    q["wall_seconds"] = p.wall_seconds;
    points.push_back(q);
  }
  j["eps"] = eps;
  j["sup_phi"] = sup;
  if (report.fit_ok) {
    j["slope"] = report.fit.slope;
    j["intercept"] = report.fit.intercept;
    j["r2"] = report.fit.r2;
  } else {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["r2"] = nullptr;
  }
  j["monotone"] = report.monotone;
  j["pass"] = report.pass;
  j["slope_range"] = {config.slope_min, config.slope_max};
  j["limit_mass_drift"] = report.limit_mass_drift;
  j["parameters"] = parameters(config);
  j["points"] = points;
  j["wall_seconds"] = report.wall_seconds;
  write_json(path, j);
}

void write_check_json(const std::string& path, const CheckReport& report) {
  Json j;
  j["kind"] = "check";
  j["model"] = report.model;
  Json items = Json::array();
  for (const auto& i : report.items) {
    Json q;
    q["name"] = i.name;
    q["pass"] = i.pass;
    q["value"] = i.value;
    q["threshold"] = i.threshold;
    if (!i.detail.empty()) q["detail"] = i.detail;
    items.push_back(q);
  }
  j["items"] = items;
  j["pass"] = report.all_pass();
  write_json(path, j);
}

void write_identity_json(const std::string& path, const InequalityReport& report, double eps,
                         const std::string& model) {
  Json j;
  j["kind"] = "identity";
  j["model"] = model;
  j["epsilon"] = eps;
  double worst = -INFINITY, max_abs = 0.0;
  for (std::size_t i = 0; i < report.t.size(); ++i) {
    worst = std::max(worst, report.imbalance[i] - report.tolerance[i]);
    max_abs = std::max(max_abs, std::abs(report.imbalance[i]));
  }
  j["max_abs_imbalance"] = max_abs;
  j["worst_margin"] = worst;
  j["final_lhs"] = report.lhs.back();
  j["final_rhs"] = report.rhs.back();
  j["ablation_violates"] = report.ablation_violates();
  j["pass"] = report.holds();
  write_json(path, j);
}

std::string format_sweep_table(const SweepReport& report) {
  std::ostringstream out;
  out << "model " << report.model << "  measure sup_t " << report.measure << '\n';
  out << "  eps          sup          steps    energy_res   mass_drift   ineq\n";
  for (const auto& p : report.points) {
    out << "  " << fmt(p.eps, "%-11.4g") << "  " << (p.ok ? fmt(p.sup_value) : "failed    ")
        << "  " << fmt(static_cast<double>(p.steps), "%7.0f") << "  "
        << fmt(p.max_energy_residual) << "  " << fmt(p.mass_drift) << "  "
        << (p.inequality ? (p.inequality->holds() ? "ok" : "VIOLATED") : "-") << '\n';
    if (!p.ok && !p.error.empty()) out << "    " << p.error << '\n';
  }
  if (report.fit_ok)
    out << "  slope " << fmt(report.fit.slope, "%.3f") << "  r2 " << fmt(report.fit.r2, "%.4f")
        << "  monotone " << (report.monotone ? "yes" : "no") << '\n';
  out << "  " << (report.pass ? "PASS" : "FAIL") << "  (" << fmt(report.wall_seconds, "%.1f")
      << " s)\n";
  return out.str();
}

std::string format_check_table(const CheckReport& report) {
  std::ostringstream out;
  out << "model " << report.model << '\n';
  for (const auto& i : report.items) {
    out << "  " << (i.pass ? "PASS " : "FAIL ") << i.name << "  " << fmt(i.value);
    if (!i.detail.empty()) out << "  " << i.detail;
    out << '\n';
  }
  return out.str();
}

std::string consolidate_reports(const std::string& dir, bool& all_pass) {
  if (!fs::is_directory(dir)) throw DomainError("report: not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    if (e.path().filename() == "report.json") continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  Json entries = Json::array();
  std::ostringstream table;
  all_pass = true;
  std::size_t counted = 0;
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error&) {
      continue;
    }
    if (!j.is_object() || !j.contains("kind")) continue;
    const std::string kind = j["kind"].get<std::string>();
    const bool pass = j.value("pass", false);
    all_pass = all_pass && pass;
    ++counted;
    Json e;
    e["file"] = fs::relative(f, dir).string();
    e["kind"] = kind;
    e["model"] = j.value("model", std::string("?"));
    e["pass"] = pass;
    std::string extra;
    if (kind == "sweep" && j["slope"].is_number()) {
      e["slope"] = j["slope"];
      e["r2"] = j["r2"];
      extra = "slope " + fmt(j["slope"].get<double>(), "%.3f") + " r2 " +
              fmt(j["r2"].get<double>(), "%.4f");
    } else if (kind == "identity") {
      e["worst_margin"] = j["worst_margin"];
      extra = "worst margin " + fmt(j["worst_margin"].is_number() ? j["worst_margin"].get<double>()
                                                                  : NAN);
    } else if (kind == "check") {
      std::size_t failed = 0;
      for (const auto& it : j["items"]) failed += it.value("pass", false) ? 0 : 1;
      e["failed_items"] = failed;
      extra = std::to_string(failed) + " failed item(s)";
    } else if (kind == "simulate") {
      e["steps"] = j.value("steps", 0);
      extra = std::to_string(j.value("steps", 0)) + " steps";
    }
    entries.push_back(e);
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %-9s %-16s %-40s %s\n", pass ? "PASS" : "FAIL",
                  kind.c_str(), e["model"].get<std::string>().c_str(),
                  e["file"].get<std::string>().c_str(), extra.c_str());
    table << line;
  }
  if (counted == 0) {
    all_pass = false;
    table << "no reports found under " << dir << '\n';
  }
  Json j;
  j["directory"] = dir;
  j["reports"] = entries;
  j["pass"] = all_pass;
  write_json((fs::path(dir) / "report.json").string(), j);
  return table.str();
}

}  // namespace relaxflow
