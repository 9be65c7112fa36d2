#include "relaxflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace relaxflow {

namespace pt = boost::property_tree;

std::string to_string(MomentumPrep prep) {
  switch (prep) {
    case MomentumPrep::Zero: return "zero";
    case MomentumPrep::Equilibrium: return "equilibrium";
    case MomentumPrep::Perturbed: return "perturbed";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// accepts plain numbers plus "pi" and "<c>pi" for lengths
double parse_real(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  constexpr double pi = kTwoPi / 2.0;
  try {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      const std::string head = trim(s.substr(0, s.size() - 2));
      if (head.empty()) return pi;
      std::size_t used = 0;
      const double c = std::stod(head, &used);
      if (used != head.size()) throw std::invalid_argument(s);
      return c * pi;
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + s + "'");
  }
}

long parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_real(key, item));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"grid",
       {{"dim", [&](auto& k, auto& v) { c.dim = static_cast<int>(parse_int(k, v)); }},
        {"n", [&](auto& k, auto& v) { c.n = static_cast<int>(parse_int(k, v)); }},
        {"length", [&](auto& k, auto& v) { c.length = parse_real(k, v); }}}},
      {"model",
       {{"variant", [&](auto&, auto& v) { c.model = trim(v); }},
        {"k", [&](auto& k, auto& v) { c.k = parse_real(k, v); }},
        {"gamma", [&](auto& k, auto& v) { c.gamma = parse_real(k, v); }},
        {"chemosensitivity", [&](auto& k, auto& v) { c.chemosensitivity = parse_real(k, v); }},
        {"screening", [&](auto& k, auto& v) { c.screening = parse_real(k, v); }},
        {"capillarity", [&](auto& k, auto& v) { c.capillarity = parse_real(k, v); }},
        {"confinement", [&](auto&, auto& v) { c.confinement = trim(v); }},
        {"confinement_strength",
         [&](auto& k, auto& v) { c.confinement_strength = parse_real(k, v); }}}},
      {"time",
       {{"final_time", [&](auto& k, auto& v) { c.final_time = parse_real(k, v); }},
        {"dt", [&](auto& k, auto& v) { c.dt = parse_real(k, v); }},
        {"limit_dt", [&](auto& k, auto& v) { c.limit_dt = parse_real(k, v); }},
        {"cfl_safety", [&](auto& k, auto& v) { c.cfl_safety = parse_real(k, v); }},
        {"stiff_ratio", [&](auto& k, auto& v) { c.stiff_ratio = parse_real(k, v); }},
        {"relax_scheme", [&](auto&, auto& v) { c.relax_scheme = trim(v); }},
        {"limit_scheme", [&](auto&, auto& v) { c.limit_scheme = trim(v); }},
        {"output_interval", [&](auto& k, auto& v) { c.output_interval = parse_real(k, v); }},
        {"layer_fraction", [&](auto& k, auto& v) { c.layer_fraction = parse_real(k, v); }}}},
      {"initial",
       {{"profile", [&](auto&, auto& v) { c.profile = trim(v); }},
        {"amplitude", [&](auto& k, auto& v) { c.amplitude = parse_real(k, v); }},
        {"rho_inf", [&](auto& k, auto& v) { c.rho_inf = parse_real(k, v); }},
        {"momentum",
         [&](auto& k, auto& v) {
           const std::string s = trim(v);
           if (s == "zero") c.prep = MomentumPrep::Zero;
           else if (s == "equilibrium") c.prep = MomentumPrep::Equilibrium;
           else if (s == "perturbed") c.prep = MomentumPrep::Perturbed;
           else throw ConfigError("config: '" + k + "' must be zero, equilibrium or perturbed");
         }},
        {"seed",
         [&](auto& k, auto& v) {
           const long s = parse_int(k, v);
           if (s < 0) throw ConfigError("config: seed must be non-negative");
           c.seed = static_cast<std::uint64_t>(s);
         }},
        {"perturbation", [&](auto& k, auto& v) { c.perturbation = parse_real(k, v); }},
        {"epsilon", [&](auto& k, auto& v) { c.epsilon = parse_real(k, v); }},
        {"rho_min", [&](auto& k, auto& v) { c.rho_min = parse_real(k, v); }}}},
      {"sweep",
       {{"eps", [&](auto& k, auto& v) { c.eps_list = parse_list(k, v); }},
        {"slope_min", [&](auto& k, auto& v) { c.slope_min = parse_real(k, v); }},
        {"slope_max", [&](auto& k, auto& v) { c.slope_max = parse_real(k, v); }},
        {"r2_min", [&](auto& k, auto& v) { c.r2_min = parse_real(k, v); }}}},
      {"output",
       {{"directory", [&](auto&, auto& v) { c.out_dir = trim(v); }},
        {"cadence", [&](auto& k, auto& v) { c.cadence = static_cast<int>(parse_int(k, v)); }},
        {"workers", [&](auto& k, auto& v) { c.workers = static_cast<int>(parse_int(k, v)); }}}},
  };

  for (const auto& [section, body] : tree) {
    const auto sec = keys.find(section);
    if (sec == keys.end()) {
      if (body.empty() && !body.data().empty())
        throw ConfigError("config: key '" + section + "' outside any section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end())
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      setter->second(section + "." + key, value.data());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (dim != 1 && dim != 2) fail("grid.dim must be 1 or 2");
  if (n < 4 || n % 2 != 0) fail("grid.n must be an even number >= 4");
  if (!(length > 0.0) || !std::isfinite(length)) fail("grid.length must be positive");
  static const std::set<std::string> models{"euler", "euler_poisson", "euler_korteweg"};
  if (!models.count(model)) fail("model.variant must be euler, euler_poisson or euler_korteweg");
  if (!(k > 0.0)) fail("model.k must be positive");
  if (!(gamma > 1.0)) fail("model.gamma must exceed 1");
  if (!(chemosensitivity >= 0.0)) fail("model.chemosensitivity must be non-negative");
  if (!(screening >= 0.0)) fail("model.screening must be non-negative");
  if (!(capillarity > 0.0)) fail("model.capillarity must be positive");
  if (confinement != "none" && confinement != "cosine")
    fail("model.confinement must be none or cosine");
  if (confinement != "none" && model != "euler")
    fail("model.confinement only applies to the euler variant");
  if (!(final_time > 0.0)) fail("time.final_time must be positive");
  if (!(dt >= 0.0) || !(limit_dt >= 0.0)) fail("time steps must be non-negative");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail("time.cfl_safety must lie in (0, 1]");
  if (relax_scheme != "etd3" && relax_scheme != "if_ssprk3")
    fail("time.relax_scheme must be etd3 or if_ssprk3");
  if (limit_scheme != "auto" && limit_scheme != "rk4" && limit_scheme != "semi_implicit")
    fail("time.limit_scheme must be auto, rk4 or semi_implicit");
  if (!(output_interval > 0.0) || output_interval > final_time)
    fail("time.output_interval must lie in (0, final_time]");
  const double ratio = final_time / output_interval;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    fail("time.output_interval must divide final_time");
  if (!(layer_fraction >= 0.0)) fail("time.layer_fraction must be non-negative");
  if (profile != "cosine") fail("initial.profile must be cosine");
  if (!(rho_inf > 0.0)) fail("initial.rho_inf must be positive");
  if (!(std::abs(amplitude) < rho_inf)) fail("initial.amplitude must be smaller than rho_inf");
  if (!(perturbation >= 0.0)) fail("initial.perturbation must be non-negative");
  if (!(epsilon > 0.0)) fail("initial.epsilon must be positive");
  if (!(rho_min > 0.0)) fail("initial.rho_min must be positive");
  if (eps_list.empty()) fail("sweep.eps must list at least one value");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) fail("sweep.eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) fail("sweep.eps must be strictly decreasing");
  }
  if (!(slope_min < slope_max)) fail("sweep.slope_min must be below slope_max");
  if (cadence < 1) fail("output.cadence must be >= 1");
  if (workers < 1) fail("output.workers must be >= 1");
}

}  // namespace relaxflow
