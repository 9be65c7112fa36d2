#include "relaxflow/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relaxflow/elliptic.hpp"

namespace relaxflow {

GammaLaw::GammaLaw(double k, double gamma) : k_(k), gamma_(gamma) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("gamma law: k must be positive");
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw DomainError("gamma law: gamma must exceed 1");
}

double GammaLaw::pressure(double rho) const { return k_ * std::pow(rho, gamma_); }

double GammaLaw::pressure_derivative(double rho) const {
  return k_ * gamma_ * std::pow(rho, gamma_ - 1.0);
}

double GammaLaw::pressure_second_derivative(double rho) const {
  return k_ * gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0);
}

double GammaLaw::internal_energy(double rho) const {
  return k_ / (gamma_ - 1.0) * std::pow(rho, gamma_);
}

double GammaLaw::internal_energy_derivative(double rho) const {
  return k_ * gamma_ / (gamma_ - 1.0) * std::pow(rho, gamma_ - 1.0);
}

double GammaLaw::internal_energy_second_derivative(double rho) const {
  return k_ * gamma_ * std::pow(rho, gamma_ - 2.0);
}

double GammaLaw::taylor_remainder(double r) const {
  if (std::abs(r) < 0.1) {
    // binomial series from the quadratic term on; |r| < 0.1 gives fast decay
    double coeff = gamma_ * (gamma_ - 1.0) / 2.0;
    double power = r * r;
    double sum = 0.0;
    for (int j = 2; j < 64; ++j) {
      const double term = coeff * power;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coeff *= (gamma_ - j) / (j + 1);
      power *= r;
    }
    return sum;
  }
  return std::expm1(gamma_ * std::log1p(r)) - gamma_ * r;
}

double GammaLaw::relative_internal_energy(double rho, double rho_bar) const {
  if (!(rho >= 0.0)) throw DomainError("relative energy: negative density");
  if (!(rho_bar > 0.0)) throw DomainError("relative energy: reference density must be positive");
  const double r = (rho - rho_bar) / rho_bar;
  return k_ / (gamma_ - 1.0) * std::pow(rho_bar, gamma_) * taylor_remainder(r);
}

double GammaLaw::relative_pressure(double rho, double rho_bar) const {
  if (!(rho >= 0.0)) throw DomainError("relative pressure: negative density");
  if (!(rho_bar > 0.0)) throw DomainError("relative pressure: reference density must be positive");
  const double r = (rho - rho_bar) / rho_bar;
  return k_ * std::pow(rho_bar, gamma_) * taylor_remainder(r);
}

namespace {

void require_nonnegative(const ScalarField& rho, const char* where) {
  for (double v : rho.values()) {
    if (!(v >= 0.0)) throw DomainError(std::string(where) + ": negative or non-finite density");
  }
}

}  // namespace

ScalarField pressure(const GammaLaw& law, const ScalarField& rho) {
  require_nonnegative(rho, "pressure");
  return rho.map([&](double r) { return law.pressure(r); });
}

ScalarField internal_energy(const GammaLaw& law, const ScalarField& rho) {
  require_nonnegative(rho, "internal_energy");
  return rho.map([&](double r) { return law.internal_energy(r); });
}

ScalarField internal_energy_derivative(const GammaLaw& law, const ScalarField& rho) {
  require_nonnegative(rho, "internal_energy_derivative");
  return rho.map([&](double r) { return law.internal_energy_derivative(r); });
}

double total_internal_energy(const GammaLaw& law, const ScalarField& rho) {
  return integral(internal_energy(law, rho));
}

ScalarField relative_internal_energy(const GammaLaw& law, const ScalarField& rho,
                                     const ScalarField& rho_bar) {
  require_same_grid(rho.grid(), rho_bar.grid(), "relative_internal_energy");
  ScalarField out(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out[i] = law.relative_internal_energy(rho[i], rho_bar[i]);
  return out;
}

double integrated_relative_internal_energy(const GammaLaw& law, const ScalarField& rho,
                                           const ScalarField& rho_bar) {
  return integral(relative_internal_energy(law, rho, rho_bar));
}

ScalarField relative_pressure(const GammaLaw& law, const ScalarField& rho,
                              const ScalarField& rho_bar) {
  require_same_grid(rho.grid(), rho_bar.grid(), "relative_pressure");
  ScalarField out(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out[i] = law.relative_pressure(rho[i], rho_bar[i]);
  return out;
}

// ------------------------------------------------------------------ models

EnergyModel::EnergyModel(EulerModel m) : v_(std::move(m)) { validate(); }
EnergyModel::EnergyModel(EulerPoissonModel m) : v_(std::move(m)) { validate(); }
EnergyModel::EnergyModel(EulerKortewegModel m) : v_(std::move(m)) { validate(); }

EnergyModel EnergyModel::euler(GammaLaw law, std::optional<ScalarField> confinement) {
  return EnergyModel(EulerModel{law, std::move(confinement)});
}

EnergyModel EnergyModel::euler_poisson(GammaLaw law, double chemosensitivity, double screening) {
  return EnergyModel(EulerPoissonModel{law, chemosensitivity, screening, std::nullopt});
}

EnergyModel EnergyModel::euler_korteweg(GammaLaw law, double capillarity) {
  return EnergyModel(EulerKortewegModel{law, capillarity});
}

void EnergyModel::validate() const {
  if (const auto* ep = std::get_if<EulerPoissonModel>(&v_)) {
    if (!(ep->chemosensitivity >= 0.0) || !std::isfinite(ep->chemosensitivity))
      throw DomainError("euler-poisson: chemosensitivity must be non-negative");
    if (!(ep->screening >= 0.0) || !std::isfinite(ep->screening))
      throw DomainError("euler-poisson: screening must be non-negative");
  } else if (const auto* ek = std::get_if<EulerKortewegModel>(&v_)) {
    if (!(ek->capillarity > 0.0) || !std::isfinite(ek->capillarity))
      throw DomainError("euler-korteweg: capillarity must be positive");
  } else if (const auto* eu = std::get_if<EulerModel>(&v_)) {
    if (eu->confinement && !eu->confinement->all_finite())
      throw DomainError("euler: confinement potential must be finite");
  }
}

ModelKind EnergyModel::kind() const {
  switch (v_.index()) {
    case 0: return ModelKind::Euler;
    case 1: return ModelKind::EulerPoisson;
    default: return ModelKind::EulerKorteweg;
  }
}

std::string EnergyModel::name() const {
  switch (kind()) {
    case ModelKind::Euler: return "euler";
    case ModelKind::EulerPoisson: return "euler_poisson";
    case ModelKind::EulerKorteweg: return "euler_korteweg";
  }
  return "unknown";
}

const GammaLaw& EnergyModel::law() const {
  return std::visit([](const auto& m) -> const GammaLaw& { return m.law; }, v_);
}

double EnergyModel::chemosensitivity() const {
  const auto* ep = std::get_if<EulerPoissonModel>(&v_);
  return ep ? ep->chemosensitivity : 0.0;
}

double EnergyModel::screening() const {
  const auto* ep = std::get_if<EulerPoissonModel>(&v_);
  return ep ? ep->screening : 0.0;
}

double EnergyModel::capillarity() const {
  const auto* ek = std::get_if<EulerKortewegModel>(&v_);
  return ek ? ek->capillarity : 0.0;
}

const ScalarField* EnergyModel::confinement() const {
  const auto* eu = std::get_if<EulerModel>(&v_);
  return (eu && eu->confinement) ? &*eu->confinement : nullptr;
}

void EnergyModel::record_convexity_check(bool passed) {
  auto* ep = std::get_if<EulerPoissonModel>(&v_);
  if (!ep) throw DomainError("convexity check only applies to euler-poisson");
  ep->convexity_verified = passed;
}

std::optional<bool> EnergyModel::convexity_verified() const {
  const auto* ep = std::get_if<EulerPoissonModel>(&v_);
  return ep ? ep->convexity_verified : std::nullopt;
}

std::optional<ScalarField> chemoattractant(const EnergyModel& model, const ScalarField& rho,
                                           Spectral& ops) {
  if (!model.needs_chemoattractant()) return std::nullopt;
  return solve_screened_poisson(rho, model.screening(), ops);
}

namespace {

// c if supplied, otherwise a fresh solve
ScalarField resolve_c(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                      const ScalarField* c) {
  if (c) {
    require_same_grid(rho.grid(), c->grid(), "chemoattractant");
    return *c;
  }
  return solve_screened_poisson(rho, model.screening(), ops);
}

}  // namespace

double potential_energy(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                        const ScalarField* c) {
  double e = total_internal_energy(model.law(), rho);
  switch (model.kind()) {
    case ModelKind::Euler:
      if (const auto* v = model.confinement()) e += integral(rho * *v);
      break;
    case ModelKind::EulerPoisson: {
      const ScalarField cc = resolve_c(model, rho, ops, c);
      e -= 0.5 * model.chemosensitivity() * integral(rho * cc);
      break;
    }
    case ModelKind::EulerKorteweg:
      e += 0.5 * model.capillarity() * integral(ops.gradient(rho).norm_squared());
      break;
  }
  return e;
}

ScalarField contact_variational_derivative(const EnergyModel& model, const ScalarField& rho,
                                           Spectral& ops, const ScalarField* c) {
  ScalarField mu = internal_energy_derivative(model.law(), rho);
  switch (model.kind()) {
    case ModelKind::Euler: break;
    case ModelKind::EulerPoisson: {
      const ScalarField cc = resolve_c(model, rho, ops, c);
      mu -= model.chemosensitivity() * cc;
      break;
    }
    case ModelKind::EulerKorteweg:
      mu -= model.capillarity() * ops.laplacian(rho);
      break;
  }
  return mu;
}

ScalarField variational_derivative(const EnergyModel& model, const ScalarField& rho,
                                   Spectral& ops, const ScalarField* c) {
  ScalarField mu = contact_variational_derivative(model, rho, ops, c);
  if (const auto* v = model.confinement()) mu += *v;
  return mu;
}

std::vector<double> GateauxLadder::observed_rates() const {
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
    rates.push_back(std::log(residuals[i] / residuals[i + 1]) / std::log(taus[i] / taus[i + 1]));
  }
  return rates;
}

GateauxLadder gateaux_check(const EnergyModel& model, const ScalarField& rho,
                            const ScalarField& psi, const std::vector<double>& taus,
                            Spectral& ops) {
  require_same_grid(rho.grid(), psi.grid(), "gateaux_check");
  GateauxLadder out;
  out.taus = taus;
  out.directional_derivative = integral(variational_derivative(model, rho, ops) * psi);
  const double scale = std::max(std::abs(out.directional_derivative),
                                std::numeric_limits<double>::min());
  for (double tau : taus) {
    if (!(tau > 0.0)) throw DomainError("gateaux_check: tau must be positive");
    const double ep = potential_energy(model, rho + tau * psi, ops);
    const double em = potential_energy(model, rho - tau * psi, ops);
    const double r = std::abs((ep - em) / (2.0 * tau) - out.directional_derivative);
    out.residuals.push_back(r);
    out.relative_residuals.push_back(r / scale);
  }
  return out;
}

VectorField velocity(const ScalarField& rho, const VectorField& m, double rho_min) {
  require_same_grid(rho.grid(), m.grid(), "velocity");
  VectorField u(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0)) throw DomainError("velocity: negative or non-finite density");
    if (rho[i] <= rho_min) {
      for (int a = 0; a < m.dim(); ++a) {
        if (m[a][i] != 0.0) throw DomainError("velocity: momentum in vacuum region");
      }
      continue;
    }
    for (int a = 0; a < m.dim(); ++a) u[a][i] = m[a][i] / rho[i];
  }
  return u;
}

double kinetic_energy(const ScalarField& rho, const VectorField& m, double rho_min) {
  const VectorField u = velocity(rho, m, rho_min);
  return 0.5 * integral(rho * u.norm_squared());
}

double relative_kinetic(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
                        const VectorField& m_bar, double rho_min) {
  const VectorField u = velocity(rho, m, rho_min);
  const VectorField u_bar = velocity(rho_bar, m_bar, rho_min);
  return 0.5 * integral(rho * (u - u_bar).norm_squared());
}

double relative_potential_energy(const EnergyModel& model, const ScalarField& rho,
                                 const ScalarField& rho_bar, Spectral& ops,
                                 const ScalarField* c, const ScalarField* c_bar) {
  double e = integrated_relative_internal_energy(model.law(), rho, rho_bar);
  const ScalarField d = rho - rho_bar;
  switch (model.kind()) {
    case ModelKind::Euler: break;  // the confinement term is linear and drops out
    case ModelKind::EulerPoisson: {
      // the solve is linear, so c - c_bar can be taken directly when either is missing
      ScalarField dc = (c && c_bar) ? *c - *c_bar
                                    : solve_screened_poisson(d, model.screening(), ops);
      e -= 0.5 * model.chemosensitivity() * integral(d * dc);
      break;
    }
    case ModelKind::EulerKorteweg:
      e += 0.5 * model.capillarity() * integral(ops.gradient(d).norm_squared());
      break;
  }
  return e;
}

VectorField entropy_flux(const GammaLaw& law, const ScalarField& rho, const VectorField& m) {
  const VectorField u = velocity(rho, m);
  const ScalarField hp = internal_energy_derivative(law, rho);
  const ScalarField coeff = 0.5 * u.norm_squared() + hp;
  return coeff * m;
}

}  // namespace relaxflow
