#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relaxflow/field.hpp"

namespace relaxflow {

/// Densities at or below this floor are treated as vacuum; momentum must
/// vanish there.
inline constexpr double kDefaultRhoMin = 1e-8;

/// gamma-law gas: p = k rho^gamma, h = k/(gamma-1) rho^gamma, so that
/// rho h'' = p' and rho h' = p + h.
class GammaLaw {
 public:
  explicit GammaLaw(double k = 1.0, double gamma = 2.0);

  double k() const { return k_; }
  double gamma() const { return gamma_; }

  double pressure(double rho) const;
  double pressure_derivative(double rho) const;
  double pressure_second_derivative(double rho) const;
  double internal_energy(double rho) const;
  double internal_energy_derivative(double rho) const;
  double internal_energy_second_derivative(double rho) const;

  /// h(rho | rho_bar) = h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar),
  /// evaluated without cancellation when rho is close to rho_bar.
  double relative_internal_energy(double rho, double rho_bar) const;
  /// p(rho | rho_bar), same construction.
  double relative_pressure(double rho, double rho_bar) const;

  /// Constant A in |p''| <= A p'/rho.
  double curvature_bound() const { return std::abs(gamma_ - 1.0); }

 private:
  // (1+r)^gamma - 1 - gamma r for r >= -1.
  double taylor_remainder(double r) const;

  double k_;
  double gamma_;
};

ScalarField pressure(const GammaLaw& law, const ScalarField& rho);
ScalarField internal_energy(const GammaLaw& law, const ScalarField& rho);
ScalarField internal_energy_derivative(const GammaLaw& law, const ScalarField& rho);
double total_internal_energy(const GammaLaw& law, const ScalarField& rho);
ScalarField relative_internal_energy(const GammaLaw& law, const ScalarField& rho,
                                     const ScalarField& rho_bar);
double integrated_relative_internal_energy(const GammaLaw& law, const ScalarField& rho,
                                           const ScalarField& rho_bar);
ScalarField relative_pressure(const GammaLaw& law, const ScalarField& rho,
                              const ScalarField& rho_bar);

// ------------------------------------------------------------------ models

/// Euler with friction; optional confinement potential V(x) adds int rho V.
struct EulerModel {
  GammaLaw law;
  std::optional<ScalarField> confinement;
};

/// Euler-Poisson: E = int h(rho) - C_x/2 rho c with -lap c + beta c = rho - <rho>.
struct EulerPoissonModel {
  GammaLaw law;
  double chemosensitivity = 0.1;
  double screening = 0.0;
  /// Outcome of the sampled C_x < 2/K check, once it has been run.
  std::optional<bool> convexity_verified;
};

/// Euler-Korteweg: E = int h(rho) + C_kappa/2 |grad rho|^2.
struct EulerKortewegModel {
  GammaLaw law;
  double capillarity = 0.01;
};

enum class ModelKind { Euler, EulerPoisson, EulerKorteweg };

class EnergyModel {
 public:
  using Variant = std::variant<EulerModel, EulerPoissonModel, EulerKortewegModel>;

  EnergyModel(EulerModel m);
  EnergyModel(EulerPoissonModel m);
  EnergyModel(EulerKortewegModel m);

  static EnergyModel euler(GammaLaw law, std::optional<ScalarField> confinement = std::nullopt);
  static EnergyModel euler_poisson(GammaLaw law, double chemosensitivity, double screening);
  static EnergyModel euler_korteweg(GammaLaw law, double capillarity);

  ModelKind kind() const;
  std::string name() const;
  const GammaLaw& law() const;
  const Variant& variant() const { return v_; }

  bool needs_chemoattractant() const { return kind() == ModelKind::EulerPoisson; }
  double chemosensitivity() const;
  double screening() const;
  double capillarity() const;
  const ScalarField* confinement() const;

  void record_convexity_check(bool passed);
  std::optional<bool> convexity_verified() const;

 private:
  void validate() const;
  Variant v_;
};

/// E(rho) (plus int rho V with confinement). `c` must be the screened
/// Poisson solve of rho for Euler-Poisson and is ignored otherwise.
double potential_energy(const EnergyModel& model, const ScalarField& rho, Spectral& ops,
                        const ScalarField* c = nullptr);

/// delta E / delta rho including the confinement potential.
ScalarField variational_derivative(const EnergyModel& model, const ScalarField& rho,
                                   Spectral& ops, const ScalarField* c = nullptr);

/// delta E / delta rho of the contact part only (no confinement); this is
/// the generator balanced by the stress tensor.
ScalarField contact_variational_derivative(const EnergyModel& model, const ScalarField& rho,
                                           Spectral& ops, const ScalarField* c = nullptr);

/// For Euler-Poisson returns the chemoattractant of rho; empty otherwise.
std::optional<ScalarField> chemoattractant(const EnergyModel& model, const ScalarField& rho,
                                           Spectral& ops);

struct GateauxLadder {
  std::vector<double> taus;
  std::vector<double> residuals;           // |central difference - <dE, psi>|
  std::vector<double> relative_residuals;  // residual / max(|<dE, psi>|, tiny)
  double directional_derivative = 0.0;     // <dE/drho, psi>
  /// log(r_i / r_{i+1}) / log(tau_i / tau_{i+1}) for consecutive taus.
  std::vector<double> observed_rates() const;
};

/// Compares the central difference of E along psi with <dE/drho, psi>.
GateauxLadder gateaux_check(const EnergyModel& model, const ScalarField& rho,
                            const ScalarField& psi, const std::vector<double>& taus,
                            Spectral& ops);

/// u = m / rho with the vacuum policy: where rho <= rho_min momentum must be
/// exactly zero and u is set to zero.
VectorField velocity(const ScalarField& rho, const VectorField& m, double rho_min = kDefaultRhoMin);

double kinetic_energy(const ScalarField& rho, const VectorField& m,
                      double rho_min = kDefaultRhoMin);
/// 1/2 int rho |m/rho - m_bar/rho_bar|^2.
double relative_kinetic(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
                        const VectorField& m_bar, double rho_min = kDefaultRhoMin);

/// Euler: int h(rho|rho_bar); Euler-Poisson: minus C_x/2 int (rho-rho_bar)(c-c_bar);
/// Euler-Korteweg: plus C_kappa/2 int |grad(rho-rho_bar)|^2.
double relative_potential_energy(const EnergyModel& model, const ScalarField& rho,
                                 const ScalarField& rho_bar, Spectral& ops,
                                 const ScalarField* c = nullptr,
                                 const ScalarField* c_bar = nullptr);

/// q = 1/2 m |m|^2 / rho^2 + m h'(rho).
VectorField entropy_flux(const GammaLaw& law, const ScalarField& rho, const VectorField& m);

}  // namespace relaxflow
