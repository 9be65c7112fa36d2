#pragma once

#include <string>
#include <vector>

#include "relaxflow/dynamics.hpp"
#include "relaxflow/energetics.hpp"
#include "relaxflow/field.hpp"

namespace relaxflow {

/// int h(rho|rho_bar) + 1/2 rho |u - u_bar|^2.
double phi(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
           const VectorField& m_bar, const GammaLaw& law, double rho_min = kDefaultRhoMin);

/// phi + C_kappa/2 ||grad(rho - rho_bar)||^2.
double psi(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
           const VectorField& m_bar, const GammaLaw& law, double capillarity, Spectral& ops,
           double rho_min = kDefaultRhoMin);

/// phi - C_x/2 int (rho - rho_bar)(c - c_bar). c and c_bar must solve the
/// screened Poisson problem for rho and rho_bar (checked to 1e-8).
double ep_relative_total(const ScalarField& rho, const VectorField& m, const ScalarField& c,
                         const ScalarField& rho_bar, const VectorField& m_bar,
                         const ScalarField& c_bar, const GammaLaw& law, double chemosensitivity,
                         double screening, Spectral& ops, double rho_min = kDefaultRhoMin);

/// Relative energy of the model: the relative potential energy plus the
/// relative kinetic energy. Equals phi (Euler), ep_relative_total
/// (Euler-Poisson) or psi (Euler-Korteweg).
double model_relative_energy(const EnergyModel& model, const ScalarField& rho,
                             const VectorField& m, const ScalarField& rho_bar,
                             const VectorField& m_bar, Spectral& ops,
                             double rho_min = kDefaultRhoMin);

/// S(rho) - S(rho_bar) - dS(rho_bar)[rho - rho_bar]. For Euler-Korteweg the
/// derivative is assembled term by term from the stress.
TensorField relative_stress(const EnergyModel& model, const ScalarField& rho,
                            const ScalarField& rho_bar, Spectral& ops);

/// Closed quadratic form of the relative stress, an independent assembly
/// used to cross-check relative_stress.
TensorField relative_stress_quadratic(const EnergyModel& model, const ScalarField& rho,
                                      const ScalarField& rho_bar, Spectral& ops);

/// Per-interval imbalance of a relative energy identity between snapshots.
struct IdentityResidual {
  std::vector<double> t;         // interval midpoints
  std::vector<double> residual;  // signed imbalance (rate units)
  std::vector<double> scale;     // magnitude of the dominant term per interval
  std::vector<double> dt;        // interval lengths

  double max_abs() const;
  /// sum |residual| dt
  double integrated_abs() const;
  /// sum scale dt
  double integrated_scale() const;
};

/// Relative energy identity between two relaxation trajectories of one
/// model with matching snapshot times.
IdentityResidual reltote_residual(const Trajectory& a, const Trajectory& b,
                                  const EnergyModel& model, double eps, Spectral& ops);

/// Columns of the relaxation-vs-limit inequality at each snapshot time.
struct InequalityReport {
  std::vector<double> t;
  std::vector<double> lhs;          // relative energy at t
  std::vector<double> rhs;          // lhs(0) + int_0^t (terms)
  std::vector<double> dissipation;  // eps^-2 int rho |u - u_bar|^2
  std::vector<double> stress_term;  // (1/eps) int grad u_bar : S(rho|rho_bar)
  std::vector<double> convection_term;  // -(1/eps) int rho grad u_bar : (u-u_bar)(x)(u-u_bar)
  std::vector<double> error_term;       // -int (rho/rho_bar) e_bar . (u - u_bar)
  std::vector<double> imbalance;        // lhs - rhs
  std::vector<double> tolerance;        // quadrature estimate
  std::vector<double> ablated_imbalance;  // lhs - rhs with the dissipation removed

  /// lhs <= rhs + tolerance at every time.
  bool holds() const;
  /// The ablated identity misses by more than `factor` times the tolerance somewhere.
  bool ablation_violates(double factor = 10.0) const;
  void write_csv(const std::string& path) const;
};

InequalityReport relax_limit_inequality_residual(const Trajectory& relax, const Trajectory& limit,
                                                 const EnergyModel& model, double eps,
                                                 Spectral& ops);

/// d/dt E(rho|rho_bar) + int rho |grad(mu - mu_bar)|^2 + int S(rho|rho_bar) : grad^2 mu_bar
/// between two limit trajectories.
IdentityResidual gradflow_relent_residual(const Trajectory& a, const Trajectory& b,
                                          const EnergyModel& model, Spectral& ops);

/// Dissipation part of the gradient-flow identity per interval (trapezoid),
/// for normalising gradflow_relent_residual.
std::vector<double> gradflow_dissipation(const Trajectory& a, const Trajectory& b,
                                         const EnergyModel& model, Spectral& ops);

/// Quadratic Wasserstein distance of two 1D densities of equal mass, using
/// the quantile functions of the piecewise-constant cell densities on [0, L).
double wasserstein2_1d(const ScalarField& rho, const ScalarField& rho_bar);

}  // namespace relaxflow
