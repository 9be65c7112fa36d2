#include "relaxflow/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace relaxflow {

ScalarField solve_screened_poisson(const ScalarField& rho, double beta, Spectral& ops) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw DomainError("screened poisson: beta must be non-negative");
  if (!rho.all_finite()) throw NumericalError("screened poisson: non-finite source");
  // the k = 0 mode is dropped, which both removes <rho> and fixes the mean of c
  return ops.apply_symbol(rho, [beta](double kx, double ky) -> Spectral::Complex {
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) return 0.0;
    return 1.0 / (k2 + beta);
  });
}

double solver_residual(const ScalarField& rho, const ScalarField& c, double beta, Spectral& ops) {
  require_same_grid(rho.grid(), c.grid(), "solver_residual");
  const ScalarField src = rho + (-mean(rho));
  const double denom = l2_norm(src);
  // a uniform rho leaves only the rounding of its mean
  if (denom <= 1e-14 * l2_norm(rho)) return l2_norm(c);
  const ScalarField r = -ops.laplacian(c) + beta * c - src;
  return l2_norm(r) / denom;
}

double energy_identity_residual(const ScalarField& rho, const ScalarField& c, double beta,
                                Spectral& ops) {
  require_same_grid(rho.grid(), c.grid(), "energy_identity_residual");
  const double lhs = integral((rho + (-mean(rho))) * c);
  const double rhs = beta * integral(c * c) + integral(ops.gradient(c).norm_squared());
  return std::abs(lhs - rhs);
}

double elliptic_ratio(const ScalarField& rho, const ScalarField& rho_bar, double beta, double q,
                      Spectral& ops) {
  require_same_grid(rho.grid(), rho_bar.grid(), "elliptic_ratio");
  const int dim = rho.grid().dim();
  const bool admissible = (dim == 1) ? q >= 1.0 : q > 1.0;
  if (!admissible || std::isnan(q))
    throw DomainError("elliptic_ratio: exponent q outside the admissible range");
  const ScalarField d = rho - rho_bar;
  const double nq = lq_norm(d, q);
  if (nq == 0.0) return 0.0;
  const ScalarField dc = solve_screened_poisson(d, beta, ops);
  const double num = beta * integral(dc * dc) + integral(ops.gradient(dc).norm_squared());
  return num / (nq * nq);
}

KEstimate estimate_K(std::span<const ScalarField> samples, const ScalarField& rho_bar,
                     double beta, const GammaLaw& law, Spectral& ops) {
  KEstimate out;
  for (const ScalarField& rho : samples) {
    require_same_grid(rho.grid(), rho_bar.grid(), "estimate_K");
    const double hrel = integrated_relative_internal_energy(law, rho, rho_bar);
    if (!(hrel > 0.0)) {
      ++out.skipped_samples;
      continue;
    }
    const ScalarField d = rho - rho_bar;
    const ScalarField dc = solve_screened_poisson(d, beta, ops);
    const double ratio = std::abs(integral(d * dc)) / hrel;
    if (!std::isfinite(ratio)) throw NumericalError("estimate_K: non-finite ratio");
    out.k_hat = std::max(out.k_hat, ratio);
    ++out.valid_samples;
  }
  if (out.valid_samples == 0) throw NumericalError("estimate_K: no sample with positive energy");
  return out;
}

ConvexityCheck check_convexity(double k_hat, double chemosensitivity) {
  if (!(k_hat >= 0.0) || !(chemosensitivity >= 0.0))
    throw DomainError("check_convexity: negative constant");
  ConvexityCheck out;
  out.k_hat = k_hat;
  out.lambda_hat = 1.0 - 0.5 * k_hat * chemosensitivity;
  out.holds = out.lambda_hat > 0.0;
  return out;
}

}  // namespace relaxflow
