#pragma once

#include <span>

#include "relaxflow/energetics.hpp"
#include "relaxflow/field.hpp"

namespace relaxflow {

/// Solves -lap c + beta c = rho - <rho> on the torus; the solution always has
/// zero mean (the k = 0 mode is dropped, which is the normalisation for
/// beta = 0 and automatic for beta > 0).
ScalarField solve_screened_poisson(const ScalarField& rho, double beta, Spectral& ops);

/// ||-lap c + beta c - (rho - <rho>)||_2 / ||rho - <rho>||_2 (0 for uniform rho).
double solver_residual(const ScalarField& rho, const ScalarField& c, double beta, Spectral& ops);

/// |int (rho - <rho>) c - int (beta c^2 + |grad c|^2)|.
double energy_identity_residual(const ScalarField& rho, const ScalarField& c, double beta,
                                Spectral& ops);

/// int (beta |c - c_bar|^2 + |grad(c - c_bar)|^2) / ||rho - rho_bar||_q^2.
/// Returns 0 when rho == rho_bar. Rejects q outside the admissible range
/// (q >= 1 in 1D, q > 1 in 2D).
double elliptic_ratio(const ScalarField& rho, const ScalarField& rho_bar, double beta, double q,
                      Spectral& ops);

struct KEstimate {
  double k_hat = 0.0;
  std::size_t valid_samples = 0;
  std::size_t skipped_samples = 0;
};

/// Sampled lower bound for K in |int (rho-rho_bar)(c-c_bar)| <= K int h(rho|rho_bar):
/// the largest ratio over the samples. Samples with int h(rho|rho_bar) = 0 are
/// skipped; throws NumericalError when none remain.
KEstimate estimate_K(std::span<const ScalarField> samples, const ScalarField& rho_bar,
                     double beta, const GammaLaw& law, Spectral& ops);

struct ConvexityCheck {
  double k_hat = 0.0;
  double lambda_hat = 0.0;  // 1 - K C_x / 2
  bool holds = false;       // C_x < 2 / K
};

ConvexityCheck check_convexity(double k_hat, double chemosensitivity);

}  // namespace relaxflow
