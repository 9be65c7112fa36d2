#include <gtest/gtest.h>

#include <cmath>

#include "relaxflow/elliptic.hpp"
#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace relaxflow;

namespace {

constexpr double kPi = kTwoPi / 2.0;

ScalarField cosine(const TorusGrid& g, double base, double amp, int mode = 1) {
  return ScalarField::from_function(g, [=](double x, double) {
    return base + amp * std::cos(mode * x);
  });
}

}  // namespace

TEST(ScreenedPoisson, Eigenfunctions) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  const ScalarField c1 = solve_screened_poisson(cosine(g, 1.0, 1.0), 1.0, ops);
  EXPECT_LT(test::max_abs_diff(c1, cosine(g, 0.0, 0.5)), 1e-14);
  const ScalarField c2 = solve_screened_poisson(cosine(g, 2.0, 1.0, 2), 0.0, ops);
  EXPECT_LT(test::max_abs_diff(c2, cosine(g, 0.0, 0.25, 2)), 1e-14);
}

TEST(ScreenedPoisson, MatchesDenseCollocationSolve) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  for (double beta : {0.0, 0.3, 1.0}) {
    // full spectrum including the Nyquist mode
    ScalarField rho = test::random_band_limited(g, 5, 15, 1.0, 1.0);
    for (int i = 0; i < 32; ++i) rho[i] += 0.05 * (i % 2 == 0 ? 1.0 : -1.0);
    const ScalarField c = solve_screened_poisson(rho, beta, ops);
    const Eigen::VectorXd oracle = test::dense_screened_poisson(rho, beta);
    double err = 0.0;
    for (int i = 0; i < 32; ++i) err = std::max(err, std::abs(c[i] - oracle[i]));
    EXPECT_LE(err, 1e-10) << "beta=" << beta;
  }
}

TEST(ScreenedPoisson, ResidualAndZeroMean) {
  for (int dim : {1, 2}) {
    const TorusGrid g(dim, 32);
    Spectral ops(g);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const ScalarField rho = test::random_band_limited(g, seed, 6, 0.3, 1.0);
      for (double beta : {0.0, 1.0, 4.0}) {
        const ScalarField c = solve_screened_poisson(rho, beta, ops);
        EXPECT_LE(solver_residual(rho, c, beta, ops), 1e-10);
        EXPECT_LE(std::abs(mean(c)), 1e-14);
      }
    }
  }
}

TEST(ScreenedPoisson, RejectsNegativeScreening) {
  const TorusGrid g(1, 16);
  Spectral ops(g);
  EXPECT_THROW(solve_screened_poisson(ScalarField(g, 1.0), -1.0, ops), DomainError);
}

TEST(EnergyIdentity, AnalyticAndRandomCases) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const ScalarField uni(g, 2.0);
  EXPECT_EQ(energy_identity_residual(uni, solve_screened_poisson(uni, 1.0, ops), 1.0, ops), 0.0);

  const ScalarField rho = cosine(g, 1.0, 1.0);
  const ScalarField c = solve_screened_poisson(rho, 1.0, ops);
  EXPECT_NEAR(integral((rho + -1.0) * c), kPi / 2.0, 1e-13);
  EXPECT_LT(energy_identity_residual(rho, c, 1.0, ops), 1e-12);

  for (int dim : {1, 2}) {
    const TorusGrid g2(dim, 32);
    Spectral ops2(g2);
    for (unsigned seed = 11; seed < 16; ++seed) {
      const ScalarField r = test::random_band_limited(g2, seed, 8, 0.5, 1.0);
      for (double beta : {0.0, 1.0}) {
        const ScalarField cc = solve_screened_poisson(r, beta, ops2);
        const double scale = integral(ops2.gradient(cc).norm_squared()) + beta * integral(cc * cc);
        EXPECT_LE(energy_identity_residual(r, cc, beta, ops2), 1e-10 * scale);
      }
    }
  }
}

TEST(EllipticRatio, Values) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const ScalarField rb = cosine(g, 1.0, 0.3, 2);
  EXPECT_EQ(elliptic_ratio(rb, rb, 0.0, 2.0, ops), 0.0);
  // c - c_bar = cos x: int |grad|^2 = pi, ||cos||_2^2 = pi
  EXPECT_NEAR(elliptic_ratio(rb + cosine(g, 0.0, 1.0), rb, 0.0, 2.0, ops), 1.0, 1e-12);
  // with beta = 1 the mode is damped by 1 / (1 + beta)
  EXPECT_NEAR(elliptic_ratio(rb + cosine(g, 0.0, 1.0), rb, 1.0, 2.0, ops), 0.5, 1e-12);
}

TEST(EllipticRatio, ExponentAdmissibility) {
  const TorusGrid g1(1, 32), g2(2, 16);
  Spectral o1(g1), o2(g2);
  const ScalarField a1 = cosine(g1, 1.0, 0.2), b1(g1, 1.0);
  EXPECT_NO_THROW(elliptic_ratio(a1, b1, 0.0, 1.0, o1));
  EXPECT_THROW(elliptic_ratio(a1, b1, 0.0, 0.5, o1), DomainError);
  const ScalarField a2 = cosine(g2, 1.0, 0.2), b2(g2, 1.0);
  EXPECT_THROW(elliptic_ratio(a2, b2, 0.0, 1.0, o2), DomainError);
  EXPECT_NO_THROW(elliptic_ratio(a2, b2, 0.0, 1.5, o2));
}

TEST(EstimateK, SingleModeAnalytic) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField rb(g, 1.0);
  // int (rho - rho_bar)(c - c_bar) = 0.01 pi and int h_rel = 0.01 pi for beta = 0
  const std::vector<ScalarField> s{cosine(g, 1.0, 0.1)};
  const KEstimate k0 = estimate_K(s, rb, 0.0, law, ops);
  EXPECT_NEAR(k0.k_hat, 1.0, 1e-12);
  EXPECT_EQ(k0.valid_samples, 1u);
  EXPECT_NEAR(estimate_K(s, rb, 1.0, law, ops).k_hat, 0.5, 1e-12);
}

TEST(EstimateK, IdenticalSamplesRejectedAndMaxIsMonotone) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField rb = cosine(g, 1.0, 0.2);
  const std::vector<ScalarField> same{rb, rb};
  EXPECT_THROW(estimate_K(same, rb, 1.0, law, ops), NumericalError);

  std::vector<ScalarField> samples;
  double prev = 0.0;
  for (unsigned seed = 1; seed <= 8; ++seed) {
    samples.push_back(rb + test::random_band_limited(g, seed, 5, 0.05));
    const KEstimate k = estimate_K(samples, rb, 1.0, law, ops);
    EXPECT_GE(k.k_hat, prev);
    prev = k.k_hat;
  }
}

TEST(Convexity, Threshold) {
  const ConvexityCheck ok = check_convexity(1.0, 0.1);
  EXPECT_TRUE(ok.holds);
  EXPECT_NEAR(ok.lambda_hat, 0.95, 1e-15);
  const ConvexityCheck bad = check_convexity(30.0, 0.1);
  EXPECT_FALSE(bad.holds);
  EXPECT_LT(bad.lambda_hat, 0.0);
}
