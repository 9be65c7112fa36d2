#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relaxflow/energetics.hpp"
#include "test_util.hpp"

using namespace relaxflow;

namespace {

constexpr double kPi = kTwoPi / 2.0;

ScalarField cosine(const TorusGrid& g, double base, double amp, int mode = 1) {
  return ScalarField::from_function(g, [=](double x, double) {
    return base + amp * std::cos(mode * x);
  });
}

VectorField constant_vector(const TorusGrid& g, double v) {
  VectorField out(g);
  for (int a = 0; a < g.dim(); ++a) out[a] = ScalarField(g, v);
  return out;
}

}  // namespace

TEST(GammaLaw, InternalEnergyValues) {
  EXPECT_DOUBLE_EQ(GammaLaw(1.0, 2.0).internal_energy(2.0), 4.0);
  EXPECT_NEAR(GammaLaw(1.0, 1.5).internal_energy(4.0), 16.0, 1e-13);
  const TorusGrid g(1, 32);
  EXPECT_NEAR(total_internal_energy(GammaLaw(1.0, 2.0), ScalarField(g, 1.0)), kTwoPi, 1e-13);
}

TEST(GammaLaw, ConstitutiveRelations) {
  for (double gamma : {1.4, 2.0, 3.0}) {
    const GammaLaw law(0.7, gamma);
    for (double rho : {0.3, 1.0, 2.5}) {
      EXPECT_NEAR(rho * law.internal_energy_second_derivative(rho),
                  law.pressure_derivative(rho), 1e-12);
      EXPECT_NEAR(rho * law.internal_energy_derivative(rho),
                  law.pressure(rho) + law.internal_energy(rho), 1e-12);
    }
  }
}

TEST(GammaLaw, RejectsBadParameters) {
  EXPECT_THROW(GammaLaw(1.0, 1.0), DomainError);
  EXPECT_THROW(GammaLaw(0.0, 2.0), DomainError);
  const GammaLaw law;
  EXPECT_THROW(law.relative_internal_energy(1.0, 0.0), DomainError);
  EXPECT_THROW(law.relative_internal_energy(-1.0, 1.0), DomainError);
  EXPECT_THROW(law.relative_pressure(1.0, -2.0), DomainError);
}

TEST(RelativeEnergy, SimpleValues) {
  const GammaLaw law(1.0, 2.0);
  EXPECT_NEAR(law.relative_internal_energy(3.0, 1.0), 4.0, 1e-14);
  EXPECT_NEAR(law.relative_pressure(3.0, 1.0), 4.0, 1e-14);
  EXPECT_EQ(law.relative_internal_energy(1.7, 1.7), 0.0);
  EXPECT_EQ(law.relative_pressure(1.7, 1.7), 0.0);
}

TEST(RelativeEnergy, MatchesTaylorRemainderWithDifferencedSlope) {
  const GammaLaw law(1.0, 1.4);
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int s = 0; s < 200; ++s) {
    const double rho = u(gen), rb = u(gen);
    if (std::abs(rho - rb) < 0.1) continue;
    const double h = 1e-5 * rb;
    const double slope = (law.internal_energy(rb + h) - law.internal_energy(rb - h)) / (2 * h);
    const double oracle =
        law.internal_energy(rho) - law.internal_energy(rb) - slope * (rho - rb);
    const double got = law.relative_internal_energy(rho, rb);
    EXPECT_NEAR(got, oracle, 1e-8 * std::abs(oracle)) << rho << ' ' << rb;
  }
}

TEST(RelativeEnergy, NoCancellationNearDiagonal) {
  const GammaLaw law(1.0, 1.4);
  const double rb = 1.3, d = 1e-7;
  // quadratic term of the Taylor series dominates
  const double want = 0.5 * law.internal_energy_second_derivative(rb) * d * d;
  EXPECT_NEAR(law.relative_internal_energy(rb + d, rb), want, 1e-6 * want);
}

TEST(RelativeEnergy, PressureIdentityOnRandomPairs) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(1e-3, 10.0);
  for (double gamma : {1.2, 1.4, 5.0 / 3.0, 2.0, 3.0}) {
    const GammaLaw law(1.3, gamma);
    int bad = 0;
    for (int s = 0; s < 10000; ++s) {
      const double rho = u(gen), rb = u(gen);
      const double hr = law.relative_internal_energy(rho, rb);
      const double pr = law.relative_pressure(rho, rb);
      if (std::abs(pr - (gamma - 1.0) * hr) > 1e-12 * std::abs(pr)) ++bad;
      if (std::abs(pr) > (gamma - 1.0) * hr * (1 + 1e-12)) ++bad;
    }
    EXPECT_EQ(bad, 0) << "gamma=" << gamma;
  }
}

TEST(RelativeEnergy, NonnegativeOnRandomPairs) {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (double gamma : {1.1, 1.5, 2.0, 4.0}) {
    const GammaLaw law(1.0, gamma);
    for (int s = 0; s < 10000; ++s) {
      const double rho = u(gen);
      const double rb = std::max(u(gen), 1e-6);
      ASSERT_GE(law.relative_internal_energy(rho, rb), 0.0) << rho << ' ' << rb;
    }
  }
}

TEST(RelativeEnergy, LemmaBoundsWithComputedConstants) {
  const test::LemmaBox box;
  std::mt19937 gen(9);
  for (double gamma : {1.4, 1.5, 2.0, 3.0}) {
    const GammaLaw law(1.0, gamma);
    const double c1 = test::min_ratio(law, 0.0, box.r0, box.rho_bar_lo, box.rho_bar_hi, 2.0, 1500,
                                false);
    const double c2 = test::min_ratio(law, box.r0, box.rho_max, box.rho_bar_lo, box.rho_bar_hi, gamma,
                                1500, true);
    ASSERT_GT(c1, 0.0);
    ASSERT_GT(c2, 0.0);
    std::uniform_real_distribution<double> rb(box.rho_bar_lo, box.rho_bar_hi);
    std::uniform_real_distribution<double> near(0.0, box.r0);
    std::uniform_real_distribution<double> far(std::log(box.r0), std::log(box.rho_max));
    int violations = 0;
    for (int s = 0; s < 10000; ++s) {
      const double b = rb(gen);
      const double r = near(gen);
      if (law.relative_internal_energy(r, b) < c1 * (r - b) * (r - b)) ++violations;
      const double q = std::exp(far(gen));
      if (law.relative_internal_energy(q, b) < c2 * std::pow(std::abs(q - b), gamma)) ++violations;
    }
    EXPECT_EQ(violations, 0) << "gamma=" << gamma << " c1=" << c1 << " c2=" << c2;
  }
}

TEST(RelativeEnergy, QuadraticLowerBoundForGammaAtLeastTwo) {
  std::mt19937 gen(10);
  for (double gamma : {2.0, 2.5, 3.0}) {
    const GammaLaw law(1.0, gamma);
    const double c0 = test::min_ratio(law, 0.0, 50.0, 0.5, 2.0, 2.0, 1500, false);
    ASSERT_GT(c0, 0.0);
    std::uniform_real_distribution<double> rho(0.0, 50.0), rb(0.5, 2.0);
    int violations = 0;
    for (int s = 0; s < 10000; ++s) {
      const double r = rho(gen), b = rb(gen);
      if (law.relative_internal_energy(r, b) < c0 * (r - b) * (r - b)) ++violations;
    }
    EXPECT_EQ(violations, 0) << "gamma=" << gamma << " c0=" << c0;
  }
}

TEST(PotentialEnergy, ModelValues) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField one(g, 1.0);
  EXPECT_NEAR(potential_energy(EnergyModel::euler(law), one, ops), kTwoPi, 1e-12);
  EXPECT_NEAR(potential_energy(EnergyModel::euler_poisson(law, 0.1, 1.0), one, ops), kTwoPi,
              1e-12);
  const ScalarField rho = cosine(g, 1.0, 0.1);
  // int (1 + 0.1 cos)^2 = 2 pi + 0.01 pi
  const double want = kTwoPi + 0.01 * kPi + 0.005 * kPi;
  EXPECT_NEAR(potential_energy(EnergyModel::euler_korteweg(law, 1.0), rho, ops), want, 1e-12);
}

TEST(PotentialEnergy, ConfinementAddsLinearTerm) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField v = cosine(g, 0.0, 0.5);
  const ScalarField rho = cosine(g, 1.0, 0.2);
  const double base = potential_energy(EnergyModel::euler(law), rho, ops);
  const double with = potential_energy(EnergyModel::euler(law, v), rho, ops);
  EXPECT_NEAR(with - base, integral(rho * v), 1e-12);
}

TEST(VariationalDerivative, ClosedForms) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField rho = cosine(g, 1.0, 1.0);
  const ScalarField mu = variational_derivative(EnergyModel::euler_korteweg(law, 1.0), rho, ops);
  EXPECT_NEAR(mu[0], 5.0, 1e-12);
  EXPECT_LT(test::max_abs_diff(mu, cosine(g, 2.0, 3.0)), 1e-12);
  const ScalarField flat =
      variational_derivative(EnergyModel::euler(law), ScalarField(g, 1.5), ops);
  EXPECT_NEAR(flat.max(), law.internal_energy_derivative(1.5), 1e-14);
  EXPECT_NEAR(flat.min(), law.internal_energy_derivative(1.5), 1e-14);
}

TEST(Gateaux, ZeroDirectionGivesZero) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  const EnergyModel m = EnergyModel::euler_korteweg(GammaLaw(1.0, 1.5), 0.1);
  const GateauxLadder l = gateaux_check(m, cosine(g, 1.0, 0.2), ScalarField(g), {1e-2, 1e-3}, ops);
  for (double r : l.residuals) EXPECT_EQ(r, 0.0);
}

TEST(Gateaux, QuadraticEnergyIsExactUpToRoundoff) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GateauxLadder l = gateaux_check(EnergyModel::euler(GammaLaw(1.0, 2.0)),
                                        cosine(g, 1.0, 0.2), cosine(g, 0.0, 1.0), {1e-1, 1e-2},
                                        ops);
  for (double r : l.relative_residuals) EXPECT_LT(r, 1e-11);
}

TEST(Gateaux, SecondOrderForAllModels) {
  const TorusGrid g(1, 64);
  Spectral ops(g);
  const GammaLaw law(1.0, 1.5);
  const ScalarField rho = test::random_band_limited(g, 21, 4, 0.3, 1.0);
  const ScalarField dir = test::random_band_limited(g, 22, 4, 1.0);
  for (const EnergyModel& m : {EnergyModel::euler(law), EnergyModel::euler_poisson(law, 0.1, 1.0),
                               EnergyModel::euler_korteweg(law, 0.01)}) {
    const GateauxLadder l = gateaux_check(m, rho, dir, {1e-2, 1e-3, 1e-4}, ops);
    for (double rate : l.observed_rates()) {
      EXPECT_GE(rate, 1.9) << m.name();
      EXPECT_LE(rate, 2.1) << m.name();
    }
    EXPECT_LE(l.relative_residuals.back(), 1e-6) << m.name();
  }
}

TEST(Gateaux, NonpositiveDensityAlongLadderRejected) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  EXPECT_THROW(gateaux_check(EnergyModel::euler(GammaLaw(1.0, 1.5)), cosine(g, 1.0, 0.5),
                             cosine(g, 0.0, 1.0), {1.0}, ops),
               DomainError);
}

TEST(Kinetic, Values) {
  const TorusGrid g(1, 32);
  const ScalarField one(g, 1.0);
  EXPECT_NEAR(kinetic_energy(one, constant_vector(g, 0.5)), 0.25 * kPi, 1e-13);
  EXPECT_NEAR(relative_kinetic(one, constant_vector(g, 0.3), one, constant_vector(g, 0.1)),
              0.04 * kPi, 1e-13);
}

TEST(Kinetic, DependsOnlyOnDensityAndVelocityGap) {
  const TorusGrid g(1, 32);
  const ScalarField rho = cosine(g, 1.0, 0.3);
  const ScalarField rb1 = cosine(g, 1.0, 0.1), rb2 = cosine(g, 2.0, 0.5, 2);
  const ScalarField gap = cosine(g, 0.0, 0.2, 3);
  const ScalarField u1 = cosine(g, 0.4, 0.1), u2 = cosine(g, -1.0, 0.3, 2);
  auto mom = [&](const ScalarField& r, const ScalarField& u) {
    return VectorField(std::vector<ScalarField>{r * u});
  };
  const double a = relative_kinetic(rho, mom(rho, u1 + gap), rb1, mom(rb1, u1));
  const double b = relative_kinetic(rho, mom(rho, u2 - gap), rb2, mom(rb2, u2));
  EXPECT_NEAR(a, b, 1e-14);
}

TEST(Kinetic, VacuumPolicy) {
  const TorusGrid g(1, 8);
  ScalarField rho(g, 1.0);
  rho[3] = 0.0;
  VectorField m = constant_vector(g, 0.0);
  EXPECT_NO_THROW(velocity(rho, m));
  m[0][3] = 1e-3;
  EXPECT_THROW(velocity(rho, m), DomainError);
}

TEST(RelativePotential, VanishesOnIdenticalStates) {
  const TorusGrid g(1, 32);
  Spectral ops(g);
  const GammaLaw law(1.0, 2.0);
  const ScalarField rho = cosine(g, 1.0, 0.2);
  for (const EnergyModel& m : {EnergyModel::euler(law), EnergyModel::euler_poisson(law, 0.1, 1.0),
                               EnergyModel::euler_korteweg(law, 0.01)})
    EXPECT_EQ(relative_potential_energy(m, rho, rho, ops), 0.0) << m.name();
}

TEST(EntropyFlux, Values) {
  const TorusGrid g(1, 8);
  const GammaLaw law(1.0, 2.0);
  const VectorField q = entropy_flux(law, ScalarField(g, 1.0), constant_vector(g, 1.0));
  EXPECT_NEAR(q[0][2], 2.5, 1e-15);
  EXPECT_EQ(entropy_flux(law, ScalarField(g, 1.0), constant_vector(g, 0.0))[0].max_abs(), 0.0);
}

TEST(EnergyModel, ValidatesParameters) {
  const GammaLaw law;
  EXPECT_THROW(EnergyModel::euler_korteweg(law, 0.0), DomainError);
  EXPECT_THROW(EnergyModel::euler_poisson(law, -0.1, 1.0), DomainError);
  EXPECT_EQ(EnergyModel::euler_poisson(law, 0.1, 1.0).name(), "euler_poisson");
}
