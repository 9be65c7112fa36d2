#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "relaxflow/field.hpp"

namespace relaxflow::test {

// Fourier collocation second-derivative matrix on [0, 2 pi), N even.
inline Eigen::MatrixXd fourier_d2(int n) {
  const double pi = kTwoPi / 2.0;
  const double h = kTwoPi / n;
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = -pi * pi / (3.0 * h * h) - 1.0 / 6.0;
      } else {
        const double s = std::sin((i - j) * h / 2.0);
        d(i, j) = -((i - j) % 2 == 0 ? 1.0 : -1.0) / (2.0 * s * s);
      }
    }
  }
  return d;
}

// (-D2 + beta) c = rho - <rho>; the minimum-norm solution is the zero-mean one
inline Eigen::VectorXd dense_screened_poisson(const ScalarField& rho, double beta) {
  const int n = rho.grid().points_per_axis();
  const Eigen::MatrixXd a = -fourier_d2(n) + beta * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  const double m = mean(rho);
  for (int i = 0; i < n; ++i) b[i] = rho[i] - m;
  return a.completeOrthogonalDecomposition().solve(b);
}

}  // namespace relaxflow::test
