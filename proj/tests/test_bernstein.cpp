#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cgidp/bernstein.hpp"

using namespace cgidp;

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
  for (int n = 1; n <= 9; ++n) {
    const auto rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += rule.weights[q] * std::pow(rule.points[q], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
}

TEST(Bernstein, PartitionOfUnityAndNonnegativity) {
  for (int p = 1; p <= 8; ++p) {
    BasisTable<1> b1(p, p + 1);
    for (int q = 0; q < b1.num_quad(); ++q) {
      double s = 0.0;
      for (int i = 0; i < b1.num_local(); ++i) {
        EXPECT_GE(b1.value(q, i), 0.0);
        s += b1.value(q, i);
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
    }
  }
  BasisTable<2> b2(1, 2);
  EXPECT_EQ(b2.num_local(), 4);
  for (int q = 0; q < b2.num_quad(); ++q) {
    double s = 0.0;
    Vec<2> g{};
    for (int i = 0; i < 4; ++i) {
      s += b2.value(q, i);
      g[0] += b2.ref_gradient(q, i)[0];
      g[1] += b2.ref_gradient(q, i)[1];
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(g[0], 0.0, 1e-14);
    EXPECT_NEAR(g[1], 0.0, 1e-14);
  }
}

TEST(Bernstein, IntegralOfEachBasisFunctionIsLumpedShare) {
  // int phi_j = 1 / |N_e| on the reference element
  for (int p = 1; p <= 6; ++p) {
    BasisTable<1> b(p, p + 1);
    for (int i = 0; i < b.num_local(); ++i) {
      double s = 0.0;
      for (int q = 0; q < b.num_quad(); ++q) s += b.weight(q) * b.value(q, i);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-13);
    }
  }
  BasisTable<2> b(1, 2);
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int q = 0; q < b.num_quad(); ++q) s += b.weight(q) * b.value(q, i);
    EXPECT_NEAR(s, 0.25, 1e-14);
  }
}

TEST(Bernstein, DerivativesMatchFiniteDifferences) {
  const int p = 5;
  std::vector<double> v1(p + 1), v2(p + 1), d(p + 1);
  const double x = 0.37, h = 1e-6;
  bernstein_values(p, x + h, v1);
  bernstein_values(p, x - h, v2);
  bernstein_derivatives(p, 1, x, d);
  for (int j = 0; j <= p; ++j) EXPECT_NEAR(d[j], (v1[j] - v2[j]) / (2 * h), 1e-7);
}

TEST(Bernstein, EndpointInterpolation) {
  // 1D P2, u = (0,0,1) at xi = 1 -> 1
  BasisTable<1> b(2, 3);
  std::vector<double> phi(3);
  std::vector<Vec<1>> grad(3);
  b.evaluate({1.0}, phi, grad);
  EXPECT_NEAR(phi[2], 1.0, 1e-15);
  EXPECT_NEAR(phi[0] + phi[1], 0.0, 1e-15);
}

TEST(Bernstein, ConvexHullProperty) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 5.0);
  for (int p = 1; p <= 6; ++p) {
    BasisTable<1> b(p, p + 1);
    std::vector<double> c(p + 1), phi(p + 1);
    for (auto& x : c) x = U(rng);
    const double lo = *std::min_element(c.begin(), c.end()), hi = *std::max_element(c.begin(), c.end());
    for (int s = 0; s <= 200; ++s) {
      b.evaluate({s / 200.0}, phi, {});
      double v = 0.0;
      for (int j = 0; j <= p; ++j) v += c[j] * phi[j];
      EXPECT_GE(v, lo - 1e-13);
      EXPECT_LE(v, hi + 1e-13);
    }
  }
}

TEST(Bernstein, ReparametrizationContinuesPolynomial) {
  // coefficients of the polynomial restricted to [a,b] reproduce its values
  const int p = 3;
  const std::vector<double> c{0.3, -1.0, 2.0, 0.5};
  const double a = 1.0, bnd = 2.0;
  const auto R = reparametrization_matrix(p, a, bnd);
  std::vector<double> cn(p + 1, 0.0);
  for (int i = 0; i <= p; ++i)
    for (int j = 0; j <= p; ++j) cn[i] += R[i * (p + 1) + j] * c[j];
  std::vector<double> phi(p + 1);
  for (double t : {0.0, 0.25, 0.8, 1.0}) {
    const double x = a + (bnd - a) * t;
    double v_old = 0.0, v_new = 0.0;
    // evaluate the original polynomial outside [0,1] via the power form
    for (int j = 0; j <= p; ++j) v_old += c[j] * binomial(p, j) * std::pow(x, j) * std::pow(1.0 - x, p - j);
    bernstein_values(p, t, phi);
    for (int j = 0; j <= p; ++j) v_new += cn[j] * phi[j];
    EXPECT_NEAR(v_new, v_old, 1e-12);
  }
}

TEST(Bernstein, RejectsDegreeZero) { EXPECT_THROW(BasisTable<1>(0, 1), InvalidArgument); }
