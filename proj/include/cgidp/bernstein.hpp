#pragma once

// Bernstein polynomials on the reference interval [0,1] and tensor-product
// tables on [0,1]^Dim, Gauss–Legendre quadrature, and the extrapolation
// operators used to continue a neighbour's polynomial onto an element.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cgidp/common.hpp"

namespace cgidp {

struct QuadratureRule1D {
  std::vector<double> points;   // in [0,1]
  std::vector<double> weights;  // sum to 1
};

// n-point Gauss–Legendre rule mapped to [0,1]; exact for degree 2n-1.
inline QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// All degree-p Bernstein polynomials at x, built by the triangular
// (de Casteljau) recurrence; valid for x outside [0,1] as well.
inline void bernstein_values(int p, double x, std::span<double> out) {
  out[0] = 1.0;
  for (int r = 1; r <= p; ++r) {
    out[r] = x * out[r - 1];
    for (int j = r - 1; j >= 1; --j) out[j] = (1.0 - x) * out[j] + x * out[j - 1];
    out[0] *= (1.0 - x);
  }
}

// k-th derivative of every degree-p Bernstein polynomial at x.
inline void bernstein_derivatives(int p, int k, double x, std::span<double> out) {
  std::fill(out.begin(), out.begin() + p + 1, 0.0);
  if (k > p) return;
  std::vector<double> low(p - k + 1);
  bernstein_values(p - k, x, low);
  double scale = 1.0;
  for (int i = 0; i < k; ++i) scale *= (p - i);
  for (int j = 0; j <= p; ++j) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) {
      const int jj = j - i;
      if (jj < 0 || jj > p - k) continue;
      s += ((k - i) % 2 == 0 ? 1.0 : -1.0) * binomial(k, i) * low[jj];
    }
    out[j] = scale * s;
  }
}

// Evaluates the blossom (polar form) of a Bernstein polynomial with
// coefficients c at the parameters t[0..p-1].
inline double blossom(std::span<const double> c, std::span<const double> t) {
  std::vector<double> w(c.begin(), c.end());
  const int p = static_cast<int>(c.size()) - 1;
  for (int r = 0; r < p; ++r)
    for (int j = 0; j < p - r; ++j) w[j] = (1.0 - t[r]) * w[j] + t[r] * w[j + 1];
  return w[0];
}

// Matrix (row-major, (p+1)x(p+1)) mapping the Bernstein coefficients of a
// polynomial in the variable s to the coefficients of the same polynomial
// reparametrised on [a,b], i.e. q(tau) = poly(a + (b-a) tau).
inline std::vector<double> reparametrization_matrix(int p, double a, double b) {
  std::vector<double> T((p + 1) * (p + 1), 0.0);
  std::vector<double> unit(p + 1), t(p);
  for (int col = 0; col <= p; ++col) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[col] = 1.0;
    for (int k = 0; k <= p; ++k) {
      for (int r = 0; r < p; ++r) t[r] = r < p - k ? a : b;
      T[k * (p + 1) + col] = blossom(unit, t);
    }
  }
  return T;
}

// Tensor-product Bernstein basis of degree p on [0,1]^Dim with a
// tensor Gauss rule. Local node index i = sum_d j_d (p+1)^d.
template <int Dim>
class BasisTable {
 public:
  BasisTable(int degree, int points_per_direction) : p_(degree), n1_(points_per_direction) {
    if (degree < 1) throw InvalidArgument("BasisTable: degree must be >= 1");
    rule_ = gauss_legendre(n1_);
    nloc_ = 1;
    nq_ = 1;
    for (int d = 0; d < Dim; ++d) {
      nloc_ *= (p_ + 1);
      nq_ *= n1_;
    }
    derivs1d_.assign((p_ + 1) * n1_ * (p_ + 1), 0.0);
    std::vector<double> buf(p_ + 1);
    for (int k = 0; k <= p_; ++k)
      for (int q = 0; q < n1_; ++q) {
        bernstein_derivatives(p_, k, rule_.points[q], buf);
        for (int j = 0; j <= p_; ++j) derivs1d_[(k * n1_ + q) * (p_ + 1) + j] = buf[j];
      }
    phi_.resize(nq_ * nloc_);
    grad_.resize(nq_ * nloc_);
    weights_.resize(nq_);
    points_.resize(nq_);
    for (int q = 0; q < nq_; ++q) {
      const auto qi = split(q, n1_);
      double w = 1.0;
      for (int d = 0; d < Dim; ++d) {
        w *= rule_.weights[qi[d]];
        points_[q][d] = rule_.points[qi[d]];
      }
      weights_[q] = w;
      for (int i = 0; i < nloc_; ++i) {
        const auto ji = split(i, p_ + 1);
        double v = 1.0;
        Vec<Dim> g{};
        for (int d = 0; d < Dim; ++d) {
          v *= d1(0, qi[d], ji[d]);
          double gd = 1.0;
          for (int dd = 0; dd < Dim; ++dd) gd *= d1(dd == d ? 1 : 0, qi[dd], ji[dd]);
          g[d] = gd;
        }
        phi_[q * nloc_ + i] = v;
        grad_[q * nloc_ + i] = g;
      }
    }
    extrap_left_ = reparametrization_matrix(p_, 1.0, 2.0);
    extrap_right_ = reparametrization_matrix(p_, -1.0, 0.0);
  }

  int degree() const { return p_; }
  int points_per_direction() const { return n1_; }
  int num_local() const { return nloc_; }
  int num_quad() const { return nq_; }

  // phi_i at quadrature point q
  double value(int q, int i) const { return phi_[q * nloc_ + i]; }
  // reference-coordinate gradient of phi_i at quadrature point q
  const Vec<Dim>& ref_gradient(int q, int i) const { return grad_[q * nloc_ + i]; }
  // reference weight (sums to one over the element)
  double weight(int q) const { return weights_[q]; }
  const Vec<Dim>& point(int q) const { return points_[q]; }

  // k-th derivative of the 1D basis function j at 1D Gauss point q.
  double d1(int k, int q, int j) const { return derivs1d_[(k * n1_ + q) * (p_ + 1) + j]; }
  const QuadratureRule1D& rule() const { return rule_; }

  std::array<int, Dim> local_multi_index(int i) const { return split(i, p_ + 1); }
  std::array<int, Dim> quad_multi_index(int q) const { return split(q, n1_); }

  // Coefficients of the neighbour polynomial continued onto this element;
  // `neighbour_on_left` tells on which side of the element the neighbour is.
  const std::vector<double>& extrapolation(bool neighbour_on_left) const {
    return neighbour_on_left ? extrap_left_ : extrap_right_;
  }

  // Values of all local basis functions at a reference point.
  void evaluate(const Vec<Dim>& xi, std::span<double> values, std::span<Vec<Dim>> gradients) const {
    std::array<std::vector<double>, Dim> v, dv;
    for (int d = 0; d < Dim; ++d) {
      v[d].resize(p_ + 1);
      dv[d].resize(p_ + 1);
      bernstein_values(p_, xi[d], v[d]);
      bernstein_derivatives(p_, 1, xi[d], dv[d]);
    }
    for (int i = 0; i < nloc_; ++i) {
      const auto ji = split(i, p_ + 1);
      double val = 1.0;
      Vec<Dim> g{};
      for (int d = 0; d < Dim; ++d) {
        val *= v[d][ji[d]];
        double gd = 1.0;
        for (int dd = 0; dd < Dim; ++dd) gd *= (dd == d ? dv[dd][ji[dd]] : v[dd][ji[dd]]);
        g[d] = gd;
      }
      values[i] = val;
      if (!gradients.empty()) gradients[i] = g;
    }
  }

 private:
  static std::array<int, Dim> split(int idx, int base) {
    std::array<int, Dim> out{};
    for (int d = 0; d < Dim; ++d) {
      out[d] = idx % base;
      idx /= base;
    }
    return out;
  }

  int p_;
  int n1_;
  int nloc_ = 0;
  int nq_ = 0;
  QuadratureRule1D rule_;
  std::vector<double> derivs1d_;
  std::vector<double> phi_;
  std::vector<Vec<Dim>> grad_;
  std::vector<double> weights_;
  std::vector<Vec<Dim>> points_;
  std::vector<double> extrap_left_;
  std::vector<double> extrap_right_;
};

// Default rule: ceil((2p+2)/2) = p+1 points per direction.
inline int default_quadrature_points(int degree) { return degree + 1; }

}  // namespace cgidp
