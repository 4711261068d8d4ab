#pragma once

// Hermite-WENO smoothness sensor, Sobolev semi-norm, projected gradients,
// the blended stabilization term and the entropy correction factor.

#include <cmath>
#include <span>
#include <vector>

#include "cgidp/bernstein.hpp"
#include "cgidp/common.hpp"
#include "cgidp/field.hpp"
#include "cgidp/mesh.hpp"

namespace cgidp {

struct WenoConfig {
  double q = 1.0;              // steepening exponent
  int r = 4;                   // weight power
  double eps = 1e-12;          // division guard in the nonlinear weights
  double linear_weight = 0.2;  // w_l for every neighbour candidate
  double tol_norm = 1e-14;     // relative to the global max |u|

  void validate() const {
    if (!(q >= 1.0)) throw InvalidArgument("weno: q must be >= 1");
    if (r < 1) throw InvalidArgument("weno: r must be >= 1");
    if (!(eps > 0.0)) throw InvalidArgument("weno: eps must be positive");
    if (!(linear_weight >= 0.0 && linear_weight <= 0.25))
      throw InvalidArgument("weno: linear weight must lie in [0, 0.25] so that w_0 >= 0 in 2D");
  }
};

// Bernstein coefficients of one scalar polynomial on an element.
using ElementPolynomial = std::vector<double>;

// (sum_{1<=|k|<=p} h^{2|k|-d} int_K |D^k v|^2)^{1/2}, exact by Gauss quadrature.
template <int Dim>
double sobolev_seminorm(const BasisTable<Dim>& basis, const ElementGeometry<Dim>& geo,
                        std::span<const double> coeff) {
  const int p = basis.degree();
  const int nloc = basis.num_local();
  const int nq = basis.num_quad();
  double total = 0.0;
  std::array<int, Dim> k{};
  // enumerate multi-indices k with 0 <= k_d <= p
  int count = 1;
  for (int d = 0; d < Dim; ++d) count *= (p + 1);
  for (int idx = 0; idx < count; ++idx) {
    int rem = idx, order = 0;
    for (int d = 0; d < Dim; ++d) {
      k[d] = rem % (p + 1);
      rem /= (p + 1);
      order += k[d];
    }
    if (order < 1 || order > p) continue;
    double scale = 1.0;
    for (int d = 0; d < Dim; ++d) scale /= ipow(geo.extent[d], k[d]);
    double integral = 0.0;
    for (int q = 0; q < nq; ++q) {
      const auto qi = basis.quad_multi_index(q);
      double val = 0.0;
      for (int i = 0; i < nloc; ++i) {
        const auto ji = basis.local_multi_index(i);
        double b = 1.0;
        for (int d = 0; d < Dim; ++d) b *= basis.d1(k[d], qi[d], ji[d]);
        val += coeff[i] * b;
      }
      val *= scale;
      integral += basis.weight(q) * val * val;
    }
    integral *= geo.volume;
    total += ipow(geo.size, 2 * order - Dim) * integral;
  }
  return std::sqrt(total);
}

namespace detail {

// Applies the 1D matrix T along direction `dir` of a tensor coefficient array.
template <int Dim>
void apply_along(const BasisTable<Dim>& basis, const std::vector<double>& T, int dir, std::span<const double> c,
                 ElementPolynomial& out) {
  const int p = basis.degree();
  const int nloc = basis.num_local();
  out.resize(nloc);
  int stride = 1;
  for (int d = 0; d < dir; ++d) stride *= (p + 1);
  for (int i = 0; i < nloc; ++i) {
    const int j = (i / stride) % (p + 1);
    const int base = i - j * stride;
    double s = 0.0;
    for (int m = 0; m <= p; ++m) s += T[j * (p + 1) + m] * c[base + m * stride];
    out[i] = s;
  }
}

inline double mean(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v;
  return s / static_cast<double>(c.size());
}

}  // namespace detail

// Candidate 0 is u_h on K_e; each interior facet neighbour contributes its
// polynomial continued onto K_e and shifted to the K_e average. Fills `out`
// (reusing its storage) and returns the number of candidates.
template <int Dim, int M>
int candidate_polynomials(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, const NodalField<M>& u, int e,
                          int component, std::vector<ElementPolynomial>& out) {
  const int nloc = basis.num_local();
  if (out.size() < 2 * Dim + 1) out.resize(2 * Dim + 1);
  thread_local ElementPolynomial nb;
  auto coefficients = [&](int el, ElementPolynomial& c) {
    c.resize(nloc);
    const int* nodes = mesh.element_nodes(el);
    for (int i = 0; i < nloc; ++i) c[i] = u[nodes[i]][component];
  };
  coefficients(e, out[0]);
  const double avg = detail::mean(out[0]);
  int count = 1;
  for (int f = 0; f < 2 * Dim; ++f) {
    const FacetLink& link = mesh.facet(e, f);
    if (link.is_boundary(mesh.num_elements())) continue;
    coefficients(link.neighbour, nb);
    ElementPolynomial& cand = out[count++];
    detail::apply_along(basis, basis.extrapolation(f % 2 == 0), f / 2, nb, cand);
    const double shift = avg - detail::mean(cand);
    for (double& v : cand) v += shift;
  }
  return count;
}

template <int Dim, int M>
std::vector<ElementPolynomial> candidate_polynomials(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis,
                                                     const NodalField<M>& u, int e, int component = 0) {
  std::vector<ElementPolynomial> out;
  out.resize(candidate_polynomials<Dim, M>(mesh, basis, u, e, component, out));
  return out;
}

// Nonlinear WENO combination of the first `count` candidates into `out`.
template <int Dim>
void weno_reconstruct(const BasisTable<Dim>& basis, const ElementGeometry<Dim>& geo,
                      const std::vector<ElementPolynomial>& cands, int count, const WenoConfig& cfg,
                      ElementPolynomial& out, double* weights_out = nullptr) {
  const int ne = count - 1;
  std::array<double, 2 * Dim + 1> w{};
  double sum = 0.0;
  for (int l = 0; l <= ne; ++l) {
    const double lin = l == 0 ? 1.0 - cfg.linear_weight * ne : cfg.linear_weight;
    const double s = sobolev_seminorm(basis, geo, cands[l]);
    w[l] = lin / (ipow(s, cfg.r) + cfg.eps);
    sum += w[l];
  }
  out.assign(cands[0].size(), 0.0);
  for (int l = 0; l <= ne; ++l) {
    w[l] /= sum;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[l] * cands[l][i];
    if (weights_out) weights_out[l] = w[l];
  }
}

template <int Dim>
ElementPolynomial weno_reconstruct(const BasisTable<Dim>& basis, const ElementGeometry<Dim>& geo,
                                   const std::vector<ElementPolynomial>& cands, const WenoConfig& cfg,
                                   std::vector<double>* weights_out = nullptr) {
  ElementPolynomial out;
  std::vector<double> w(cands.size());
  weno_reconstruct(basis, geo, cands, static_cast<int>(cands.size()), cfg, out, w.data());
  if (weights_out) *weights_out = w;
  return out;
}

// gamma = 1 - min(1, ratio)^q
inline double sensor_from_ratio(double ratio, double q) {
  const double t = std::min(1.0, ratio);
  return 1.0 - (q == 1.0 ? t : std::pow(t, q));
}

// Smoothness sensor gamma_e in [0,1]; for systems the minimum over components.
// `scale` is the global max |u| per component used for the near-constant guard.
template <int Dim, int M>
double smoothness_sensor(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, const NodalField<M>& u, int e,
                         const WenoConfig& cfg, const Vec<M>& scale) {
  const auto& geo = mesh.geometry(e);
  // per-thread scratch; this runs once per element and stage
  thread_local std::vector<ElementPolynomial> cands;
  thread_local ElementPolynomial rec, diff;
  double gamma = 1.0;
  for (int k = 0; k < M; ++k) {
    const int count = candidate_polynomials<Dim, M>(mesh, basis, u, e, k, cands);
    const double own = sobolev_seminorm(basis, geo, cands[0]);
    if (own <= cfg.tol_norm * std::max(scale[k], 1e-300)) continue;
    weno_reconstruct(basis, geo, cands, count, cfg, rec);
    diff.resize(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) diff[i] = cands[0][i] - rec[i];
    gamma = std::min(gamma, sensor_from_ratio(sobolev_seminorm(basis, geo, diff) / own, cfg.q));
  }
  return gamma;
}

// Projected gradient field g[j][k][d] ~ d u_k / d x_d at node j.
template <int Dim, int M>
using GradientField = std::vector<std::array<Vec<Dim>, M>>;

// Consistent L2 projection of grad u_h into the continuous space. An
// optional previous projection serves as the initial guess.
template <int Dim, int M>
GradientField<Dim, M> gradient_projection(const MassMatrix<Dim>& mass, const BasisTable<Dim>& basis,
                                          const NodalField<M>& u, double tol = 1e-10,
                                          const GradientField<Dim, M>* guess = nullptr) {
  constexpr int K = M * Dim;
  const Mesh<Dim>& mesh = mass.mesh();
  const int n = mesh.num_nodes();
  const int nloc = basis.num_local();
  NodalField<K> b(n);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& geo = mesh.geometry(e);
    const int* nodes = mesh.element_nodes(e);
    for (int q = 0; q < basis.num_quad(); ++q) {
      std::array<Vec<M>, Dim> grad{};
      for (int j = 0; j < nloc; ++j)
        for (int d = 0; d < Dim; ++d) grad[d] += (basis.ref_gradient(q, j)[d] / geo.extent[d]) * u[nodes[j]];
      const double w = geo.volume * basis.weight(q);
      for (int i = 0; i < nloc; ++i) {
        const double wi = w * basis.value(q, i);
        for (int k = 0; k < M; ++k)
          for (int d = 0; d < Dim; ++d) b[nodes[i]][k * Dim + d] += wi * grad[d][k];
      }
    }
  }
  NodalField<K> x(n);
  if (!mass.direct()) {
    for (int j = 0; j < n; ++j) {
      if (guess && static_cast<int>(guess->size()) == n) {
        for (int k = 0; k < M; ++k)
          for (int d = 0; d < Dim; ++d) x[j][k * Dim + d] = (*guess)[j][k][d];
      } else {
        x[j] = (1.0 / mesh.lumped_mass(j)) * b[j];
      }
    }
  }
  mass.template solve<K>(b, x, tol);
  GradientField<Dim, M> g(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < M; ++k)
      for (int d = 0; d < Dim; ++d) g[j][k][d] = x[j][k * Dim + d];
  return g;
}

template <int Dim, int M>
GradientField<Dim, M> gradient_projection(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis,
                                          const NodalField<M>& u, double tol = 1e-10) {
  return gradient_projection<Dim, M>(MassMatrix<Dim>(mesh), basis, u, tol);
}

// s_h^e(phi_i, u_h) = nu int_K grad phi_i . (grad u_h - gamma g_h) for all i.
template <int Dim, int M>
void stabilization_element(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, const NodalField<M>& u,
                           const GradientField<Dim, M>& g, double gamma, double nu, int e, std::span<Vec<M>> s) {
  const int nloc = basis.num_local();
  const auto& geo = mesh.geometry(e);
  const int* nodes = mesh.element_nodes(e);
  std::fill(s.begin(), s.begin() + nloc, Vec<M>{});
  if (nu == 0.0) return;
  for (int q = 0; q < basis.num_quad(); ++q) {
    std::array<Vec<M>, Dim> w{};  // grad u_h - gamma g_h at q
    for (int j = 0; j < nloc; ++j) {
      const double phij = basis.value(q, j);
      for (int d = 0; d < Dim; ++d) {
        const double dphi = basis.ref_gradient(q, j)[d] / geo.extent[d];
        for (int k = 0; k < M; ++k) w[d][k] += dphi * u[nodes[j]][k] - gamma * phij * g[nodes[j]][k][d];
      }
    }
    const double wq = nu * geo.volume * basis.weight(q);
    for (int i = 0; i < nloc; ++i)
      for (int d = 0; d < Dim; ++d) s[i] += (wq * basis.ref_gradient(q, i)[d] / geo.extent[d]) * w[d];
  }
}

template <int Dim, int M>
std::vector<Vec<M>> stabilization_element(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis,
                                          const NodalField<M>& u, const GradientField<Dim, M>& g,
                                          double gamma, double nu, int e) {
  std::vector<Vec<M>> s(basis.num_local());
  stabilization_element<Dim, M>(mesh, basis, u, g, gamma, nu, e, std::span<Vec<M>>(s));
  return s;
}

// Entropy correction factor for the square entropy u^2/2:
// xi = 1 - min(1, max(0, N) / (D + eps)), N = int u udot^L + u f'(u).grad u,
// D = nu int |grad u|^2.
template <int Dim, class FluxDerivative>
double entropy_correction_factor(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, const NodalField<1>& u,
                                 const NodalField<1>& udot_low, int e, double nu, FluxDerivative&& fprime,
                                 double eps = 1e-12) {
  const int nloc = basis.num_local();
  const auto& geo = mesh.geometry(e);
  const int* nodes = mesh.element_nodes(e);
  double N = 0.0, D = 0.0;
  for (int q = 0; q < basis.num_quad(); ++q) {
    double uq = 0.0, udq = 0.0;
    Vec<Dim> gq{};
    for (int j = 0; j < nloc; ++j) {
      const double phi = basis.value(q, j);
      uq += phi * u[nodes[j]][0];
      udq += phi * udot_low[nodes[j]][0];
      for (int d = 0; d < Dim; ++d) gq[d] += basis.ref_gradient(q, j)[d] / geo.extent[d] * u[nodes[j]][0];
    }
    const Vec<Dim> a = fprime(mesh.map(e, basis.point(q)), uq);
    const double w = geo.volume * basis.weight(q);
    N += w * (uq * udq + uq * dot(a, gq));
    D += w * dot(gq, gq);
  }
  D *= nu;
  return 1.0 - std::min(1.0, std::max(0.0, N) / (D + eps));
}

}  // namespace cgidp
