#pragma once

// Nodal Bernstein fields and the element-level operations on them: cell
// averages, point evaluation, and the matrix-free consistent mass operator
// with its preconditioned CG solver (used for L2 projection, projected
// gradients and the optional consistent time derivative).

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cgidp/bernstein.hpp"
#include "cgidp/common.hpp"
#include "cgidp/mesh.hpp"

namespace cgidp {

template <int M>
using NodalField = std::vector<Vec<M>>;

// m_i^e = |K_e| / |N_e|; identical for every node of a Bernstein element.
template <int Dim>
double lumped_element_mass(const Mesh<Dim>& mesh, int e) {
  return mesh.geometry(e).volume / mesh.nodes_per_element();
}

// u^e = (1/|K_e|) sum_i m_i^e u_i, i.e. the mean of the element coefficients.
template <int Dim, int M>
Vec<M> cell_average(const Mesh<Dim>& mesh, const NodalField<M>& u, int e) {
  Vec<M> s{};
  const int* nodes = mesh.element_nodes(e);
  const int nloc = mesh.nodes_per_element();
  for (int i = 0; i < nloc; ++i) s += u[nodes[i]];
  return (1.0 / nloc) * s;
}

template <int Dim, int M>
struct PointValue {
  Vec<M> value{};
  std::array<Vec<M>, Dim> gradient{};  // gradient[d][k] = d u_k / d x_d
};

// Value and physical gradient of u_h at a reference point of element e.
template <int Dim, int M>
PointValue<Dim, M> evaluate_field(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis,
                                  const NodalField<M>& u, int e, const Vec<Dim>& xi) {
  const int nloc = basis.num_local();
  std::vector<double> phi(nloc);
  std::vector<Vec<Dim>> grad(nloc);
  basis.evaluate(xi, phi, grad);
  const auto& ext = mesh.geometry(e).extent;
  PointValue<Dim, M> out;
  const int* nodes = mesh.element_nodes(e);
  for (int i = 0; i < nloc; ++i) {
    const auto& ui = u[nodes[i]];
    out.value += phi[i] * ui;
    for (int d = 0; d < Dim; ++d) out.gradient[d] += (grad[i][d] / ext[d]) * ui;
  }
  return out;
}

// Reference element mass matrix int_ref phi_i phi_j (multiply by |K_e|).
template <int Dim>
std::vector<double> reference_mass_matrix(const BasisTable<Dim>& basis) {
  const int nloc = basis.num_local();
  std::vector<double> m(static_cast<std::size_t>(nloc) * nloc, 0.0);
  for (int q = 0; q < basis.num_quad(); ++q)
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) m[i * nloc + j] += basis.weight(q) * basis.value(q, i) * basis.value(q, j);
  return m;
}

// y = M x for the consistent mass matrix, assembled on the fly element by
// element (no global matrix is formed). K components are processed at once.
template <int Dim, int K>
void apply_mass(const Mesh<Dim>& mesh, const std::vector<double>& ref_mass, const NodalField<K>& x,
                NodalField<K>& y) {
  y.assign(x.size(), Vec<K>{});
  const int nloc = mesh.nodes_per_element();
  // uniform box meshes: every element has the same volume
  const double vol = mesh.geometry(0).volume;
  const double* mref = ref_mass.data();
  const Vec<K>* xp = x.data();
  Vec<K>* yp = y.data();
  Vec<K> xl[kMaxLocalNodes];
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int* nodes = mesh.element_nodes(e);
    for (int j = 0; j < nloc; ++j) xl[j] = xp[nodes[j]];
    for (int i = 0; i < nloc; ++i) {
      const double* row = mref + i * nloc;
      Vec<K> s{};
      for (int j = 0; j < nloc; ++j)
        for (int k = 0; k < K; ++k) s[k] += row[j] * xl[j][k];
      Vec<K>& yi = yp[nodes[i]];
      for (int k = 0; k < K; ++k) yi[k] += vol * s[k];
    }
  }
}

template <int Dim>
void apply_mass(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, std::span<const double> x,
                std::span<double> y) {
  NodalField<1> xx(x.size()), yy;
  for (std::size_t j = 0; j < x.size(); ++j) xx[j][0] = x[j];
  apply_mass<Dim, 1>(mesh, reference_mass_matrix(basis), xx, yy);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = yy[j][0];
}

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Solves M x_k = b_k for K independent right-hand sides with conjugate
// gradients preconditioned by the lumped mass. x holds the initial guess.
template <int Dim, int K>
SolveReport solve_mass(const Mesh<Dim>& mesh, const std::vector<double>& ref_mass, const NodalField<K>& b,
                       NodalField<K>& x, double tol = 1e-10, int max_iter = 500) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, Vec<K>{});
  NodalField<K> r(n), z(n), p(n), ap;
  apply_mass<Dim, K>(mesh, ref_mass, x, ap);
  Vec<K> bnorm{}, rz{}, res{};
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = b[j] - ap[j];
    for (int k = 0; k < K; ++k) bnorm[k] += b[j][k] * b[j][k];
  }
  std::array<bool, K> active;
  for (int k = 0; k < K; ++k) {
    bnorm[k] = std::sqrt(bnorm[k]);
    active[k] = bnorm[k] > 0.0;
    if (!active[k])
      for (auto& v : x) v[k] = 0.0;
  }
  auto residuals = [&] {
    Vec<K> s{};
    for (const auto& v : r)
      for (int k = 0; k < K; ++k) s[k] += v[k] * v[k];
    bool any = false;
    for (int k = 0; k < K; ++k) {
      res[k] = active[k] ? std::sqrt(s[k]) / bnorm[k] : 0.0;
      if (res[k] > tol) any = true;
    }
    return any;
  };
  for (std::size_t j = 0; j < n; ++j) {
    z[j] = (1.0 / mesh.lumped_mass(static_cast<int>(j))) * r[j];
    p[j] = z[j];
    for (int k = 0; k < K; ++k) rz[k] += r[j][k] * z[j][k];
  }
  SolveReport rep;
  int it = 0;
  bool running = residuals();
  while (running && it < max_iter) {
    apply_mass<Dim, K>(mesh, ref_mass, p, ap);
    Vec<K> pap{};
    for (std::size_t j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k) pap[k] += p[j][k] * ap[j][k];
    Vec<K> a{};
    for (int k = 0; k < K; ++k) a[k] = (res[k] > tol && pap[k] > 0.0) ? rz[k] / pap[k] : 0.0;
    Vec<K> rz_new{};
    for (std::size_t j = 0; j < n; ++j) {
      const double inv = 1.0 / mesh.lumped_mass(static_cast<int>(j));
      for (int k = 0; k < K; ++k) {
        x[j][k] += a[k] * p[j][k];
        r[j][k] -= a[k] * ap[j][k];
        z[j][k] = inv * r[j][k];
        rz_new[k] += r[j][k] * z[j][k];
      }
    }
    Vec<K> beta{};
    for (int k = 0; k < K; ++k) beta[k] = rz[k] > 0.0 ? rz_new[k] / rz[k] : 0.0;
    rz = rz_new;
    for (std::size_t j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k) p[j][k] = z[j][k] + beta[k] * p[j][k];
    ++it;
    running = residuals();
  }
  rep.iterations = it;
  for (int k = 0; k < K; ++k) rep.relative_residual = std::max(rep.relative_residual, res[k]);
  if (running)
    throw ConvergenceFailure("mass solve: relative residual " + std::to_string(rep.relative_residual) + " after " +
                             std::to_string(it) + " iterations");
  return rep;
}

// Scalar convenience overload.
template <int Dim>
SolveReport solve_mass(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, std::span<const double> b,
                       std::span<double> x, double tol = 1e-10, int max_iter = 500) {
  NodalField<1> bb(b.size()), xx(x.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    bb[j][0] = b[j];
    xx[j][0] = x[j];
  }
  const auto rep = solve_mass<Dim, 1>(mesh, reference_mass_matrix(basis), bb, xx, tol, max_iter);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = xx[j][0];
  return rep;
}

// Global consistent mass matrix with a cached factorization. Nodes are
// renumbered by reverse Cuthill-McKee (this also removes the wrap-around of
// periodic meshes from the band); if the band fits in `max_band_storage`
// doubles it is Cholesky-factored once, otherwise solves fall back to CG.
template <int Dim>
class MassMatrix {
 public:
  explicit MassMatrix(const Mesh<Dim>& mesh, std::size_t max_band_storage = 4'000'000)
      : mesh_(&mesh),
        ref_(reference_mass_matrix(BasisTable<Dim>(mesh.degree(), default_quadrature_points(mesh.degree())))) {
    const int n = mesh.num_nodes();
    const int nloc = mesh.nodes_per_element();
    std::vector<std::vector<int>> adj(n);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const int* nodes = mesh.element_nodes(e);
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j)
          if (nodes[i] != nodes[j]) adj[nodes[i]].push_back(nodes[j]);
    }
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    order_ = reverse_cuthill_mckee(adj);
    position_.assign(n, 0);
    for (int i = 0; i < n; ++i) position_[order_[i]] = i;
    int band = 0;
    for (int j = 0; j < n; ++j)
      for (int k : adj[j]) band = std::max(band, std::abs(position_[j] - position_[k]));
    if (static_cast<std::size_t>(n) * (band + 1) > max_band_storage) return;
    band_ = band;
    factor();
  }

  const Mesh<Dim>& mesh() const { return *mesh_; }
  const std::vector<double>& reference() const { return ref_; }
  bool direct() const { return band_ >= 0; }
  int bandwidth() const { return band_; }

  template <int K>
  void apply(const NodalField<K>& x, NodalField<K>& y) const {
    apply_mass<Dim, K>(*mesh_, ref_, x, y);
  }

  // Solves M x = b componentwise. x is the initial guess for the CG path.
  template <int K>
  SolveReport solve(const NodalField<K>& b, NodalField<K>& x, double tol = 1e-10, int max_iter = 500) const {
    if (!direct()) return solve_mass<Dim, K>(*mesh_, ref_, b, x, tol, max_iter);
    const int n = static_cast<int>(b.size());
    const int w = band_ + 1;
    std::vector<Vec<K>> y(n);
    for (int i = 0; i < n; ++i) {
      Vec<K> s = b[order_[i]];
      const double* row = &chol_[static_cast<std::size_t>(i) * w];
      for (int k = std::max(0, i - band_); k < i; ++k) s -= row[k - i + band_] * y[k];
      y[i] = (1.0 / row[band_]) * s;
    }
    for (int i = n - 1; i >= 0; --i) {
      Vec<K> s = y[i];
      for (int k = i + 1; k <= std::min(n - 1, i + band_); ++k)
        s -= chol_[static_cast<std::size_t>(k) * w + (i - k + band_)] * y[k];
      y[i] = (1.0 / chol_[static_cast<std::size_t>(i) * w + band_]) * s;
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[order_[i]] = y[i];
    return {};
  }

 private:
  static std::vector<int> reverse_cuthill_mckee(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    auto degree = [&](int j) { return adj[j].size(); };
    while (static_cast<int>(order.size()) < n) {
      int start = -1;
      for (int j = 0; j < n; ++j)
        if (!seen[j] && (start < 0 || degree(j) < degree(start))) start = j;
      std::size_t head = order.size();
      order.push_back(start);
      seen[start] = 1;
      while (head < order.size()) {
        const int j = order[head++];
        std::vector<int> next;
        for (int k : adj[j])
          if (!seen[k]) {
            seen[k] = 1;
            next.push_back(k);
          }
        std::stable_sort(next.begin(), next.end(), [&](int a, int b) { return degree(a) < degree(b); });
        order.insert(order.end(), next.begin(), next.end());
      }
    }
    std::reverse(order.begin(), order.end());
    return order;
  }

  void factor() {
    const int n = mesh_->num_nodes();
    const int nloc = mesh_->nodes_per_element();
    const int w = band_ + 1;
    chol_.assign(static_cast<std::size_t>(n) * w, 0.0);
    auto at = [&](int i, int j) -> double& { return chol_[static_cast<std::size_t>(i) * w + (j - i + band_)]; };
    const double vol = mesh_->geometry(0).volume;
    for (int e = 0; e < mesh_->num_elements(); ++e) {
      const int* nodes = mesh_->element_nodes(e);
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) {
          const int i = position_[nodes[a]], j = position_[nodes[b]];
          if (j <= i) at(i, j) += vol * ref_[a * nloc + b];
        }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - band_); j <= i; ++j) {
        double s = at(i, j);
        for (int k = std::max(std::max(0, i - band_), j - band_); k < j; ++k) s -= at(i, k) * at(j, k);
        if (i == j) {
          if (!(s > 0.0)) throw NumericalError("mass matrix: Cholesky factorization failed");
          at(i, i) = std::sqrt(s);
        } else {
          at(i, j) = s / at(j, j);
        }
      }
    }
  }

  const Mesh<Dim>* mesh_;
  std::vector<double> ref_;
  std::vector<int> order_, position_;
  int band_ = -1;
  std::vector<double> chol_;
};

// L2 projection of a function into the Bernstein space (one solve per
// component). Uses a tensor Gauss rule with `extra` additional points.
template <int Dim, int M, class Fn>
NodalField<M> l2_projection(const Mesh<Dim>& mesh, Fn&& fn, int extra = 4) {
  const int p = mesh.degree();
  const BasisTable<Dim> basis(p, default_quadrature_points(p));
  const BasisTable<Dim> fine(p, default_quadrature_points(p) + extra);
  const int n = mesh.num_nodes();
  const int nloc = fine.num_local();
  std::vector<std::vector<double>> rhs(M, std::vector<double>(n, 0.0));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double vol = mesh.geometry(e).volume;
    const int* nodes = mesh.element_nodes(e);
    for (int q = 0; q < fine.num_quad(); ++q) {
      const Vec<M> val = fn(mesh.map(e, fine.point(q)));
      for (int i = 0; i < nloc; ++i) {
        const double w = vol * fine.weight(q) * fine.value(q, i);
        for (int k = 0; k < M; ++k) rhs[k][nodes[i]] += w * val[k];
      }
    }
  }
  NodalField<M> b(n), u(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < M; ++k) b[j][k] = rhs[k][j];
    u[j] = (1.0 / mesh.lumped_mass(j)) * b[j];
  }
  MassMatrix<Dim>(mesh).template solve<M>(b, u, 1e-13, 2000);
  return u;
}

// Nodal sampling u_j = u_0(x_j).
template <int Dim, int M, class Fn>
NodalField<M> nodal_interpolation(const Mesh<Dim>& mesh, Fn&& fn) {
  NodalField<M> u(mesh.num_nodes());
  for (int j = 0; j < mesh.num_nodes(); ++j) u[j] = fn(mesh.node_coordinate(j));
  return u;
}

// Sum_i m_i u_i per component (total mass with lumping; exact for Bernstein).
template <int Dim, int M>
Vec<M> total_mass(const Mesh<Dim>& mesh, const NodalField<M>& u) {
  Vec<M> s{};
  for (int j = 0; j < mesh.num_nodes(); ++j) s += mesh.lumped_mass(j) * u[j];
  return s;
}

}  // namespace cgidp
