#pragma once

// Error norms against exact solutions and mesh-refinement convergence studies.

#include <cmath>
#include <vector>

#include "cgidp/bernstein.hpp"
#include "cgidp/field.hpp"
#include "cgidp/mesh.hpp"
#include "cgidp/problems.hpp"
#include "cgidp/time_integration.hpp"

namespace cgidp {

// ||u_h - u_exact(., t)||_{L2} per component, by an over-integrating tensor Gauss rule.
template <int Dim, int M, class Exact>
Vec<M> l2_error(const Mesh<Dim>& mesh, const NodalField<M>& u, Exact&& exact, int extra = 6) {
  const BasisTable<Dim> basis(mesh.degree(), mesh.degree() + 1 + extra);
  const int nloc = mesh.nodes_per_element();
  Vec<M> err{};
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int* nodes = mesh.element_nodes(e);
    const double vol = mesh.geometry(e).volume;
    for (int q = 0; q < basis.num_quad(); ++q) {
      Vec<M> uq{};
      for (int j = 0; j < nloc; ++j) uq += basis.value(q, j) * u[nodes[j]];
      const Vec<M> d = uq - exact(mesh.map(e, basis.point(q)));
      for (int k = 0; k < M; ++k) err[k] += vol * basis.weight(q) * d[k] * d[k];
    }
  }
  for (auto& v : err) v = std::sqrt(v);
  return err;
}

// L1 distance of the element averages of u to a piecewise-constant reference
// on [lo, hi] with n_ref uniform cells (1D).
inline double l1_distance_to_cells(const Mesh<1>& mesh, const NodalField<1>& u, const std::vector<double>& ref,
                                   double lo, double hi, int samples_per_element = 64) {
  const BasisTable<1> basis(mesh.degree(), samples_per_element);
  const int nloc = mesh.nodes_per_element();
  const double href = (hi - lo) / static_cast<double>(ref.size());
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int* nodes = mesh.element_nodes(e);
    const double vol = mesh.geometry(e).volume;
    for (int q = 0; q < basis.num_quad(); ++q) {
      double uq = 0.0;
      for (int j = 0; j < nloc; ++j) uq += basis.value(q, j) * u[nodes[j]][0];
      const double x = mesh.map(e, basis.point(q))[0];
      int c = static_cast<int>((x - lo) / href);
      c = std::clamp(c, 0, static_cast<int>(ref.size()) - 1);
      s += vol * basis.weight(q) * std::abs(uq - ref[c]);
    }
  }
  return s;
}

struct StudyRow {
  int cells = 0;
  double h = 0.0;
  double error = 0.0;
  double eoc = std::nan("");
  long steps = 0;
};

// Runs a scalar 1D problem with an exact solution on successively refined
// meshes and reports L2 errors with EOC = log2(err_coarse / err_fine).
inline std::vector<StudyRow> convergence_study(const Problem<1, 1>& pb, const SchemeConfig& cfg, int degree,
                                               const std::vector<int>& cells, RunOptions opts = {}) {
  if (!pb.exact) throw InvalidArgument("convergence study requires a preset with an exact solution");
  std::vector<StudyRow> rows;
  for (int n : cells) {
    const auto mesh = build_interval_mesh(pb.lo[0], pb.hi[0], n, degree, pb.periodic);
    auto res = run(mesh, pb, cfg, opts);
    const double tf = opts.t_final > 0.0 ? opts.t_final : pb.t_final;
    const auto& ex = *pb.exact;
    StudyRow r;
    r.cells = n;
    r.h = (pb.hi[0] - pb.lo[0]) / n;
    r.error = l2_error<1, 1>(mesh, res.u, [&](const Vec<1>& x) { return ex(x, tf); })[0];
    r.steps = res.stats.steps;
    if (!rows.empty() && r.error > 0.0 && rows.back().error > 0.0)
      r.eoc = std::log2(rows.back().error / r.error) / std::log2(r.h > 0 ? rows.back().h / r.h : 2.0);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cgidp
