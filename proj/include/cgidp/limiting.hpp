#pragma once

// Convex limiting building blocks: the localized FCT flux limiter for the
// intermediate cell averages, the element slope limiter (scalar bounds) and
// the density/pressure positivity factor for the Euler equations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cgidp/common.hpp"
#include "cgidp/euler.hpp"
#include "cgidp/mesh.hpp"

namespace cgidp {

enum class BoundsMode { global, local };

// Per-element data entering the flux limiter.
struct FluxLimiterSide {
  double volume_over_perimeter = 0.0;  // |K| / |dK|
  double u_low = 0.0;                  // u^{e,L}
  double u_min = 0.0;
  double u_max = 0.0;
  double dt = 0.0;                     // fake time step
};

// Limited antidiffusive flux across a facet of e (outward from e). A null
// neighbour means a boundary facet (one-sided bounds).
inline double limited_antidiffusive_flux(double fA, const FluxLimiterSide& e, const FluxLimiterSide* nb) {
  if (fA >= 0.0) {
    double fmax = e.volume_over_perimeter * (e.u_max - e.u_low) / e.dt;
    if (nb) fmax = std::min(fmax, nb->volume_over_perimeter * (nb->u_low - nb->u_min) / nb->dt);
    return std::min(fA, std::max(0.0, fmax));
  }
  double fmin = e.volume_over_perimeter * (e.u_min - e.u_low) / e.dt;
  if (nb) fmin = std::max(fmin, nb->volume_over_perimeter * (nb->u_low - nb->u_max) / nb->dt);
  return std::max(fA, std::min(0.0, fmin));
}

// beta_{i,e} from the FCT formula, clamped to [0,1].
inline double slope_correction_factor_scalar(double ubar, double f, double m, double u_min, double u_max) {
  double beta = 1.0;
  if (f > 0.0) beta = std::min(1.0, m * (u_max - ubar) / f);
  else if (f < 0.0) beta = std::min(1.0, m * (u_min - ubar) / f);
  return std::clamp(beta, 0.0, 1.0);
}

// beta_e = min_i beta_{i,e}
inline double slope_correction_factor_scalar(double ubar, std::span<const double> f, double m,
                                             std::span<const double> u_min, std::span<const double> u_max) {
  double beta = 1.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    beta = std::min(beta, slope_correction_factor_scalar(ubar, f[i], m, u_min[i], u_max[i]));
  return beta;
}

namespace detail {

// Smallest root in (0, inf) of a b^2 + b b + c with c >= 0 where the
// polynomial becomes negative; +inf if it stays nonnegative on (0, inf).
inline double first_negative_crossing(double a, double b, double c) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a == 0.0) return b < 0.0 ? -c / b : inf;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return a > 0.0 ? inf : 0.0;
  const double sq = std::sqrt(disc);
  // numerically stable pair of roots
  const double qq = -0.5 * (b + std::copysign(sq, b));
  double r1 = qq / a;
  double r2 = qq != 0.0 ? c / qq : r1;
  if (r1 > r2) std::swap(r1, r2);
  if (a > 0.0) {
    // negative between the roots
    if (r2 <= 0.0) return inf;
    return std::max(r1, 0.0);
  }
  // a < 0: negative beyond the larger root
  return std::max(r2, 0.0);
}

}  // namespace detail

struct PositivityFloors {
  double rho = 0.0;
  double p = 0.0;
};

// beta_e such that ubar + beta f_i/m keeps rho >= eps_rho and p >= eps_p for
// every node i (the pressure constraint is the quadratic
// rho E rho - |m|^2/2 >= eps_p/(gamma-1) rho in beta).
inline double euler_positivity_factor(const euler::State& ubar, std::span<const euler::State> f, double m,
                                      const PositivityFloors& floors, double gamma = 1.4) {
  if (!(ubar[0] >= floors.rho) || !(euler::pressure(ubar, gamma) >= floors.p))
    throw InadmissibleState("euler_positivity_factor: intermediate average violates the positivity floors");
  const double kappa = floors.p / (gamma - 1.0);
  double beta = 1.0;
  for (const auto& fi : f) {
    const euler::State d = (1.0 / m) * fi;
    double b = 1.0;
    if (ubar[0] + d[0] < floors.rho) b = (ubar[0] - floors.rho) / (-d[0]);
    const double qa = d[0] * d[2] - 0.5 * d[1] * d[1];
    const double qb = ubar[0] * d[2] + d[0] * ubar[2] - ubar[1] * d[1] - kappa * d[0];
    const double qc = ubar[0] * ubar[2] - 0.5 * ubar[1] * ubar[1] - kappa * ubar[0];
    b = std::clamp(std::min(b, detail::first_negative_crossing(qa, qb, std::max(qc, 0.0))), 0.0, 1.0);
    // near the density floor the quadratic loses p to cancellation; fall back
    // to bisection on the admissible segment [0, b]
    auto ok = [&](double t) {
      const euler::State v = ubar + t * d;
      return v[0] >= floors.rho && euler::pressure(v, gamma) >= floors.p;
    };
    if (b > 0.0 && !ok(b)) {
      double lo = 0.0, hi = b;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
      }
      b = lo;
    }
    beta = std::min(beta, b);
  }
  return beta;
}

// Element and nodal bounds for the scalar limiters.
struct ScalarBounds {
  BoundsMode mode = BoundsMode::global;
  std::vector<double> elem_min, elem_max;
  std::vector<double> node_min, node_max;
};

// Global mode: every bound is [lower, upper]. Local mode: element bounds from
// the facet-neighbour averages, nodal bounds from the averages of E_i; both
// are widened by the element's own intermediate low-order average.
template <int Dim>
ScalarBounds compute_bounds(const Mesh<Dim>& mesh, std::span<const double> averages,
                            std::span<const double> ubar_low, double lower, double upper, BoundsMode mode) {
  const int E = mesh.num_elements();
  ScalarBounds b;
  b.mode = mode;
  b.elem_min.assign(E, lower);
  b.elem_max.assign(E, upper);
  b.node_min.assign(mesh.num_nodes(), lower);
  b.node_max.assign(mesh.num_nodes(), upper);
  if (mode == BoundsMode::global) return b;
  for (int e = 0; e < E; ++e) {
    double lo = averages[e], hi = averages[e];
    for (int f = 0; f < 2 * Dim; ++f) {
      const auto& link = mesh.facet(e, f);
      if (link.is_boundary(E)) continue;
      lo = std::min(lo, averages[link.neighbour]);
      hi = std::max(hi, averages[link.neighbour]);
    }
    if (!ubar_low.empty()) {
      lo = std::min(lo, ubar_low[e]);
      hi = std::max(hi, ubar_low[e]);
    }
    b.elem_min[e] = std::max(lo, lower);
    b.elem_max[e] = std::min(hi, upper);
  }
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int e : mesh.node_elements(j)) {
      lo = std::min(lo, b.elem_min[e]);
      hi = std::max(hi, b.elem_max[e]);
    }
    b.node_min[j] = lo;
    b.node_max[j] = hi;
  }
  return b;
}

}  // namespace cgidp
