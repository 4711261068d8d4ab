#pragma once

// Benchmark problems: fluxes, wave-speed bounds, initial/boundary data and
// invariant domains; plus a first-order finite volume LLF reference solver.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cgidp/common.hpp"
#include "cgidp/euler.hpp"

namespace cgidp {

enum class InitMode { nodal, l2_projection };

template <int Dim, int M>
struct Problem {
  using State = Vec<M>;
  using Point = Vec<Dim>;
  using Flux = std::array<State, Dim>;  // flux[d][k]

  std::string name;
  Point lo{}, hi{};
  bool periodic = true;
  double t_final = 1.0;
  bool space_dependent = false;
  bool is_euler = false;
  double gamma = 1.4;
  InitMode init = InitMode::nodal;

  std::function<Flux(const Point&, const State&)> flux;
  // Upper bound for the maximum speed of the Riemann problem (uL, uR) along n.
  std::function<double(const Point&, const State&, const State&, const Point&)> max_speed;
  std::function<State(const Point&)> initial;
  // External state u_hat at a boundary point given the interior state.
  std::function<State(const Point&, double, const State&, const Point&)> boundary;
  // Scalar problems: f'(u) (directional velocity); used by the entropy sensor.
  std::function<Point(const Point&, double)> flux_derivative;
  std::optional<std::function<State(const Point&, double)>> exact;

  // Recommended WENO neighbour weight; smooth convergence tests want the
  // reconstruction to stay close to u_h.
  std::optional<double> weno_linear_weight;

  // Scalar invariant domain [lower, upper] (ignored for Euler).
  double lower = 0.0;
  double upper = 1.0;

  State flux_normal(const Point& x, const State& u, const Point& n) const {
    const Flux f = flux(x, u);
    State s{};
    for (int d = 0; d < Dim; ++d) s += n[d] * f[d];
    return s;
  }

  // Membership in G with an absolute slack `tol` on the scalar bounds.
  bool in_domain(const State& u, double tol = 0.0) const {
    if (is_euler) {
      if constexpr (M == 3) return euler::admissible(u, gamma);
      return false;
    }
    for (int k = 0; k < M; ++k)
      if (!(u[k] >= lower - tol && u[k] <= upper + tol)) return false;
    return true;
  }
};

// F(uL, uR; n) = (f(uL) + f(uR))/2 . n - lambda/2 (uR - uL)
template <int M>
Vec<M> llf_flux(const Vec<M>& fnL, const Vec<M>& fnR, const Vec<M>& uL, const Vec<M>& uR, double lambda) {
  Vec<M> F{};
  for (int k = 0; k < M; ++k) F[k] = 0.5 * (fnL[k] + fnR[k]) - 0.5 * lambda * (uR[k] - uL[k]);
  return F;
}

template <int Dim, int M>
Vec<M> llf_flux(const Problem<Dim, M>& pb, const Vec<Dim>& x, const Vec<M>& uL, const Vec<M>& uR,
                const Vec<Dim>& n, double lambda) {
  return llf_flux<M>(pb.flux_normal(x, uL, n), pb.flux_normal(x, uR, n), uL, uR, lambda);
}

// ---------------------------------------------------------------------------
// scalar speed bounds

// max |cos(theta)| for theta in [a, b]
inline double max_abs_cos(double a, double b) {
  if (a > b) std::swap(a, b);
  const double k = std::ceil(a / std::numbers::pi);
  if (k * std::numbers::pi <= b) return 1.0;
  return std::max(std::abs(std::cos(a)), std::abs(std::cos(b)));
}

// f(u) for the C^1 nonconvex flux with a kink in curvature at u = 1/2.
inline double nonconvex_flux(double u) {
  return u <= 0.5 ? 0.25 * u * (1.0 - u) : 0.5 * u * (u - 1.0) + 3.0 / 16.0;
}
inline double nonconvex_flux_derivative(double u) {
  return u <= 0.5 ? 0.25 * (1.0 - 2.0 * u) : 0.5 * (2.0 * u - 1.0);
}

// |f'| is convex for this flux, so the hull maximum sits at an endpoint.
inline double nonconvex_speed(double a, double b) {
  return std::max(std::abs(nonconvex_flux_derivative(a)), std::abs(nonconvex_flux_derivative(b)));
}

// f'(u).n = cos(u) n_x - sin(u) n_y = |n| cos(u + phi)
inline double kpp_speed(double a, double b, const Vec<2>& n) {
  const double phi = std::atan2(n[1], n[0]);
  return std::hypot(n[0], n[1]) * max_abs_cos(a + phi, b + phi);
}

// ---------------------------------------------------------------------------
// presets

namespace presets {

inline double gauss(double x) { return std::exp(-100.0 * (x - 0.5) * (x - 0.5)); }

inline double step_bump(double x) {
  if (x >= 0.2 && x <= 0.4) return 1.0;
  if (x > 0.5 && x < 0.9) return std::exp(10.0) * std::exp(1.0 / (0.5 - x)) * std::exp(1.0 / (x - 0.9));
  return 0.0;
}

inline double wrap01(double x) { return x - std::floor(x); }

template <int M>
Problem<1, M> base_1d(std::string name, double lo, double hi, bool periodic, double t_final) {
  Problem<1, M> pb;
  pb.name = std::move(name);
  pb.lo = {lo};
  pb.hi = {hi};
  pb.periodic = periodic;
  pb.t_final = t_final;
  pb.boundary = [](const Vec<1>&, double, const Vec<M>& u, const Vec<1>&) { return u; };
  return pb;
}

inline Problem<1, 1> linear_advection(std::string name, std::function<double(double)> u0, InitMode init) {
  auto pb = base_1d<1>(std::move(name), 0.0, 1.0, true, 1.0);
  pb.init = init;
  pb.flux = [](const Vec<1>&, const Vec<1>& u) { return std::array<Vec<1>, 1>{Vec<1>{u[0]}}; };
  pb.flux_derivative = [](const Vec<1>&, double) { return Vec<1>{1.0}; };
  pb.max_speed = [](const Vec<1>&, const Vec<1>&, const Vec<1>&, const Vec<1>& n) { return std::abs(n[0]); };
  pb.initial = [u0](const Vec<1>& x) { return Vec<1>{u0(x[0])}; };
  pb.exact = [u0](const Vec<1>& x, double t) { return Vec<1>{u0(wrap01(x[0] - t))}; };
  return pb;
}

inline Problem<1, 1> advect_gauss() {
  auto pb = linear_advection("advect_gauss", gauss, InitMode::l2_projection);
  pb.weno_linear_weight = 0.001;
  pb.lower = gauss(0.0);
  pb.upper = 1.0;
  return pb;
}

inline Problem<1, 1> advect_step_bump() {
  auto pb = linear_advection("advect_step_bump", step_bump, InitMode::nodal);
  pb.lower = 0.0;
  pb.upper = 1.0;
  return pb;
}

inline Problem<1, 1> nonconvex_1d() {
  auto pb = base_1d<1>("nonconvex_1d", 0.0, 1.0, false, 1.0);
  pb.flux = [](const Vec<1>&, const Vec<1>& u) { return std::array<Vec<1>, 1>{Vec<1>{nonconvex_flux(u[0])}}; };
  pb.flux_derivative = [](const Vec<1>&, double u) { return Vec<1>{nonconvex_flux_derivative(u)}; };
  pb.max_speed = [](const Vec<1>&, const Vec<1>& a, const Vec<1>& b, const Vec<1>& n) {
    return std::abs(n[0]) * nonconvex_speed(a[0], b[0]);
  };
  pb.initial = [](const Vec<1>& x) { return Vec<1>{x[0] >= 0.25 ? 1.0 : 0.0}; };
  // inflow u = 0 imposed weakly at x = 0; free outflow at x = 1
  pb.boundary = [](const Vec<1>& x, double, const Vec<1>& u, const Vec<1>&) {
    return x[0] < 0.5 ? Vec<1>{0.0} : u;
  };
  pb.lower = 0.0;
  pb.upper = 1.0;
  return pb;
}

// u(x, t) for u_t + (u^2/2)_x = 0, u_0 = sin(2 pi x), before shock formation.
inline double burgers_sine_exact(double x, double t) {
  const double tp = 2.0 * std::numbers::pi;
  // solve u = sin(2 pi (x - u t)) by Newton with a bisection fallback on [-1, 1]
  double lo = -1.0, hi = 1.0;
  double u = std::sin(tp * x);
  for (int it = 0; it < 100; ++it) {
    const double g = u - std::sin(tp * (x - u * t));
    if (g > 0.0) hi = u; else lo = u;
    const double dg = 1.0 + tp * t * std::cos(tp * (x - u * t));
    double un = u - g / dg;
    if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
    if (std::abs(un - u) < 1e-15) {
      u = un;
      break;
    }
    u = un;
  }
  return u;
}

inline Problem<1, 1> burgers_1d() {
  auto pb = base_1d<1>("burgers_1d", 0.0, 1.0, true, 0.1);
  pb.flux = [](const Vec<1>&, const Vec<1>& u) { return std::array<Vec<1>, 1>{Vec<1>{0.5 * u[0] * u[0]}}; };
  pb.flux_derivative = [](const Vec<1>&, double u) { return Vec<1>{u}; };
  pb.max_speed = [](const Vec<1>&, const Vec<1>& a, const Vec<1>& b, const Vec<1>& n) {
    return std::abs(n[0]) * std::max(std::abs(a[0]), std::abs(b[0]));
  };
  pb.initial = [](const Vec<1>& x) { return Vec<1>{std::sin(2.0 * std::numbers::pi * x[0])}; };
  pb.exact = [](const Vec<1>& x, double t) { return Vec<1>{burgers_sine_exact(x[0], t)}; };
  pb.weno_linear_weight = 0.001;
  pb.lower = -1.0;
  pb.upper = 1.0;
  return pb;
}

inline Problem<1, 3> euler_base(std::string name, double lo, double hi, double t_final) {
  auto pb = base_1d<3>(std::move(name), lo, hi, false, t_final);
  pb.is_euler = true;
  const double g = pb.gamma;
  pb.flux = [g](const Vec<1>&, const Vec<3>& u) { return std::array<Vec<3>, 1>{euler::flux(u, 1.0, g)}; };
  pb.max_speed = [g](const Vec<1>&, const Vec<3>& a, const Vec<3>& b, const Vec<1>& n) {
    return euler::max_wave_speed(a, b, n[0], g);
  };
  return pb;
}

inline Problem<1, 3> sod_modified() {
  auto pb = euler_base("sod_modified", 0.0, 1.0, 0.2);
  const euler::Primitive L{1.0, 0.75, 1.0}, R{0.125, 0.0, 0.1};
  const Vec<3> uL = euler::to_conserved(L), uR = euler::to_conserved(R);
  pb.initial = [uL, uR](const Vec<1>& x) { return x[0] < 0.25 ? uL : uR; };
  pb.boundary = [uL, uR](const Vec<1>& x, double, const Vec<3>&, const Vec<1>&) { return x[0] < 0.5 ? uL : uR; };
  pb.exact = [L, R](const Vec<1>& x, double t) {
    if (t <= 0.0) return euler::to_conserved(x[0] < 0.25 ? L : R);
    return euler::to_conserved(euler::exact_riemann(L, R, (x[0] - 0.25) / t));
  };
  return pb;
}

inline Problem<1, 3> blast_wave() {
  auto pb = euler_base("blast_wave", 0.0, 1.0, 0.038);
  pb.initial = [](const Vec<1>& x) {
    const double p = x[0] < 0.1 ? 1000.0 : (x[0] < 0.9 ? 0.01 : 100.0);
    return euler::to_conserved({1.0, 0.0, p});
  };
  // reflecting wall: mirror state with the normal velocity reversed
  pb.boundary = [](const Vec<1>&, double, const Vec<3>& u, const Vec<1>&) { return Vec<3>{u[0], -u[1], u[2]}; };
  return pb;
}

inline Problem<1, 3> shu_osher() {
  auto pb = euler_base("shu_osher", -5.0, 5.0, 1.8);
  pb.initial = [](const Vec<1>& x) {
    if (x[0] < -4.0) return euler::to_conserved({3.857143, 2.629369, 10.33333});
    return euler::to_conserved({1.0 + 0.2 * std::sin(5.0 * x[0]), 0.0, 1.0});
  };
  return pb;
}

// Slotted cylinder, cone and smooth hump of radius 0.15 on (0,1)^2.
inline double rotation_initial(double x, double y) {
  const double r0 = 0.15;
  auto radius = [&](double x0, double y0) { return std::hypot(x - x0, y - y0) / r0; };
  if (radius(0.5, 0.75) <= 1.0) return (std::abs(x - 0.5) >= 0.025 || y >= 0.85) ? 1.0 : 0.0;
  if (const double r = radius(0.5, 0.25); r <= 1.0) return 1.0 - r;
  if (const double r = radius(0.25, 0.5); r <= 1.0) return 0.25 * (1.0 + std::cos(std::numbers::pi * r));
  return 0.0;
}

inline Problem<2, 1> solid_body_rotation() {
  Problem<2, 1> pb;
  pb.name = "solid_body_rotation";
  pb.lo = {0.0, 0.0};
  pb.hi = {1.0, 1.0};
  pb.periodic = false;
  pb.t_final = 2.0 * std::numbers::pi;
  pb.space_dependent = true;
  auto vel = [](const Vec<2>& x) { return Vec<2>{0.5 - x[1], x[0] - 0.5}; };
  pb.flux = [vel](const Vec<2>& x, const Vec<1>& u) {
    const Vec<2> v = vel(x);
    return std::array<Vec<1>, 2>{Vec<1>{v[0] * u[0]}, Vec<1>{v[1] * u[0]}};
  };
  pb.flux_derivative = [vel](const Vec<2>& x, double) { return vel(x); };
  pb.max_speed = [vel](const Vec<2>& x, const Vec<1>&, const Vec<1>&, const Vec<2>& n) {
    return std::abs(dot(vel(x), n));
  };
  pb.initial = [](const Vec<2>& x) { return Vec<1>{rotation_initial(x[0], x[1])}; };
  pb.boundary = [](const Vec<2>&, double, const Vec<1>&, const Vec<2>&) { return Vec<1>{0.0}; };
  pb.exact = [](const Vec<2>& x, double t) {
    // rigid rotation about (0.5, 0.5) with unit angular velocity
    const double c = std::cos(t), s = std::sin(t);
    const double dx = x[0] - 0.5, dy = x[1] - 0.5;
    return Vec<1>{rotation_initial(0.5 + c * dx + s * dy, 0.5 - s * dx + c * dy)};
  };
  pb.lower = 0.0;
  pb.upper = 1.0;
  return pb;
}

inline Problem<2, 1> kpp() {
  Problem<2, 1> pb;
  pb.name = "kpp";
  pb.lo = {-2.0, -2.5};
  pb.hi = {2.0, 1.5};
  pb.periodic = false;
  pb.t_final = 1.0;
  const double outer = std::numbers::pi / 4.0, inner = 3.5 * std::numbers::pi;
  pb.flux = [](const Vec<2>&, const Vec<1>& u) {
    return std::array<Vec<1>, 2>{Vec<1>{std::sin(u[0])}, Vec<1>{std::cos(u[0])}};
  };
  pb.flux_derivative = [](const Vec<2>&, double u) { return Vec<2>{std::cos(u), -std::sin(u)}; };
  pb.max_speed = [](const Vec<2>&, const Vec<1>& a, const Vec<1>& b, const Vec<2>& n) {
    return kpp_speed(a[0], b[0], n);
  };
  pb.initial = [=](const Vec<2>& x) { return Vec<1>{std::hypot(x[0], x[1]) <= 1.0 ? inner : outer}; };
  pb.boundary = [=](const Vec<2>&, double, const Vec<1>&, const Vec<2>&) { return Vec<1>{outer}; };
  pb.lower = outer;
  pb.upper = inner;
  return pb;
}

}  // namespace presets

using AnyProblem = std::variant<Problem<1, 1>, Problem<1, 3>, Problem<2, 1>>;

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"advect_gauss", "advect_step_bump", "nonconvex_1d",
                                                 "burgers_1d",   "sod_modified",     "blast_wave",
                                                 "shu_osher",    "solid_body_rotation", "kpp"};
  return names;
}

inline AnyProblem preset(const std::string& name) {
  if (name == "advect_gauss") return presets::advect_gauss();
  if (name == "advect_step_bump") return presets::advect_step_bump();
  if (name == "nonconvex_1d") return presets::nonconvex_1d();
  if (name == "burgers_1d") return presets::burgers_1d();
  if (name == "sod_modified") return presets::sod_modified();
  if (name == "blast_wave") return presets::blast_wave();
  if (name == "shu_osher") return presets::shu_osher();
  if (name == "solid_body_rotation") return presets::solid_body_rotation();
  if (name == "kpp") return presets::kpp();
  throw UnknownPreset("unknown preset '" + name + "'");
}

// Speed bound of a scalar problem along n (wrapper used by tests and the CLI).
template <int Dim>
double llf_speed_scalar(const Problem<Dim, 1>& pb, double uL, double uR, const Vec<Dim>& n,
                        const Vec<Dim>& x = Vec<Dim>{}) {
  return pb.max_speed(x, Vec<1>{uL}, Vec<1>{uR}, n);
}

// ---------------------------------------------------------------------------
// first-order finite volume reference (1D)

// Cell averages at t_final of the LLF finite volume scheme with forward
// Euler steps at CFL 0.4. Cell averages of u_0 are taken by Gauss quadrature.
template <int M>
std::vector<Vec<M>> fv_llf_reference(const Problem<1, M>& pb, int n_cells, double t_final, double cfl = 0.4) {
  if (n_cells < 2) throw InvalidArgument("fv_llf_reference: need at least 2 cells");
  const double lo = pb.lo[0], h = (pb.hi[0] - lo) / n_cells;
  std::vector<Vec<M>> u(n_cells), un(n_cells), F(n_cells + 1);
  static constexpr double gp[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (int c = 0; c < n_cells; ++c) {
    Vec<M> s{};
    for (int q = 0; q < 3; ++q) s += (0.5 * gw[q]) * pb.initial({lo + h * (c + 0.5 + 0.5 * gp[q])});
    u[c] = s;
  }
  const Vec<1> n{1.0};
  double t = 0.0;
  std::vector<double> lam(n_cells + 1);
  while (t < t_final) {
    double lmax = 1e-300;
    for (int f = 0; f <= n_cells; ++f) {
      const Vec<1> x{lo + h * f};
      Vec<M> uL, uR;
      if (f == 0) {
        uR = u[0];
        uL = pb.periodic ? u[n_cells - 1] : pb.boundary(x, t, uR, Vec<1>{-1.0});
      } else if (f == n_cells) {
        uL = u[n_cells - 1];
        uR = pb.periodic ? u[0] : pb.boundary(x, t, uL, n);
      } else {
        uL = u[f - 1];
        uR = u[f];
      }
      lam[f] = pb.max_speed(x, uL, uR, n);
      lmax = std::max(lmax, lam[f]);
      F[f] = llf_flux<1, M>(pb, x, uL, uR, n, lam[f]);
    }
    double dt = cfl * h / lmax;
    const bool last = t + dt >= t_final;
    if (last) dt = t_final - t;
    for (int c = 0; c < n_cells; ++c) un[c] = u[c] - (dt / h) * (F[c + 1] - F[c]);
    u.swap(un);
    t = last ? t_final : t + dt;
    if (last) break;
  }
  return u;
}

}  // namespace cgidp
