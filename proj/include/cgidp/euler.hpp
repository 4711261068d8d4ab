#pragma once

// 1D compressible Euler equations for an ideal gas: conversions, flux,
// wave-speed bounds and the exact Riemann solver (two-shock/rarefaction
// pressure function, Newton with bisection safeguard).

#include <algorithm>
#include <cmath>

#include "cgidp/common.hpp"

namespace cgidp::euler {

using State = Vec<3>;  // (rho, rho v, rho E)

struct Primitive {
  double rho = 0.0;
  double v = 0.0;
  double p = 0.0;
};

inline double pressure(const State& u, double gamma = 1.4) {
  return (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]);
}

inline Primitive to_primitive(const State& u, double gamma = 1.4) {
  return {u[0], u[1] / u[0], pressure(u, gamma)};
}

inline State to_conserved(const Primitive& w, double gamma = 1.4) {
  return {w.rho, w.rho * w.v, w.p / (gamma - 1.0) + 0.5 * w.rho * w.v * w.v};
}

inline bool admissible(const State& u, double gamma = 1.4) {
  return std::isfinite(u[0]) && std::isfinite(u[1]) && std::isfinite(u[2]) && u[0] > 0.0 &&
         pressure(u, gamma) > 0.0;
}

// c = sqrt(max(0, gamma p / rho)); the clamp only matters for unlimited runs.
inline double sound_speed(const State& u, double gamma = 1.4) {
  return std::sqrt(std::max(0.0, gamma * pressure(u, gamma) / u[0]));
}

// Physical flux along the unit direction n (n = +-1 in 1D).
inline State flux(const State& u, double n = 1.0, double gamma = 1.4) {
  const double v = u[1] / u[0];
  const double p = pressure(u, gamma);
  return {n * u[1], n * (u[1] * v + p), n * v * (u[2] + p)};
}

// max(|v_L n| + c_L, |v_R n| + c_R)
inline double llf_speed_euler(const State& uL, const State& uR, double n = 1.0, double gamma = 1.4) {
  if (!admissible(uL, gamma) || !admissible(uR, gamma))
    throw InadmissibleState("llf_speed_euler: state with non-positive density or pressure");
  return std::max(std::abs(uL[1] / uL[0] * n) + sound_speed(uL, gamma),
                  std::abs(uR[1] / uR[0] * n) + sound_speed(uR, gamma));
}

// Guaranteed upper bound on the maximum wave speed of the Riemann problem
// (uL, uR) along n, from the two-rarefaction estimate of the star pressure
// (an upper bound for 1 < gamma <= 5/3).
inline double max_wave_speed(const State& uL, const State& uR, double n = 1.0, double gamma = 1.4) {
  const double rl = uL[0], rr = uR[0];
  const double vl = uL[1] / rl * n, vr = uR[1] / rr * n;
  const double pl = pressure(uL, gamma), pr = pressure(uR, gamma);
  if (!(rl > 0.0 && rr > 0.0 && pl > 0.0 && pr > 0.0)) {
    // only reachable in unlimited runs; fall back to the clamped estimate
    return std::max(std::abs(vl) + sound_speed(uL, gamma), std::abs(vr) + sound_speed(uR, gamma));
  }
  const double cl = std::sqrt(gamma * pl / rl), cr = std::sqrt(gamma * pr / rr);
  const double davis = std::max(std::abs(vl) + cl, std::abs(vr) + cr);
  if (uL == uR) return davis;  // p* = p, nothing beyond |v| + c
  const double z = (gamma - 1.0) / (2.0 * gamma);
  const double num = cl + cr - 0.5 * (gamma - 1.0) * (vr - vl);
  double pstar = 0.0;
  if (num > 0.0) pstar = std::pow(num / (cl * std::pow(pl, -z) + cr * std::pow(pr, -z)), 1.0 / z);
  const double k = (gamma + 1.0) / (2.0 * gamma);
  const double l1 = vl - cl * std::sqrt(1.0 + k * std::max(0.0, (pstar - pl) / pl));
  const double l3 = vr + cr * std::sqrt(1.0 + k * std::max(0.0, (pstar - pr) / pr));
  return std::max({davis, std::abs(l1), std::abs(l3)});
}

struct StarState {
  double p = 0.0;
  double v = 0.0;
  int iterations = 0;
};

namespace detail {

// Pressure function f_K(p) of one side and its derivative.
inline void pressure_function(double p, const Primitive& w, double gamma, double& f, double& df) {
  const double c = std::sqrt(gamma * w.p / w.rho);
  if (p > w.p) {
    const double a = 2.0 / ((gamma + 1.0) * w.rho);
    const double b = (gamma - 1.0) / (gamma + 1.0) * w.p;
    const double s = std::sqrt(a / (p + b));
    f = (p - w.p) * s;
    df = s * (1.0 - 0.5 * (p - w.p) / (p + b));
  } else {
    const double r = p / w.p;
    f = 2.0 * c / (gamma - 1.0) * (std::pow(r, (gamma - 1.0) / (2.0 * gamma)) - 1.0);
    df = 1.0 / (w.rho * c) * std::pow(r, -(gamma + 1.0) / (2.0 * gamma));
  }
}

}  // namespace detail

// Star-region pressure and velocity; tolerance is relative on p.
inline StarState star_state(const Primitive& L, const Primitive& R, double gamma = 1.4,
                            double tol = 1e-12) {
  if (!(L.rho > 0.0 && R.rho > 0.0 && L.p > 0.0 && R.p > 0.0))
    throw InadmissibleState("exact Riemann solver: non-positive density or pressure");
  const double cl = std::sqrt(gamma * L.p / L.rho);
  const double cr = std::sqrt(gamma * R.p / R.rho);
  const double dv = R.v - L.v;
  if (2.0 / (gamma - 1.0) * (cl + cr) <= dv)
    throw VacuumFormation("exact Riemann solver: initial data generate vacuum");

  auto F = [&](double p, double& f, double& df) {
    double fl, dfl, fr, dfr;
    detail::pressure_function(p, L, gamma, fl, dfl);
    detail::pressure_function(p, R, gamma, fr, dfr);
    f = fl + fr + dv;
    df = dfl + dfr;
  };

  // bracket: F is increasing, F(0+) < 0 by the vacuum check
  double lo = 0.0;
  double hi = std::max(L.p, R.p);
  double f, df;
  F(hi, f, df);
  while (f < 0.0) {
    lo = hi;
    hi *= 2.0;
    F(hi, f, df);
  }
  // PVRS initial guess, clipped to the bracket
  const double rho_bar = 0.5 * (L.rho + R.rho), c_bar = 0.5 * (cl + cr);
  double p = std::clamp(0.5 * (L.p + R.p) - 0.5 * dv * rho_bar * c_bar, 1e-14 * hi, hi);
  StarState out;
  for (int it = 1; it <= 200; ++it) {
    F(p, f, df);
    if (f > 0.0) hi = std::min(hi, p); else lo = std::max(lo, p);
    double pn = p - f / df;
    if (!(pn > lo && pn < hi)) pn = 0.5 * (lo + hi);
    const double change = 2.0 * std::abs(pn - p) / (pn + p);
    p = pn;
    out.iterations = it;
    if (change < tol || hi - lo < tol * p) break;
  }
  double fl, dfl, fr, dfr;
  detail::pressure_function(p, L, gamma, fl, dfl);
  detail::pressure_function(p, R, gamma, fr, dfr);
  out.p = p;
  out.v = 0.5 * (L.v + R.v) + 0.5 * (fr - fl);
  return out;
}

// Self-similar exact solution sampled at xi = x / t.
inline Primitive exact_riemann(const Primitive& L, const Primitive& R, double xi, double gamma = 1.4) {
  if (L.rho == R.rho && L.v == R.v && L.p == R.p) return L;
  const StarState s = star_state(L, R, gamma);
  const double g1 = (gamma - 1.0) / (gamma + 1.0);
  const double cl = std::sqrt(gamma * L.p / L.rho);
  const double cr = std::sqrt(gamma * R.p / R.rho);
  if (xi <= s.v) {
    if (s.p > L.p) {
      const double pr = s.p / L.p;
      const double shock = L.v - cl * std::sqrt((gamma + 1.0) / (2.0 * gamma) * pr + (gamma - 1.0) / (2.0 * gamma));
      if (xi <= shock) return L;
      return {L.rho * (pr + g1) / (g1 * pr + 1.0), s.v, s.p};
    }
    const double c_star = cl * std::pow(s.p / L.p, (gamma - 1.0) / (2.0 * gamma));
    const double head = L.v - cl, tail = s.v - c_star;
    if (xi <= head) return L;
    if (xi >= tail) return {L.rho * std::pow(s.p / L.p, 1.0 / gamma), s.v, s.p};
    const double f = 2.0 / (gamma + 1.0) + g1 / cl * (L.v - xi);
    return {L.rho * std::pow(f, 2.0 / (gamma - 1.0)), 2.0 / (gamma + 1.0) * (cl + 0.5 * (gamma - 1.0) * L.v + xi),
            L.p * std::pow(f, 2.0 * gamma / (gamma - 1.0))};
  }
  if (s.p > R.p) {
    const double pr = s.p / R.p;
    const double shock = R.v + cr * std::sqrt((gamma + 1.0) / (2.0 * gamma) * pr + (gamma - 1.0) / (2.0 * gamma));
    if (xi >= shock) return R;
    return {R.rho * (pr + g1) / (g1 * pr + 1.0), s.v, s.p};
  }
  const double c_star = cr * std::pow(s.p / R.p, (gamma - 1.0) / (2.0 * gamma));
  const double head = R.v + cr, tail = s.v + c_star;
  if (xi >= head) return R;
  if (xi <= tail) return {R.rho * std::pow(s.p / R.p, 1.0 / gamma), s.v, s.p};
  const double f = 2.0 / (gamma + 1.0) - g1 / cr * (R.v - xi);
  return {R.rho * std::pow(f, 2.0 / (gamma - 1.0)), 2.0 / (gamma + 1.0) * (-cr + 0.5 * (gamma - 1.0) * R.v + xi),
          R.p * std::pow(f, 2.0 * gamma / (gamma - 1.0))};
}

// Conserved-variable wrapper of exact_riemann.
inline State exact_riemann_euler(const State& uL, const State& uR, double xi, double gamma = 1.4) {
  if (!admissible(uL, gamma) || !admissible(uR, gamma))
    throw InadmissibleState("exact_riemann_euler: inadmissible input state");
  return to_conserved(exact_riemann(to_primitive(uL, gamma), to_primitive(uR, gamma), xi, gamma), gamma);
}

// Specific physical entropy weighted as in rho s / (1 - gamma).
inline double entropy_density(const State& u, double gamma = 1.4) {
  const double p = std::max(pressure(u, gamma), 1e-300);
  const double rho = std::max(u[0], 1e-300);
  return rho * std::log(p * std::pow(rho, -gamma)) / (1.0 - gamma);
}

}  // namespace cgidp::euler
