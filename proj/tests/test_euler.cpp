#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgidp/euler.hpp"

using namespace cgidp;
using namespace cgidp::euler;

TEST(Euler, PrimitiveRoundTrip) {
  const Primitive w{0.7, -1.3, 2.5};
  const auto u = to_conserved(w);
  const auto back = to_primitive(u);
  EXPECT_NEAR(back.rho, w.rho, 1e-15);
  EXPECT_NEAR(back.v, w.v, 1e-15);
  EXPECT_NEAR(back.p, w.p, 1e-14);
  EXPECT_TRUE(admissible(u));
  EXPECT_FALSE(admissible(State{1.0, 0.0, -1.0}));
  EXPECT_FALSE(admissible(State{-1.0, 0.0, 1.0}));
}

TEST(Euler, LlfSpeedExamples) {
  const State rest = to_conserved({1.0, 0.0, 1.0});
  EXPECT_NEAR(llf_speed_euler(rest, rest), std::sqrt(1.4), 1e-15);
  const State L = to_conserved({1.0, 0.75, 1.0}), R = to_conserved({0.125, 0.0, 0.1});
  EXPECT_NEAR(llf_speed_euler(L, R), 0.75 + std::sqrt(1.4), 1e-14);
  EXPECT_THROW(llf_speed_euler(State{0.0, 0.0, 1.0}, rest), InadmissibleState);
}

TEST(Euler, MaxWaveSpeedBoundsTheExactWaves) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> R(0.1, 3.0), V(-2.0, 2.0), P(0.05, 50.0);
  for (int k = 0; k < 500; ++k) {
    const Primitive L{R(rng), V(rng), P(rng)}, Rt{R(rng), V(rng), P(rng)};
    const auto uL = to_conserved(L), uR = to_conserved(Rt);
    double bound;
    try {
      bound = max_wave_speed(uL, uR);
    } catch (...) {
      FAIL();
    }
    EXPECT_GE(bound, llf_speed_euler(uL, uR) - 1e-14);
    StarState s;
    try {
      s = star_state(L, Rt);
    } catch (const VacuumFormation&) {
      continue;
    }
    const double g = 1.4;
    const double cl = std::sqrt(g * L.p / L.rho), cr = std::sqrt(g * Rt.p / Rt.rho);
    const double l1 = s.p > L.p ? L.v - cl * std::sqrt((g + 1) / (2 * g) * s.p / L.p + (g - 1) / (2 * g)) : L.v - cl;
    const double l3 = s.p > Rt.p ? Rt.v + cr * std::sqrt((g + 1) / (2 * g) * s.p / Rt.p + (g - 1) / (2 * g)) : Rt.v + cr;
    EXPECT_GE(bound, std::abs(l1) * (1 - 1e-12));
    EXPECT_GE(bound, std::abs(l3) * (1 - 1e-12));
  }
}

TEST(Euler, FluxConsistencyAndDirection) {
  const State u = to_conserved({1.2, 0.4, 0.9});
  const auto f = flux(u);
  const auto fm = flux(u, -1.0);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(fm[k], -f[k]);
  EXPECT_NEAR(f[0], 1.2 * 0.4, 1e-15);
  EXPECT_NEAR(f[1], 1.2 * 0.16 + 0.9, 1e-14);
}

TEST(RiemannSolver, IdenticalStates) {
  const Primitive w{0.5, 0.2, 0.3};
  for (double xi : {-3.0, 0.0, 0.2, 5.0}) {
    const auto r = exact_riemann(w, w, xi);
    EXPECT_DOUBLE_EQ(r.rho, w.rho);
    EXPECT_DOUBLE_EQ(r.v, w.v);
    EXPECT_DOUBLE_EQ(r.p, w.p);
  }
}

TEST(RiemannSolver, SodStarPressure) {
  const auto s = star_state({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1});
  EXPECT_NEAR(s.p, 0.30313, 1e-5);
  EXPECT_NEAR(s.v, 0.92745, 1e-5);
}

TEST(RiemannSolver, ShockSatisfiesRankineHugoniot) {
  const Primitive L{1.0, 0.0, 1.0}, R{0.125, 0.0, 0.1};
  const auto s = star_state(L, R);
  // right-moving shock: sample just behind and ahead of it
  const double g = 1.4, cr = std::sqrt(g * R.p / R.rho);
  const double S = R.v + cr * std::sqrt((g + 1) / (2 * g) * s.p / R.p + (g - 1) / (2 * g));
  const auto behind = to_conserved(exact_riemann(L, R, S - 1e-9));
  const auto ahead = to_conserved(exact_riemann(L, R, S + 1e-9));
  const auto fb = flux(behind), fa = flux(ahead);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(fb[k] - fa[k], S * (behind[k] - ahead[k]), 1e-8);
}

TEST(RiemannSolver, VacuumAndInadmissibleInputs) {
  EXPECT_THROW(star_state({1.0, -20.0, 0.1}, {1.0, 20.0, 0.1}), VacuumFormation);
  EXPECT_THROW(exact_riemann_euler(State{1.0, 0.0, -1.0}, to_conserved({1.0, 0.0, 1.0}), 0.0), InadmissibleState);
}

TEST(RiemannSolver, SolutionIsAdmissibleAcrossTheFan) {
  const auto uL = to_conserved({1.0, 0.0, 1000.0}), uR = to_conserved({1.0, 0.0, 0.01});
  for (int k = -100; k <= 100; ++k) EXPECT_TRUE(admissible(exact_riemann_euler(uL, uR, 0.5 * k)));
}
