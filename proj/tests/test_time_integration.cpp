#include <gtest/gtest.h>

#include <cmath>

#include "cgidp/study.hpp"
#include "cgidp/time_integration.hpp"

using namespace cgidp;

TEST(GlobalStep, ClipsToFinalTime) {
  EXPECT_DOUBLE_EQ(global_time_step(0.1, 0.5, 0.0, 1.0), 0.05);
  EXPECT_DOUBLE_EQ(global_time_step(0.1, 0.5, 0.98, 1.0), 1.0 - 0.98);
  EXPECT_DOUBLE_EQ(global_time_step(0.1, 0.5, 0.0, 1.0, 0.01), 0.01);
  EXPECT_THROW(global_time_step(0.0, 0.5, 0.0, 1.0), NumericalError);
}

TEST(TotalEntropy, SquareEntropyOfKnownField) {
  const auto m = build_interval_mesh(0.0, 2.0, 10, 2, true);
  const BasisTable<1> b(2, 3);
  const NodalField<1> u(m.num_nodes(), Vec<1>{3.0});
  EXPECT_NEAR((total_entropy<1, 1>(m, b, u, false)), 0.5 * 9.0 * 2.0, 1e-12);
}

TEST(Integrator, OptionsValidation) {
  const auto m = build_interval_mesh(0.0, 1.0, 8, 1, true);
  const auto pb = std::get<Problem<1, 1>>(preset("advect_step_bump"));
  Scheme<1, 1> s(m, pb, SchemeConfig::defaults(1));
  RunOptions o;
  o.t_final = 0.1;
  o.cfl = 1.5;
  EXPECT_THROW((TimeIntegrator<1, 1>(s, o)), InvalidArgument);
  o.cfl = 0.5;
  o.fixed_dt = -1.0;
  EXPECT_THROW((TimeIntegrator<1, 1>(s, o)), InvalidArgument);
}

TEST(Integrator, MaxStepsIsReported) {
  const auto m = build_interval_mesh(0.0, 1.0, 16, 1, true);
  const auto pb = std::get<Problem<1, 1>>(preset("advect_step_bump"));
  RunOptions o;
  o.max_steps = 3;
  EXPECT_THROW(run(m, pb, SchemeConfig::defaults(1), o), NumericalError);
}

TEST(Integrator, FixedStepIsAnUpperBound) {
  const auto m = build_interval_mesh(0.0, 1.0, 32, 1, true);
  const auto pb = std::get<Problem<1, 1>>(preset("advect_step_bump"));
  RunOptions o;
  o.t_final = 0.1;
  o.fixed_dt = 0.5;  // far above the stable step
  const auto res = run(m, pb, SchemeConfig::defaults(1), o);
  EXPECT_NEAR(res.history.back().t, 0.1, 1e-15);
  // reduced to at most the element fake step (h/4 for P1)
  for (std::size_t i = 1; i < res.history.size(); ++i) EXPECT_LE(res.history[i].dt, 0.25 / 32.0 + 1e-15);
  EXPECT_GE(res.stats.min_stage_value, -1e-12);
  EXPECT_LE(res.stats.max_stage_value, 1.0 + 1e-12);
  // a small fixed step is used as given
  o.fixed_dt = 1e-3;
  const auto small = run(m, pb, SchemeConfig::defaults(1), o);
  EXPECT_EQ(small.stats.steps, 100);
}

TEST(Integrator, HistoryConservesMassAndStaysInBounds) {
  const auto m = build_interval_mesh(0.0, 1.0, 32, 2, true);
  const auto pb = std::get<Problem<1, 1>>(preset("advect_step_bump"));
  RunOptions o;
  o.t_final = 0.2;
  const auto res = run(m, pb, SchemeConfig::defaults(1), o);
  ASSERT_GE(res.history.size(), 2u);
  EXPECT_EQ(res.history.front().step, 0);
  const double m0 = res.history.front().mass[0];
  for (const auto& r : res.history) {
    EXPECT_NEAR(r.mass[0], m0, 1e-13);
    EXPECT_GE(r.min[0], -1e-12);
    EXPECT_LE(r.max[0], 1.0 + 1e-12);
  }
  EXPECT_EQ(res.stats.steps, static_cast<long>(res.history.size()) - 1);
}

TEST(Integrator, StageObserverSeesThreeStagesPerStep) {
  const auto m = build_interval_mesh(0.0, 1.0, 16, 1, true);
  const auto pb = std::get<Problem<1, 1>>(preset("advect_step_bump"));
  Scheme<1, 1> s(m, pb, SchemeConfig::defaults(1));
  auto u = initial_field(m, pb);
  s.calibrate(u);
  RunOptions o;
  o.t_final = 0.05;
  TimeIntegrator<1, 1> ti(s, o);
  long stages = 0;
  ti.on_stage = [&](const NodalField<1>&, int) { ++stages; };
  ti.run(u);
  EXPECT_EQ(ti.statistics().stages, 3 * ti.statistics().steps);
  EXPECT_GE(stages, ti.statistics().stages);
}

TEST(Integrator, SmoothAdvectionConvergesAtHighOrder) {
  const auto pb = std::get<Problem<1, 1>>(preset("advect_gauss"));
  auto cfg = SchemeConfig::for_problem(pb);
  cfg.variant = Variant::WENO;
  RunOptions o;
  o.t_final = 0.25;
  const auto rows = convergence_study(pb, cfg, 2, {32, 64}, o);
  EXPECT_GT(rows[1].eoc, 2.5);
}

TEST(Integrator, BurgersBeforeShockFormation) {
  const auto pb = std::get<Problem<1, 1>>(preset("burgers_1d"));
  auto cfg = SchemeConfig::for_problem(pb);
  cfg.variant = Variant::WENO_L;
  const auto rows = convergence_study(pb, cfg, 2, {32, 64});
  EXPECT_LT(rows[1].error, rows[0].error);
  EXPECT_GT(rows[1].eoc, 1.5);
}

TEST(Integrator, EulerStagesStayPositive) {
  const auto pb = std::get<Problem<1, 3>>(preset("sod_modified"));
  const auto m = build_interval_mesh(0.0, 1.0, 100, 1, false);
  RunOptions o;
  o.t_final = 0.2;
  const auto res = run(m, pb, SchemeConfig::for_problem(pb), o);
  EXPECT_GT(res.stats.min_stage_rho, 0.0);
  EXPECT_GT(res.stats.min_stage_p, 0.0);
  const auto l1 = l2_error<1, 3>(m, res.u, [&](const Vec<1>& x) { return (*pb.exact)(x, 0.2); });
  EXPECT_LT(l1[0], 0.05);
}
