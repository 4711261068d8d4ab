#include <gtest/gtest.h>

#include <filesystem>

#include "cgidp/driver.hpp"

using namespace cgidp;
namespace fs = std::filesystem;

TEST(Settings, ParsesKnownKeys) {
  RunConfig c;
  apply_setting(c, "preset", "kpp");
  apply_setting(c, "variant", "WENO");
  apply_setting(c, "cells", "16, 32,64");
  apply_setting(c, "flux_limiter", "on");
  apply_setting(c, "dt_policy", "macrocell");
  apply_setting(c, "snapshots", "0.1,0.2");
  EXPECT_EQ(c.variant, Variant::WENO);
  EXPECT_EQ(c.study_cells, (std::vector<int>{16, 32, 64}));
  EXPECT_EQ(c.cells, 64);
  EXPECT_TRUE(c.flux_limiter);
  EXPECT_EQ(c.dt_policy, DtPolicy::macrocell);
  EXPECT_EQ(c.snapshots.size(), 2u);
  for (const auto& [k, help] : config_keys()) EXPECT_FALSE(help.empty()) << k;
}

TEST(Settings, RejectsBadValues) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "nope", "1"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "p", "1.5"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "cfl", "fast"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "bounds", "tight"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "entropy_fix", "maybe"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "cells", ""), InvalidArgument);
}

TEST(SchemeSettings, Validation) {
  const auto sod = std::get<Problem<1, 3>>(preset("sod_modified"));
  const auto kpp = std::get<Problem<2, 1>>(preset("kpp"));
  RunConfig c;
  c.cfl = 0.0;
  EXPECT_THROW(scheme_config(c, sod), InvalidArgument);
  c = RunConfig{};
  c.entropy_fix = true;
  EXPECT_THROW(scheme_config(c, sod), InvalidArgument);
  c = RunConfig{};
  c.flux_limiter = true;
  EXPECT_THROW(scheme_config(c, sod), InvalidArgument);
  c = RunConfig{};
  c.degree = 2;
  EXPECT_THROW(scheme_config(c, kpp), UnsupportedDegree);
  c = RunConfig{};
  c.linear_weight = 0.5;
  EXPECT_THROW(scheme_config(c, sod), InvalidArgument);
  c = RunConfig{};
  c.flux_limiter = true;
  const auto s = scheme_config(c, kpp);
  EXPECT_EQ(s.flux_mode, FluxMode::limited);
  EXPECT_EQ(s.dt_policy, DtPolicy::macrocell);
}

TEST(Solve, WritesOutputs) {
  const auto dir = fs::temp_directory_path() / "cgidp_test_driver";
  fs::remove_all(dir);
  RunConfig c;
  c.preset = "advect_step_bump";
  c.cells = 32;
  c.t_final = 0.1;
  c.snapshots = {0.05};
  c.output_dir = dir.string();
  const auto s = solve(c);
  EXPECT_GT(s.steps, 0);
  EXPECT_DOUBLE_EQ(s.t_final, 0.1);
  EXPECT_GE(s.min[0], -1e-12);
  EXPECT_LE(s.max[0], 1.0 + 1e-12);
  ASSERT_TRUE(s.l2_error.has_value());
  for (const char* f : {"solution.csv", "cells.csv", "history.csv", "range.txt", "solution_t0p05.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto h = read_csv(dir / "history.csv");
  EXPECT_EQ(static_cast<long>(h.rows.size()), s.steps + 1);
  EXPECT_EQ(h.rows.back()[h.column("step")], static_cast<double>(s.steps));
}

TEST(Solve, UnknownPresetAndStudyRequirements) {
  RunConfig c;
  c.preset = "missing";
  EXPECT_THROW(solve(c), UnknownPreset);
  c.preset = "sod_modified";
  EXPECT_THROW(study(c), InvalidArgument);
  c.preset = "advect_gauss";
  c.study_cells = {16};
  EXPECT_THROW(study(c), InvalidArgument);
}

TEST(Study, ReportsDecreasingErrors) {
  RunConfig c;
  c.preset = "advect_gauss";
  c.variant = Variant::WENO_L;
  c.degree = 1;
  c.study_cells = {32, 64};
  c.t_final = 0.2;
  const auto rows = study(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[1].error, rows[0].error);
  EXPECT_GT(rows[1].eoc, 1.5);
}
