// cgidp: command-line front end (solve / study / selftest).
//
// Settings come from an optional flat config file (--config) and are then
// overridden by --key value flags of the same names. Exit codes: 0 success,
// 2 configuration or I/O error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgidp/cgidp.hpp"

namespace {

using namespace cgidp;

struct Settings {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_setting_flags(CLI::App* app, Settings& s) {
  app->add_option("--config", s.config_file, "flat key = value config file");
  for (const auto& [key, help] : config_keys()) s.options[key] = app->add_option("--" + key, s.values[key], help);
}

RunConfig resolve(const Settings& s) {
  RunConfig c;
  if (!s.config_file.empty()) apply_settings(c, read_config(s.config_file));
  for (const auto& [key, opt] : s.options)
    if (opt->count() > 0) apply_setting(c, key, s.values.at(key));
  if (c.output_dir.empty())
    if (const char* env = std::getenv("CGIDP_OUTPUT_DIR"); env && *env) c.output_dir = env;
  return c;
}

void print_summary(const SolveSummary& s, const RunConfig& c) {
  std::printf("preset %s: %d nodes, %ld steps to t = %s\n", s.preset.c_str(), s.nodes, s.steps,
              format_number(s.t_final).c_str());
  for (std::size_t k = 0; k < s.names.size(); ++k)
    std::printf("  %-4s range [%s, %s]\n", s.names[k].c_str(), format_number(s.min[k]).c_str(),
                format_number(s.max[k]).c_str());
  if (s.l2_error) std::printf("  L2 error %.6e\n", *s.l2_error);
  std::printf("  min beta %.4g, alpha<1 facets %ld, retries %ld\n", s.stats.min_beta, s.stats.alpha_limited,
              s.stats.retries);
  if (!c.output_dir.empty()) std::printf("  outputs in %s\n", c.output_dir.c_str());
}

void print_study(const std::vector<StudyRow>& rows) {
  std::printf("%8s %12s %14s %8s %8s\n", "cells", "h", "L2 error", "EOC", "steps");
  for (const auto& r : rows) {
    char eoc[16] = "-";
    if (!std::isnan(r.eoc)) std::snprintf(eoc, sizeof eoc, "%.2f", r.eoc);
    std::printf("%8d %12.5e %14.6e %8s %8ld\n", r.cells, r.h, r.error, eoc, r.steps);
  }
}

// quick end-to-end checks; returns the number of failures
int selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("selftest %-26s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
    if (!ok) ++failures;
  };
  {
    RunConfig c;
    c.preset = "advect_gauss";
    c.variant = Variant::WENO;
    c.degree = 2;
    c.study_cells = {16, 32};
    const auto rows = study(c);
    report("advection convergence", rows[1].eoc > 2.5, "EOC " + format_number(rows[1].eoc));
  }
  {
    RunConfig c;
    c.preset = "advect_step_bump";
    c.variant = Variant::WENO_L;
    c.cells = 32;
    c.t_final = 0.25;
    const auto pb = std::get<Problem<1, 1>>(preset(c.preset));
    const auto mesh = build_interval_mesh(pb.lo[0], pb.hi[0], c.cells, c.degree, pb.periodic);
    const auto res = run(mesh, pb, scheme_config(c, pb), run_options(c, pb.t_final));
    const double m0 = res.history.front().mass[0], m1 = res.history.back().mass[0];
    const double drift = std::abs(m1 - m0) / std::abs(m0);
    const bool bounded = res.stats.min_stage_value >= -1e-12 && res.stats.max_stage_value <= 1.0 + 1e-12;
    report("conservation and bounds", drift < 1e-12 && bounded, "mass drift " + format_number(drift));
  }
  {
    RunConfig c;
    c.preset = "sod_modified";
    c.cells = 64;
    c.t_final = 0.1;
    const auto s = solve(c);
    report("euler positivity", s.stats.min_stage_rho > 0.0 && s.stats.min_stage_p > 0.0,
           "min rho " + format_number(s.stats.min_stage_rho) + ", min p " + format_number(s.stats.min_stage_p));
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CG Bernstein finite element solver with IDP limiting"};
  app.require_subcommand(1);
  Settings solve_settings, study_settings;
  auto* solve_cmd = app.add_subcommand("solve", "run a benchmark preset and write outputs");
  add_setting_flags(solve_cmd, solve_settings);
  auto* study_cmd = app.add_subcommand("study", "convergence study against the exact solution");
  add_setting_flags(study_cmd, study_settings);
  auto* selftest_cmd = app.add_subcommand("selftest", "quick end-to-end checks");
  app.add_flag_callback("--list-presets", [] {
    for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
    std::exit(0);
  }, "print the preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (solve_cmd->parsed()) {
      const RunConfig c = resolve(solve_settings);
      print_summary(solve(c), c);
    } else if (study_cmd->parsed()) {
      RunConfig c = resolve(study_settings);
      print_study(study(c));
      if (!c.output_dir.empty()) std::printf("eoc table in %s/eoc.csv\n", c.output_dir.c_str());
    } else if (selftest_cmd->parsed()) {
      return selftest() == 0 ? 0 : 3;
    }
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
