#pragma once

// Run configuration (flat key = value, same names as the CLI flags) and the
// solve / study drivers used by the command-line tool.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cgidp/common.hpp"
#include "cgidp/idp.hpp"
#include "cgidp/io.hpp"
#include "cgidp/mesh.hpp"
#include "cgidp/problems.hpp"
#include "cgidp/study.hpp"
#include "cgidp/time_integration.hpp"

namespace cgidp {

struct RunConfig {
  std::string preset;
  Variant variant = Variant::WENO_L;
  int degree = 1;
  int cells = 0;                      // per direction; 0 = preset default
  std::vector<int> study_cells{32, 64, 128, 256};
  double cfl = 0.5;
  std::optional<double> dt;           // fixed step (upper bound)
  std::optional<double> t_final;
  // WENO; unset values take the dimension-dependent defaults
  std::optional<double> q, eps, linear_weight;
  std::optional<int> r;
  BoundsMode bounds = BoundsMode::global;
  double floor = 1e-10;
  bool flux_limiter = false;
  bool entropy_fix = false;
  std::optional<Contributions> contributions;
  std::optional<DtPolicy> dt_policy;
  UdotMode udot = UdotMode::consistent;
  std::string output_dir;
  std::vector<double> snapshots;
  int threads = 1;
  bool quiet = false;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw InvalidArgument(key + ": expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    return parse_number(v);
  } catch (const InvalidArgument&) {
    throw InvalidArgument(key + ": expected a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != static_cast<int>(d)) throw InvalidArgument(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

template <class T, class Fn>
std::vector<T> parse_list(const std::string& v, Fn&& one) {
  std::vector<T> out;
  for (auto& item : split(v, ',')) {
    const auto a = item.find_first_not_of(' ');
    if (a == std::string::npos) continue;
    out.push_back(one(item.substr(a)));
  }
  return out;
}

}  // namespace detail

// Keys accepted in config files and as --key flags.
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"preset", "benchmark preset name"},
      {"variant", "LO, HO, WENO or WENO-L"},
      {"p", "polynomial degree"},
      {"cells", "cells per direction (study: comma-separated list)"},
      {"cfl", "CFL factor omega"},
      {"dt", "fixed time step (upper bound)"},
      {"t_final", "final time (default: preset)"},
      {"q", "WENO sensor exponent"},
      {"r", "WENO weight power"},
      {"eps", "WENO weight regularization"},
      {"linear_weight", "WENO linear weight of each neighbour candidate"},
      {"bounds", "slope limiter bounds: global or local"},
      {"floor", "Euler positivity floor relative to initial maxima"},
      {"flux_limiter", "limit the element fluxes (macrocell time step)"},
      {"entropy_fix", "entropy correction of the stabilization (scalar)"},
      {"contributions", "antidiffusive contributions: full or q1"},
      {"dt_policy", "fake time step: subcell, macrocell or shrink"},
      {"udot", "time derivative in the target: consistent or lumped"},
      {"output", "output directory"},
      {"snapshots", "comma-separated extra output times"},
      {"threads", "assembly threads"},
  };
  return keys;
}

// Applies one key/value pair; throws InvalidArgument on unknown keys or values.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "preset") c.preset = v;
  else if (key == "variant") c.variant = parse_variant(v);
  else if (key == "p") c.degree = parse_int(key, v);
  else if (key == "cells") {
    c.study_cells = parse_list<int>(v, [&](const std::string& s) { return parse_int(key, s); });
    if (c.study_cells.empty()) throw InvalidArgument("cells: empty list");
    c.cells = c.study_cells.back();
  } else if (key == "cfl") c.cfl = parse_double(key, v);
  else if (key == "dt") c.dt = parse_double(key, v);
  else if (key == "t_final") c.t_final = parse_double(key, v);
  else if (key == "q") c.q = parse_double(key, v);
  else if (key == "r") c.r = parse_int(key, v);
  else if (key == "eps") c.eps = parse_double(key, v);
  else if (key == "linear_weight") c.linear_weight = parse_double(key, v);
  else if (key == "bounds") {
    if (v == "global") c.bounds = BoundsMode::global;
    else if (v == "local") c.bounds = BoundsMode::local;
    else throw InvalidArgument("bounds: expected global or local, got '" + v + "'");
  } else if (key == "floor") c.floor = parse_double(key, v);
  else if (key == "flux_limiter") c.flux_limiter = parse_bool(key, v);
  else if (key == "entropy_fix") c.entropy_fix = parse_bool(key, v);
  else if (key == "contributions") {
    if (v == "full") c.contributions = Contributions::full;
    else if (v == "q1") c.contributions = Contributions::q1;
    else throw InvalidArgument("contributions: expected full or q1, got '" + v + "'");
  } else if (key == "dt_policy") {
    if (v == "subcell") c.dt_policy = DtPolicy::subcell;
    else if (v == "macrocell") c.dt_policy = DtPolicy::macrocell;
    else if (v == "shrink") c.dt_policy = DtPolicy::shrink;
    else throw InvalidArgument("dt_policy: expected subcell, macrocell or shrink, got '" + v + "'");
  } else if (key == "udot") {
    if (v == "consistent") c.udot = UdotMode::consistent;
    else if (v == "lumped") c.udot = UdotMode::lumped;
    else throw InvalidArgument("udot: expected consistent or lumped, got '" + v + "'");
  } else if (key == "output") c.output_dir = v;
  else if (key == "snapshots") c.snapshots = parse_list<double>(v, [&](const std::string& s) { return parse_double(key, s); });
  else if (key == "threads") c.threads = parse_int(key, v);
  else throw InvalidArgument("unknown config key '" + key + "'");
}

inline void apply_settings(RunConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) apply_setting(c, k, v);
}

// Cells per direction used when the config leaves it open.
inline int default_cells(const std::string& preset) {
  if (preset == "blast_wave") return 1000;
  if (preset == "sod_modified") return 200;
  if (preset == "shu_osher") return 400;
  if (preset == "solid_body_rotation" || preset == "kpp") return 64;
  return 128;
}

// Validates a config against its preset and builds the scheme settings.
template <int Dim, int M>
SchemeConfig scheme_config(const RunConfig& c, const Problem<Dim, M>& pb) {
  if (c.degree < 1) throw InvalidArgument("p must be >= 1");
  if (Dim == 2 && c.degree != 1) throw UnsupportedDegree("2D presets support p = 1 only");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw InvalidArgument("cfl must lie in (0, 1]");
  if (c.dt && !(*c.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (c.t_final && !(*c.t_final > 0.0)) throw InvalidArgument("t_final must be positive");
  if (c.threads < 1) throw InvalidArgument("threads must be >= 1");
  if (!(c.floor > 0.0 && c.floor < 1.0)) throw InvalidArgument("floor must lie in (0, 1)");
  if (c.entropy_fix && pb.is_euler) throw InvalidArgument("entropy_fix is only available for scalar presets");
  if (c.flux_limiter && pb.is_euler) throw InvalidArgument("flux_limiter is only available for scalar presets");
  for (double s : c.snapshots)
    if (!(s > 0.0)) throw InvalidArgument("snapshot times must be positive");
  SchemeConfig s = SchemeConfig::for_problem(pb);
  s.variant = c.variant;
  s.bounds = c.bounds;
  s.floor_rel = c.floor;
  s.entropy_fix = c.entropy_fix;
  s.udot = c.udot;
  s.threads = c.threads;
  if (c.contributions) s.contributions = *c.contributions;
  if (c.flux_limiter) s.enable_flux_limiter();
  if (c.dt_policy) s.dt_policy = *c.dt_policy;
  if (c.q) s.weno.q = *c.q;
  if (c.r) s.weno.r = *c.r;
  if (c.eps) s.weno.eps = *c.eps;
  if (c.linear_weight) s.weno.linear_weight = *c.linear_weight;
  s.weno.validate();
  return s;
}

inline RunOptions run_options(const RunConfig& c, double preset_t_final) {
  RunOptions o;
  o.cfl = c.cfl;
  o.fixed_dt = c.dt;
  o.t_final = c.t_final.value_or(preset_t_final);
  return o;
}

template <int Dim>
Mesh<Dim> make_mesh(const RunConfig& c, const Vec<Dim>& lo, const Vec<Dim>& hi, bool periodic) {
  const std::string& name = c.preset;
  const int n = c.cells > 0 ? c.cells : default_cells(name);
  if constexpr (Dim == 1) return build_interval_mesh(lo[0], hi[0], n, c.degree, periodic);
  else return build_quad_mesh(lo, hi, n, n, c.degree, periodic);
}

// Result summary printed by the CLI.
struct SolveSummary {
  std::string preset;
  int dim = 1;
  int nodes = 0;
  long steps = 0;
  double t_final = 0.0;
  std::vector<std::string> names;
  std::vector<double> min, max;
  std::optional<double> l2_error;
  RunStatistics stats;
};

namespace detail {

inline std::string snapshot_name(double t) {
  std::string s = format_number(t);
  for (char& ch : s)
    if (ch == '.') ch = 'p';
  return "solution_t" + s + ".csv";
}

template <int Dim, int M>
SolveSummary solve_problem(const RunConfig& c, const Problem<Dim, M>& pb) {
  const SchemeConfig sc = scheme_config(c, pb);
  const auto mesh = make_mesh<Dim>(c, pb.lo, pb.hi, pb.periodic);
  const RunOptions base = run_options(c, pb.t_final);
  const auto names = variable_names(M, pb.is_euler, Dim);
  const std::filesystem::path out = c.output_dir;
  const bool write = !c.output_dir.empty();

  Scheme<Dim, M> scheme(mesh, pb, sc);
  NodalField<M> u = initial_field(mesh, pb);
  scheme.calibrate(u);

  std::vector<double> stops;
  for (double s : c.snapshots)
    if (s < base.t_final) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(base.t_final);

  std::vector<StepRecord<M>> history;
  RunStatistics stats;
  double t = 0.0;
  long step_offset = 0;
  for (double stop : stops) {
    RunOptions o = base;
    o.t_final = stop;
    TimeIntegrator<Dim, M> ti(scheme, o);
    ti.reserve(u.size());
    ti.run(u, t);
    auto h = ti.history();
    for (std::size_t i = history.empty() ? 0 : 1; i < h.size(); ++i) {
      h[i].step += step_offset;
      history.push_back(h[i]);
    }
    const auto& s = ti.statistics();
    step_offset += s.steps;
    stats.steps += s.steps;
    stats.stages += s.stages;
    stats.retries += s.retries;
    stats.min_beta = std::min(stats.min_beta, s.min_beta);
    stats.min_gamma = std::min(stats.min_gamma, s.min_gamma);
    stats.alpha_limited += s.alpha_limited;
    stats.halvings += s.halvings;
    stats.ubar_violations += s.ubar_violations;
    stats.max_zero_sum_ratio = std::max(stats.max_zero_sum_ratio, s.max_zero_sum_ratio);
    stats.min_stage_rho = std::min(stats.min_stage_rho, s.min_stage_rho);
    stats.min_stage_p = std::min(stats.min_stage_p, s.min_stage_p);
    stats.min_stage_value = std::min(stats.min_stage_value, s.min_stage_value);
    stats.max_stage_value = std::max(stats.max_stage_value, s.max_stage_value);
    t = stop;
    if (write && stop != base.t_final) write_solution<Dim, M>(out / snapshot_name(stop), mesh, u, names);
  }

  SolveSummary sum;
  sum.preset = pb.name;
  sum.dim = Dim;
  sum.nodes = mesh.num_nodes();
  sum.steps = stats.steps;
  sum.t_final = t;
  sum.names = names;
  sum.stats = stats;
  for (int k = 0; k < M; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : u) {
      lo = std::min(lo, v[k]);
      hi = std::max(hi, v[k]);
    }
    sum.min.push_back(lo);
    sum.max.push_back(hi);
  }
  if (pb.exact && !pb.is_euler) {
    const auto& ex = *pb.exact;
    sum.l2_error = l2_error<Dim, M>(mesh, u, [&](const Vec<Dim>& x) { return ex(x, t); })[0];
  }
  if (write) {
    // refresh gamma_e / beta_e for the final state
    NodalField<M> du;
    scheme.rhs(u, t, du);
    write_solution<Dim, M>(out / "solution.csv", mesh, u, names);
    write_cells<Dim, M>(out / "cells.csv", mesh, u, names, scheme.gammas(), scheme.betas());
    write_history<M>(out / "history.csv", history, names);
    write_range<M>(out / "range.txt", u, names);
  }
  return sum;
}

}  // namespace detail

// Runs a preset as configured and writes outputs to c.output_dir (if set).
inline SolveSummary solve(const RunConfig& c) {
  if (c.preset.empty()) throw InvalidArgument("no preset given");
  const AnyProblem any = preset(c.preset);
  return std::visit([&](const auto& pb) { return detail::solve_problem(c, pb); }, any);
}

// Convergence study over c.study_cells; writes eoc.csv when c.output_dir is set.
inline std::vector<StudyRow> study(const RunConfig& c) {
  if (c.preset.empty()) throw InvalidArgument("no preset given");
  const AnyProblem any = preset(c.preset);
  const auto* pb = std::get_if<Problem<1, 1>>(&any);
  if (!pb || !pb->exact) throw InvalidArgument("study needs a 1D scalar preset with an exact solution");
  if (c.study_cells.size() < 2) throw InvalidArgument("study needs at least two meshes");
  const SchemeConfig sc = scheme_config(c, *pb);
  const auto rows = convergence_study(*pb, sc, c.degree, c.study_cells, run_options(c, pb->t_final));
  if (!c.output_dir.empty()) write_eoc(std::filesystem::path(c.output_dir) / "eoc.csv", rows);
  return rows;
}

}  // namespace cgidp
