#pragma once

// Explicit SSP-RK3 (Shu-Osher form) driver with adaptive global time steps,
// per-stage admissibility checks and conservation/entropy history.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cgidp/common.hpp"
#include "cgidp/euler.hpp"
#include "cgidp/field.hpp"
#include "cgidp/idp.hpp"

namespace cgidp {

template <int M>
struct StepRecord {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  Vec<M> mass{};
  double entropy = 0.0;
  Vec<M> min{}, max{};
  double min_beta = 1.0;
  long alpha_limited = 0;
  int retries = 0;
};

// Statistics accumulated over all stages of a run.
struct RunStatistics {
  long steps = 0;
  long stages = 0;
  long retries = 0;
  double min_beta = 1.0;
  double min_gamma = 1.0;
  long alpha_limited = 0;
  long halvings = 0;
  long ubar_violations = 0;
  double max_zero_sum_ratio = 0.0;
  double min_stage_rho = std::numeric_limits<double>::infinity();
  double min_stage_p = std::numeric_limits<double>::infinity();
  double min_stage_value = std::numeric_limits<double>::infinity();
  double max_stage_value = -std::numeric_limits<double>::infinity();
};

struct RunOptions {
  double t_final = 0.0;
  double cfl = 0.5;                    // omega
  std::optional<double> fixed_dt;      // upper bound on the marching step
  long max_steps = 50'000'000;
  int max_retries = 30;
  bool record_history = true;
  std::optional<bool> check_stages;    // default: limited variants and LO
};

// Delta t = omega min_e Delta t_e, clipped so that t + Delta t <= t_final.
inline double global_time_step(double min_dt_e, double cfl, double t, double t_final,
                               std::optional<double> fixed = std::nullopt) {
  double dt = fixed ? *fixed : cfl * min_dt_e;
  if (!(dt > 0.0)) throw NumericalError("global time step is not positive");
  if (t + dt >= t_final) dt = t_final - t;
  return dt;
}

// eta_Omega: int u^2/2 for scalar problems, the physical entropy for Euler
// (element quadrature of the nodal interpolant).
template <int Dim, int M>
double total_entropy(const Mesh<Dim>& mesh, const BasisTable<Dim>& basis, const NodalField<M>& u, bool is_euler,
                     double gamma = 1.4) {
  double s = 0.0;
  const int nloc = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int* nodes = mesh.element_nodes(e);
    const double vol = mesh.geometry(e).volume;
    for (int q = 0; q < basis.num_quad(); ++q) {
      Vec<M> uq{};
      for (int j = 0; j < nloc; ++j) uq += basis.value(q, j) * u[nodes[j]];
      double eta = 0.0;
      if constexpr (M == 3) {
        if (is_euler) eta = euler::entropy_density(uq, gamma);
      }
      if (!is_euler)
        for (int k = 0; k < M; ++k) eta += 0.5 * uq[k] * uq[k];
      s += vol * basis.weight(q) * eta;
    }
  }
  return s;
}

template <int Dim, int M>
class TimeIntegrator {
 public:
  using Field = NodalField<M>;

  TimeIntegrator(Scheme<Dim, M>& scheme, RunOptions opts) : scheme_(scheme), opts_(opts) {
    if (!(opts_.cfl > 0.0 && opts_.cfl <= 1.0)) throw InvalidArgument("cfl must lie in (0, 1]");
    if (opts_.fixed_dt && !(*opts_.fixed_dt > 0.0)) throw InvalidArgument("fixed dt must be positive");
    const Variant v = scheme_.config().variant;
    check_ = opts_.check_stages.value_or(v == Variant::WENO_L || v == Variant::LO);
  }

  const RunStatistics& statistics() const { return stats_; }
  const std::vector<StepRecord<M>>& history() const { return history_; }

  // Optional per-stage observer (state after each RK stage).
  std::function<void(const Field&, int stage)> on_stage;
  // Optional per-step observer.
  std::function<void(const StepRecord<M>&, const Field&)> on_step;

  // Integrates u from t0 to t_final in place.
  void run(Field& u, double t0 = 0.0) {
    double t = t0;
    long step = 0;
    if (opts_.record_history) history_.push_back(record(u, t, 0.0, step, 1.0, 0, 0));
    while (t < opts_.t_final) {
      if (step >= opts_.max_steps) throw NumericalError("maximum number of time steps reached at t = " + fmt(t));
      double min_beta = 1.0;
      long alpha = 0;
      int retries = 0;
      double dt = 0.0;
      try {
        dt = advance(u, t, min_beta, alpha, retries);
      } catch (const Error& ex) {
        rethrow_with_context(ex, step, t);
      }
      t = (t + dt >= opts_.t_final) ? opts_.t_final : t + dt;
      ++step;
      ++stats_.steps;
      for (const auto& v : u)
        for (int k = 0; k < M; ++k)
          if (!std::isfinite(v[k]))
            throw NumericalError("non-finite state after step " + std::to_string(step) + " at t = " + fmt(t));
      if (opts_.record_history || on_step) {
        auto rec = record(u, t, dt, step, min_beta, alpha, retries);
        if (on_step) on_step(rec, u);
        if (opts_.record_history) history_.push_back(rec);
      }
    }
  }

  // One SSP-RK3 step; returns the step size used.
  double advance(Field& u, double t, double& min_beta, long& alpha, int& retries) {
    if (u1_.size() != u.size()) reserve(u.size());
    RhsDiagnostics d0;
    scheme_.rhs(u, t, k_, &d0);
    double dt = global_time_step(d0.min_dt_e, opts_.cfl, t, opts_.t_final, opts_.fixed_dt);
    if (opts_.fixed_dt && dt > d0.min_dt_e) dt = std::min(dt, opts_.cfl * d0.min_dt_e);
    for (retries = 0;; ++retries) {
      if (retries > opts_.max_retries) throw CflViolation("no admissible time step found after retries");
      min_beta = d0.min_beta;
      alpha = d0.alpha_limited;
      double bound = std::numeric_limits<double>::infinity();
      bool ok = true;
      // stage 1
      for (std::size_t j = 0; j < u.size(); ++j) u1_[j] = u[j] + dt * k_[j];
      ok = stage_ok(u1_, 1);
      RhsDiagnostics d;
      if (ok) {
        scheme_.rhs(u1_, t + dt, k1_, &d);
        absorb(d, min_beta, alpha);
        bound = std::min(bound, d.min_dt_e);
        for (std::size_t j = 0; j < u.size(); ++j) u2_[j] = 0.75 * u[j] + 0.25 * (u1_[j] + dt * k1_[j]);
        ok = dt <= d.min_dt_e && stage_ok(u2_, 2);
      }
      if (ok) {
        scheme_.rhs(u2_, t + 0.5 * dt, k1_, &d);
        absorb(d, min_beta, alpha);
        bound = std::min(bound, d.min_dt_e);
        for (std::size_t j = 0; j < u.size(); ++j) u1_[j] = (1.0 / 3.0) * u[j] + (2.0 / 3.0) * (u2_[j] + dt * k1_[j]);
        ok = dt <= d.min_dt_e && stage_ok(u1_, 3);
      }
      if (ok) {
        absorb(d0, min_beta, alpha);
        stats_.stages += 3;
        stats_.retries += retries;
        u.swap(u1_);
        return dt;
      }
      dt = std::isfinite(bound) && bound < dt ? opts_.cfl * bound : 0.5 * dt;
    }
  }

 private:
  void absorb(const RhsDiagnostics& d, double& min_beta, long& alpha) {
    min_beta = std::min(min_beta, d.min_beta);
    alpha += d.alpha_limited;
    stats_.min_beta = std::min(stats_.min_beta, d.min_beta);
    stats_.min_gamma = std::min(stats_.min_gamma, d.min_gamma);
    stats_.alpha_limited += d.alpha_limited;
    stats_.halvings += d.halvings;
    stats_.ubar_violations += d.ubar_violations;
    stats_.max_zero_sum_ratio = std::max(stats_.max_zero_sum_ratio, d.zero_sum_ratio);
  }

  // admissibility of a stage result; records extrema
  bool stage_ok(const Field& v, int stage) {
    const auto& pb = scheme_.problem();
    bool ok = true;
    for (const auto& w : v) {
      if constexpr (M == 3) {
        if (pb.is_euler) {
          const double p = euler::pressure(w, pb.gamma);
          stats_.min_stage_rho = std::min(stats_.min_stage_rho, w[0]);
          stats_.min_stage_p = std::min(stats_.min_stage_p, p);
          if (!(w[0] > 0.0 && p > 0.0)) ok = false;
          continue;
        }
      }
      stats_.min_stage_value = std::min(stats_.min_stage_value, w[0]);
      stats_.max_stage_value = std::max(stats_.max_stage_value, w[0]);
      if (!scheme_.admissible(w)) ok = false;
    }
    if (on_stage) on_stage(v, stage);
    return ok || !check_;
  }

  StepRecord<M> record(const Field& u, double t, double dt, long step, double min_beta, long alpha, int retries) const {
    const auto& mesh = scheme_.mesh();
    StepRecord<M> r;
    r.step = step;
    r.t = t;
    r.dt = dt;
    r.mass = total_mass<Dim, M>(mesh, u);
    r.entropy = total_entropy<Dim, M>(mesh, scheme_.basis(), u, scheme_.problem().is_euler, scheme_.problem().gamma);
    r.min = filled<M>(std::numeric_limits<double>::infinity());
    r.max = filled<M>(-std::numeric_limits<double>::infinity());
    for (const auto& v : u)
      for (int k = 0; k < M; ++k) {
        r.min[k] = std::min(r.min[k], v[k]);
        r.max[k] = std::max(r.max[k], v[k]);
      }
    r.min_beta = min_beta;
    r.alpha_limited = alpha;
    r.retries = retries;
    return r;
  }

  static std::string fmt(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
  }

  [[noreturn]] static void rethrow_with_context(const Error& ex, long step, double t) {
    const std::string ctx = std::string(ex.what()) + " (step " + std::to_string(step) + ", t = " + fmt(t) + ")";
    if (dynamic_cast<const InvalidArgument*>(&ex)) throw InvalidArgument(ctx);
    if (dynamic_cast<const InadmissibleState*>(&ex)) throw InadmissibleState(ctx);
    if (dynamic_cast<const CflViolation*>(&ex)) throw CflViolation(ctx);
    if (dynamic_cast<const ConvergenceFailure*>(&ex)) throw ConvergenceFailure(ctx);
    throw NumericalError(ctx);
  }

  Scheme<Dim, M>& scheme_;
  RunOptions opts_;
  bool check_ = false;
  Field k_, k1_, u1_, u2_;
  std::vector<StepRecord<M>> history_;
  RunStatistics stats_;

 public:
  void reserve(std::size_t n) {
    k_.resize(n);
    k1_.resize(n);
    u1_.resize(n);
    u2_.resize(n);
  }
};

// Sets up initial data for a problem on a mesh (nodal sampling or L2 projection).
template <int Dim, int M>
NodalField<M> initial_field(const Mesh<Dim>& mesh, const Problem<Dim, M>& pb) {
  if (pb.init == InitMode::l2_projection) return l2_projection<Dim, M>(mesh, pb.initial);
  return nodal_interpolation<Dim, M>(mesh, pb.initial);
}

template <int Dim, int M>
struct RunResult {
  NodalField<M> u;
  std::vector<StepRecord<M>> history;
  RunStatistics stats;
};

// Integrates a problem to t_final with the given scheme configuration.
template <int Dim, int M>
RunResult<Dim, M> run(const Mesh<Dim>& mesh, const Problem<Dim, M>& pb, const SchemeConfig& cfg, RunOptions opts) {
  if (opts.t_final <= 0.0) opts.t_final = pb.t_final;
  Scheme<Dim, M> scheme(mesh, pb, cfg);
  RunResult<Dim, M> res;
  res.u = initial_field(mesh, pb);
  scheme.calibrate(res.u);
  TimeIntegrator<Dim, M> ti(scheme, opts);
  ti.reserve(res.u.size());
  ti.run(res.u);
  res.history = ti.history();
  res.stats = ti.statistics();
  return res;
}

}  // namespace cgidp
