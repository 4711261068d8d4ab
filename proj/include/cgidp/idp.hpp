#pragma once

// Element-based IDP discretization: cell averages, LLF facet fluxes, fake
// time steps, intermediate cell averages, bar-state decompositions,
// antidiffusive element contributions and the limited semi-discrete
// right-hand side
//
//   m_i du_i/dt = sum_{e in E_i} [m_i^e (ubar^e - u_i) + beta_e f_i^e] / dt_e.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgidp/bernstein.hpp"
#include "cgidp/common.hpp"
#include "cgidp/field.hpp"
#include "cgidp/limiting.hpp"
#include "cgidp/mesh.hpp"
#include "cgidp/problems.hpp"
#include "cgidp/weno.hpp"

namespace cgidp {

enum class Variant { LO, HO, WENO, WENO_L };
enum class Contributions { full, q1 };
enum class DtPolicy { subcell, macrocell, shrink };
enum class FluxMode { high, low, limited };  // alpha = 1, alpha = 0, alpha from the flux limiter
enum class UdotMode { lumped, consistent };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::LO: return "LO";
    case Variant::HO: return "HO";
    case Variant::WENO: return "WENO";
    case Variant::WENO_L: return "WENO-L";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "LO" || s == "lo") return Variant::LO;
  if (s == "HO" || s == "ho") return Variant::HO;
  if (s == "WENO" || s == "weno") return Variant::WENO;
  if (s == "WENO-L" || s == "weno-l" || s == "WENO_L") return Variant::WENO_L;
  throw InvalidArgument("unknown variant '" + s + "' (expected LO, HO, WENO, WENO-L)");
}

struct SchemeConfig {
  Variant variant = Variant::WENO_L;
  Contributions contributions = Contributions::full;
  DtPolicy dt_policy = DtPolicy::subcell;
  FluxMode flux_mode = FluxMode::high;
  UdotMode udot = UdotMode::consistent;
  bool entropy_fix = false;
  WenoConfig weno;
  BoundsMode bounds = BoundsMode::global;
  double floor_rel = 1e-10;  // Euler positivity floors relative to the initial maxima
  double dt_cap = 1e6;       // fake time step used where all speeds vanish
  int max_halvings = 60;
  int threads = 1;

  bool limited() const { return variant == Variant::WENO_L; }

  // Dimension-dependent defaults: full contributions with the subcell bound
  // in 1D; Q1 contributions with macrocell-initialized shrinking in 2D.
  static SchemeConfig defaults(int dim) {
    SchemeConfig c;
    if (dim == 2) {
      c.contributions = Contributions::q1;
      c.dt_policy = DtPolicy::shrink;
    }
    return c;
  }

  // defaults(Dim) plus the preset's recommended WENO weight.
  template <int Dim, int M>
  static SchemeConfig for_problem(const Problem<Dim, M>& pb) {
    SchemeConfig c = defaults(Dim);
    if (pb.weno_linear_weight) c.weno.linear_weight = *pb.weno_linear_weight;
    return c;
  }

  void enable_flux_limiter() {
    flux_mode = FluxMode::limited;
    dt_policy = DtPolicy::macrocell;
  }
};

// Per-stage diagnostics of one right-hand side evaluation.
struct RhsDiagnostics {
  double min_dt_e = std::numeric_limits<double>::infinity();
  double min_beta = 1.0;
  double min_gamma = 1.0;
  long alpha_limited = 0;        // facets with alpha < 1
  double zero_sum_ratio = 0.0;   // max over interior elements
  long halvings = 0;             // Remark-3 style fake time step reductions
  long ubar_violations = 0;      // averages still outside G after the cap
};

// Convex decomposition of ubar^e into one-dimensional bar states.
template <int M>
struct BarStateSet {
  int s = 1;
  Vec<M> u0{};
  double m0 = 0.0;
  std::vector<int> nodes;           // local indices of N_e^boundary
  std::vector<Vec<M>> ubar_i;       // per boundary node
  std::vector<Vec<M>> ubar_0i;      // 1D bar states between u0 and u_i
  std::vector<double> lambda_0i;
  std::vector<double> c_norm;       // |c_{i,e}|
  Vec<M> ubar_0{};

  // (1/s) [ m0/|K| ubar_0 + sum_i m_i/|K| ubar_i ]
  Vec<M> reconstruct(double volume, double m) const {
    Vec<M> r = (m0 / volume) * ubar_0;
    for (const auto& ui : ubar_i) r += (m / volume) * ui;
    return (1.0 / s) * r;
  }
};

template <int Dim, int M>
class Scheme {
 public:
  using State = Vec<M>;
  using Point = Vec<Dim>;
  static constexpr int kFacets = 2 * Dim;

  Scheme(const Mesh<Dim>& mesh, Problem<Dim, M> problem, SchemeConfig cfg)
      : mesh_(mesh),
        pb_(std::move(problem)),
        cfg_(cfg),
        basis_(mesh.degree(), default_quadrature_points(mesh.degree())) {
    cfg_.weno.validate();
    if (pb_.is_euler && cfg_.flux_mode == FluxMode::limited)
      throw InvalidArgument("the flux limiter is implemented for scalar problems only");
    if (pb_.is_euler && cfg_.entropy_fix)
      throw InvalidArgument("the entropy fix is available for scalar problems only");
    if (cfg_.threads < 1) throw InvalidArgument("threads must be >= 1");
    const int E = mesh_.num_elements();
    const int nloc = mesh_.nodes_per_element();
    avg_.resize(E);
    dt_.assign(E, 0.0);
    ubar_.resize(E);
    ubar_high_.resize(E);
    ubar_low_.resize(E);
    gamma_.assign(E, 1.0);
    xi_.assign(E, 1.0);
    beta_.assign(E, 1.0);
    halvings_.assign(E, 0);
    fH_.resize(E * kFacets);
    fL_.resize(E * kFacets);
    fbar_.resize(E * kFacets);
    lam_.assign(E * kFacets, 0.0);
    contrib_.resize(static_cast<std::size_t>(E) * nloc);
    residual_.resize(static_cast<std::size_t>(E) * nloc);
    lower_ = pb_.lower;
    upper_ = pb_.upper;
    scale_ = filled<M>(1.0);
    mass_.emplace(mesh_);
  }

  const Mesh<Dim>& mesh() const { return mesh_; }
  const Problem<Dim, M>& problem() const { return pb_; }
  const SchemeConfig& config() const { return cfg_; }
  SchemeConfig& config() { return cfg_; }
  const BasisTable<Dim>& basis() const { return basis_; }

  // Fixes the invariant domain used for checks and limiting from the initial
  // data: the scalar interval is widened to contain every initial
  // coefficient; Euler floors are relative to the initial maxima of rho, p.
  void calibrate(const NodalField<M>& u0) {
    lower_ = pb_.lower;
    upper_ = pb_.upper;
    scale_ = Vec<M>{};
    for (const auto& v : u0)
      for (int k = 0; k < M; ++k) scale_[k] = std::max(scale_[k], std::abs(v[k]));
    if (!pb_.is_euler) {
      for (const auto& v : u0) {
        lower_ = std::min(lower_, v[0]);
        upper_ = std::max(upper_, v[0]);
      }
    } else if constexpr (M == 3) {
      double rmax = 0.0, pmax = 0.0;
      for (const auto& v : u0) {
        rmax = std::max(rmax, v[0]);
        pmax = std::max(pmax, euler::pressure(v, pb_.gamma));
      }
      floors_ = {cfg_.floor_rel * rmax, cfg_.floor_rel * pmax};
    }
  }
  void set_domain(double lower, double upper) {
    lower_ = lower;
    upper_ = upper;
  }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const PositivityFloors& floors() const { return floors_; }

  // Absolute slack for scalar bound checks.
  double tolerance() const { return 1e-12 * (1.0 + std::max(std::abs(lower_), std::abs(upper_))); }

  // Membership of a state in the (widened) invariant domain.
  bool admissible(const State& u) const {
    if (pb_.is_euler) {
      if constexpr (M == 3) return euler::admissible(u, pb_.gamma);
      return false;
    }
    for (int k = 0; k < M; ++k)
      if (!(u[k] >= lower_ - tolerance() && u[k] <= upper_ + tolerance())) return false;
    return true;
  }

  // -------------------------------------------------------------------------
  // phase 1-2: averages and facet fluxes

  // Computes cell averages and the high/low-order facet fluxes for state u at time t.
  void prepare(const NodalField<M>& u, double t) {
    u_ = &u;
    t_ = t;
    const int E = mesh_.num_elements();
    parallel_for(E, cfg_.threads, [&](std::size_t e) { avg_[e] = cell_average<Dim, M>(mesh_, u, static_cast<int>(e)); });
    parallel_for(E, cfg_.threads, [&](std::size_t e) {
      for (int f = 0; f < kFacets; ++f) {
        const FacetLink& link = mesh_.facet(static_cast<int>(e), f);
        if (link.is_boundary(E)) {
          boundary_facet(static_cast<int>(e), f);
        } else if (f % 2 == 1) {
          interior_facet(static_cast<int>(e), f, link);
        }
      }
    });
  }

  const State& average(int e) const { return avg_[e]; }
  const State& facet_high(int e, int f) const { return fH_[e * kFacets + f]; }
  const State& facet_low(int e, int f) const { return fL_[e * kFacets + f]; }
  double facet_speed(int e, int f) const { return lam_[e * kFacets + f]; }

  // -------------------------------------------------------------------------
  // fake time steps and intermediate averages

  // |K_e| / sum_{e'} |S_ee'| lambda_ee'
  double macrocell_time_step(int e) const {
    const auto& geo = mesh_.geometry(e);
    double den = 0.0;
    for (int f = 0; f < kFacets; ++f) den += geo.facet_measure[f] * lam_[e * kFacets + f];
    return den > 0.0 ? std::min(cfg_.dt_cap, geo.volume / den) : cfg_.dt_cap;
  }

  // Subcell bound of the bar-state decomposition (s = 1 with interior nodes,
  // s = 2 otherwise).
  double subcell_time_step(int e) const {
    const auto bs = bar_state_geometry(e);
    const double m = mesh_.local_mass();
    double best = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t a = 0; a < bs.nodes.size(); ++a) {
      const double w = bs.c_norm[a] * bs.lambda_0i[a];
      if (w > 0.0) best = std::min(best, m / w);
      sum += w;
    }
    if (sum > 0.0) best = std::min(best, bs.m0 / sum);
    best /= bs.s;
    return std::isfinite(best) ? std::min(best, cfg_.dt_cap) : cfg_.dt_cap;
  }

  // ubar^e = u^e - dt/|K| sum |S| (alpha f^H + (1 - alpha) f^L)
  State intermediate_average(int e, double dt, std::span<const double> alpha) const {
    const auto& geo = mesh_.geometry(e);
    State s{};
    for (int f = 0; f < kFacets; ++f) {
      const double a = alpha[f];
      s += geo.facet_measure[f] * (a * fH_[e * kFacets + f] + (1.0 - a) * fL_[e * kFacets + f]);
    }
    return avg_[e] - (dt / geo.volume) * s;
  }
  State intermediate_average(int e, double dt, double alpha) const {
    std::array<double, kFacets> a;
    a.fill(alpha);
    return intermediate_average(e, dt, a);
  }

  // Bar states of the subcell decomposition for the time step dt.
  BarStateSet<M> bar_state_decomposition(int e, double dt) const {
    BarStateSet<M> bs = bar_state_geometry(e);
    const double bound = subcell_time_step(e);
    if (dt > bound * (1.0 + 1e-12))
      throw CflViolation("bar_state_decomposition: dt exceeds the subcell bound");
    const auto& geo = mesh_.geometry(e);
    const int* nodes = mesh_.element_nodes(e);
    const double m = mesh_.local_mass();
    const int s = bs.s;
    bs.ubar_0 = bs.u0;
    for (std::size_t a = 0; a < bs.nodes.size(); ++a) {
      const int i = bs.nodes[a];
      const State& ui = (*u_)[nodes[i]];
      const Point x = mesh_.local_node_coordinate(e, i);
      const Point n = geo.n_node[i];
      const double lam = bs.lambda_0i[a];
      const State fi = pb_.flux_normal(x, ui, n);
      const State f0 = pb_.flux_normal(x, bs.u0, n);
      State b0i = 0.5 * (ui + bs.u0);
      if (lam > 0.0) b0i -= (0.5 / lam) * (fi - f0);
      bs.ubar_0i.push_back(b0i);
      const double w = s * dt * bs.c_norm[a] * lam;
      bs.ubar_i.push_back(ui + (w / m) * (b0i - ui));
      bs.ubar_0 += (w / bs.m0) * (b0i - bs.u0);
    }
    return bs;
  }

  // -------------------------------------------------------------------------
  // full right-hand side

  // du/dt for state u at time t.
  void rhs(const NodalField<M>& u, double t, NodalField<M>& du, RhsDiagnostics* diag = nullptr) {
    const int E = mesh_.num_elements();
    const int N = mesh_.num_nodes();
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    prepare(u, t);
    RhsDiagnostics local;

    // fake time steps and intermediate averages
    parallel_for(E, cfg_.threads, [&](std::size_t ee) {
      const int e = static_cast<int>(ee);
      dt_[e] = fake_time_step(e);
      ubar_high_[e] = intermediate_average(e, dt_[e], 1.0);
      ubar_low_[e] = intermediate_average(e, dt_[e], 0.0);
    });
    for (int e = 0; e < E; ++e) {
      local.min_dt_e = std::min(local.min_dt_e, dt_[e]);
      local.halvings += halvings_[e];
    }

    // flux limiting of the intermediate averages
    for (int e = 0; e < E; ++e) {
      for (int f = 0; f < kFacets; ++f) fbar_[e * kFacets + f] = State{};
      if (cfg_.flux_mode == FluxMode::high) ubar_[e] = ubar_high_[e];
      else ubar_[e] = ubar_low_[e];
    }
    if (cfg_.flux_mode == FluxMode::limited) local.alpha_limited = apply_flux_limiter();

    for (int e = 0; e < E; ++e)
      if (!admissible(ubar_[e])) ++local.ubar_violations;

    std::fill(contrib_.begin(), contrib_.end(), State{});
    std::fill(beta_.begin(), beta_.end(), cfg_.variant == Variant::LO ? 0.0 : 1.0);
    std::fill(gamma_.begin(), gamma_.end(), cfg_.variant == Variant::LO ? 0.0 : 1.0);
    std::fill(xi_.begin(), xi_.end(), 1.0);

    if (cfg_.variant != Variant::LO) {
      // low-order time derivative (q1 contributions and the entropy fix)
      const bool need_low = cfg_.contributions == Contributions::q1 || cfg_.entropy_fix;
      if (need_low) low_order_derivative(u, udot_low_);
      if (cfg_.variant == Variant::WENO || cfg_.variant == Variant::WENO_L) {
        parallel_for(E, cfg_.threads, [&](std::size_t e) {
          gamma_[e] = smoothness_sensor<Dim, M>(mesh_, basis_, u, static_cast<int>(e), cfg_.weno, scale_);
        });
      }
      if (cfg_.entropy_fix) {
        if constexpr (M == 1) {
          parallel_for(E, cfg_.threads, [&](std::size_t ee) {
            const int e = static_cast<int>(ee);
            xi_[e] = entropy_correction_factor(mesh_, basis_, u, udot_low_, e, viscosity(e), pb_.flux_derivative);
            gamma_[e] = std::min(gamma_[e], xi_[e]);
          });
        }
      }
      if (cfg_.contributions == Contributions::full) full_contributions(u);
      else q1_contributions(u);

      // zero-sum check on elements without boundary facets
      for (int e = 0; e < E; ++e) {
        if (has_boundary_facet(e)) continue;
        State sum{}, mag{}, floor{};
        const int* nodes = mesh_.element_nodes(e);
        for (int i = 0; i < nloc; ++i) {
          const State& fi = contrib_[e * nloc + i];
          sum += fi;
          for (int k = 0; k < M; ++k) {
            mag[k] += std::abs(fi[k]);
            floor[k] += m * std::abs(u[nodes[i]][k]);
          }
        }
        for (int k = 0; k < M; ++k)
          local.zero_sum_ratio = std::max(local.zero_sum_ratio, std::abs(sum[k]) / (mag[k] + floor[k] + 1e-300));
      }

      if (cfg_.limited()) {
        parallel_for(E, cfg_.threads, [&](std::size_t e) { beta_[e] = slope_factor(static_cast<int>(e)); });
      }
      for (int e = 0; e < E; ++e) {
        local.min_beta = std::min(local.min_beta, beta_[e]);
        local.min_gamma = std::min(local.min_gamma, gamma_[e]);
      }
    }

    // scatter (sequential, element order)
    du.assign(N, State{});
    for (int e = 0; e < E; ++e) {
      const int* nodes = mesh_.element_nodes(e);
      const double inv = 1.0 / dt_[e];
      for (int i = 0; i < nloc; ++i) {
        State r = m * (ubar_[e] - u[nodes[i]]);
        if (beta_[e] != 0.0) r += beta_[e] * contrib_[e * nloc + i];
        du[nodes[i]] += inv * r;
      }
    }
    for (int j = 0; j < N; ++j) du[j] = (1.0 / mesh_.lumped_mass(j)) * du[j];
    if (diag) *diag = local;
  }

  // -------------------------------------------------------------------------
  // workspace access (valid after rhs)

  double fake_dt(int e) const { return dt_[e]; }
  const State& ubar(int e) const { return ubar_[e]; }
  const State& ubar_high(int e) const { return ubar_high_[e]; }
  const State& ubar_low(int e) const { return ubar_low_[e]; }
  double gamma(int e) const { return gamma_[e]; }
  double xi(int e) const { return xi_[e]; }
  double beta(int e) const { return beta_[e]; }
  const std::vector<double>& gammas() const { return gamma_; }
  const std::vector<double>& betas() const { return beta_; }
  std::span<const State> contributions(int e) const {
    const int nloc = mesh_.nodes_per_element();
    return {contrib_.data() + static_cast<std::size_t>(e) * nloc, static_cast<std::size_t>(nloc)};
  }
  const NodalField<M>& target_derivative() const { return udot_; }
  const GradientField<Dim, M>& projected_gradient() const { return grad_; }
  // Lower/upper nodal bounds used by the scalar slope limiter.
  const ScalarBounds& bounds() const { return bounds_; }

  // nu_e = lambda_e h_e / (2p)
  double viscosity(int e) const {
    const int* nodes = mesh_.element_nodes(e);
    double lam = 0.0;
    for (int i = 0; i < mesh_.nodes_per_element(); ++i) {
      const Point x = mesh_.local_node_coordinate(e, i);
      const State& ui = (*u_)[nodes[i]];
      for (int d = 0; d < Dim; ++d) {
        Point n{};
        n[d] = 1.0;
        lam = std::max(lam, pb_.max_speed(x, ui, ui, n));
      }
    }
    return lam * mesh_.geometry(e).size / (2.0 * mesh_.degree());
  }

  bool has_boundary_facet(int e) const {
    for (int f = 0; f < kFacets; ++f)
      if (mesh_.facet(e, f).is_boundary(mesh_.num_elements())) return true;
    return false;
  }

  // LLF flux and external state at local node i of boundary facet f.
  std::pair<State, State> boundary_node_flux(int e, int f, int i, const State& ui) const {
    const Point x = mesh_.local_node_coordinate(e, i);
    const Point n = mesh_.geometry(e).facet_normal[f];
    const State uh = pb_.boundary(x, t_, ui, n);
    const double lam = pb_.max_speed(x, ui, uh, n);
    return {llf_flux<Dim, M>(pb_, x, ui, uh, n, lam), uh};
  }

 private:
  // sigma-weighted facet average of f(x_j, w) . n over the facet nodes
  State facet_flux_of(int e, int f, const State& w) const {
    const auto& geo = mesh_.geometry(e);
    const Point n = geo.facet_normal[f];
    if (!pb_.space_dependent) return pb_.flux_normal(mesh_.facet_center(e, f), w, n);
    State s{};
    for (int i : geo.facet_nodes[f]) s += geo.sigma[f][i] * pb_.flux_normal(mesh_.local_node_coordinate(e, i), w, n);
    return (1.0 / geo.facet_measure[f]) * s;
  }

  double facet_lambda(int e, int f, const State& a, const State& b) const {
    const auto& geo = mesh_.geometry(e);
    const Point n = geo.facet_normal[f];
    if (!pb_.space_dependent) return pb_.max_speed(mesh_.facet_center(e, f), a, b, n);
    double lam = 0.0;
    for (int i : geo.facet_nodes[f]) lam = std::max(lam, pb_.max_speed(mesh_.local_node_coordinate(e, i), a, b, n));
    return lam;
  }

  void interior_facet(int e, int f, const FacetLink& link) {
    const auto& geo = mesh_.geometry(e);
    const int* nodes = mesh_.element_nodes(e);
    const Point n = geo.facet_normal[f];
    State high{};
    for (int i : geo.facet_nodes[f])
      high += geo.sigma[f][i] * pb_.flux_normal(mesh_.local_node_coordinate(e, i), (*u_)[nodes[i]], n);
    high = (1.0 / geo.facet_measure[f]) * high;
    const State& ue = avg_[e];
    const State& un = avg_[link.neighbour];
    const double lam = facet_lambda(e, f, ue, un);
    const State low = llf_flux<M>(facet_flux_of(e, f, ue), facet_flux_of(e, f, un), ue, un, lam);
    const int a = e * kFacets + f;
    const int b = link.neighbour * kFacets + link.neighbour_facet;
    fH_[a] = high;
    fL_[a] = low;
    lam_[a] = lam;
    fH_[b] = -1.0 * high;
    fL_[b] = -1.0 * low;
    lam_[b] = lam;
  }

  void boundary_facet(int e, int f) {
    const auto& geo = mesh_.geometry(e);
    const int* nodes = mesh_.element_nodes(e);
    State high{}, uhat{};
    for (int i : geo.facet_nodes[f]) {
      const auto [F, uh] = boundary_node_flux(e, f, i, (*u_)[nodes[i]]);
      high += geo.sigma[f][i] * F;
      uhat += geo.sigma[f][i] * uh;
    }
    const double inv = 1.0 / geo.facet_measure[f];
    high = inv * high;
    uhat = inv * uhat;
    const State& ue = avg_[e];
    const double lam = facet_lambda(e, f, ue, uhat);
    const int a = e * kFacets + f;
    fH_[a] = high;
    fL_[a] = llf_flux<M>(facet_flux_of(e, f, ue), facet_flux_of(e, f, uhat), ue, uhat, lam);
    lam_[a] = lam;
  }

  // u0, m0, s and lambda_0i of the subcell decomposition
  BarStateSet<M> bar_state_geometry(int e) const {
    const auto& geo = mesh_.geometry(e);
    const int* nodes = mesh_.element_nodes(e);
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    BarStateSet<M> bs;
    int interior = 0;
    State sum{};
    for (int i = 0; i < nloc; ++i) {
      if (geo.on_boundary[i]) continue;
      ++interior;
      sum += (*u_)[nodes[i]];
    }
    if (interior > 0) {
      bs.s = 1;
      bs.m0 = interior * m;
      bs.u0 = (1.0 / interior) * sum;
    } else {
      bs.s = 2;
      bs.m0 = geo.volume;
      bs.u0 = avg_[e];
    }
    for (int i = 0; i < nloc; ++i) {
      if (!geo.on_boundary[i]) continue;
      bs.nodes.push_back(i);
      bs.c_norm.push_back(norm(geo.c_node[i]));
      bs.lambda_0i.push_back(pb_.max_speed(mesh_.local_node_coordinate(e, i), bs.u0, (*u_)[nodes[i]], geo.n_node[i]));
    }
    return bs;
  }

  bool average_ok(const State& v) const {
    if (pb_.is_euler) {
      if constexpr (M == 3) return v[0] >= floors_.rho && euler::pressure(v, pb_.gamma) >= floors_.p && std::isfinite(v[2]);
      return false;
    }
    return admissible(v);
  }

  // the intermediate average actually used by the configured flux mode
  State checked_average(int e, double dt) const {
    return intermediate_average(e, dt, cfg_.flux_mode == FluxMode::high ? 1.0 : 0.0);
  }

  double fake_time_step(int e) {
    halvings_[e] = 0;
    switch (cfg_.dt_policy) {
      case DtPolicy::subcell: return subcell_time_step(e);
      case DtPolicy::macrocell: return macrocell_time_step(e);
      case DtPolicy::shrink: break;
    }
    // halve the macrocell bound until the intermediate average is admissible;
    // once halving passes below the subcell bound, that bound is used instead
    double dt = macrocell_time_step(e);
    double sub = -1.0;
    int k = 0;
    while (!average_ok(checked_average(e, dt)) && k < cfg_.max_halvings) {
      if (sub < 0.0) sub = subcell_time_step(e);
      ++k;
      if (0.5 * dt <= sub) {
        dt = std::min(dt, sub);
        break;
      }
      dt *= 0.5;
    }
    halvings_[e] = k;
    return dt;
  }

  long apply_flux_limiter() {
    const int E = mesh_.num_elements();
    const double tol = tolerance();
    long limited = 0;
    auto side = [&](int e) {
      const auto& geo = mesh_.geometry(e);
      FluxLimiterSide s;
      s.volume_over_perimeter = geo.volume / geo.perimeter;
      s.u_low = ubar_low_[e][0];
      s.u_min = lower_;
      s.u_max = upper_;
      s.dt = dt_[e];
      return s;
    };
    if (cfg_.bounds == BoundsMode::local) {
      std::vector<double> a(E), l(E);
      for (int e = 0; e < E; ++e) {
        a[e] = avg_[e][0];
        l[e] = ubar_low_[e][0];
      }
      bounds_ = compute_bounds(mesh_, std::span<const double>(a), std::span<const double>(l), lower_, upper_,
                               BoundsMode::local);
    }
    auto side_b = [&](int e) {
      FluxLimiterSide s = side(e);
      if (cfg_.bounds == BoundsMode::local) {
        s.u_min = bounds_.elem_min[e];
        s.u_max = bounds_.elem_max[e];
      }
      return s;
    };
    (void)tol;
    for (int e = 0; e < E; ++e) {
      const FluxLimiterSide se = side_b(e);
      for (int f = 0; f < kFacets; ++f) {
        const FacetLink& link = mesh_.facet(e, f);
        const int a = e * kFacets + f;
        const double fA = fL_[a][0] - fH_[a][0];
        if (link.is_boundary(E)) {
          fbar_[a][0] = limited_antidiffusive_flux(fA, se, nullptr);
        } else if (f % 2 == 1) {
          const FluxLimiterSide sn = side_b(link.neighbour);
          const double v = limited_antidiffusive_flux(fA, se, &sn);
          fbar_[a][0] = v;
          fbar_[link.neighbour * kFacets + link.neighbour_facet][0] = -v;
        } else {
          continue;
        }
        if (std::abs(fbar_[a][0]) < std::abs(fA)) ++limited;
      }
    }
    for (int e = 0; e < E; ++e) {
      const auto& geo = mesh_.geometry(e);
      double s = 0.0;
      for (int f = 0; f < kFacets; ++f) s += geo.facet_measure[f] * fbar_[e * kFacets + f][0];
      ubar_[e][0] = ubar_low_[e][0] + dt_[e] / geo.volume * s;
    }
    return limited;
  }

  void low_order_derivative(const NodalField<M>& u, NodalField<M>& out) const {
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    out.assign(mesh_.num_nodes(), State{});
    for (int e = 0; e < mesh_.num_elements(); ++e) {
      const int* nodes = mesh_.element_nodes(e);
      for (int i = 0; i < nloc; ++i) out[nodes[i]] += (m / dt_[e]) * (ubar_[e] - u[nodes[i]]);
    }
    for (int j = 0; j < mesh_.num_nodes(); ++j) out[j] = (1.0 / mesh_.lumped_mass(j)) * out[j];
  }

  // int_K phi_i (v_h - v_i) dx for every local i
  void mass_defect(int e, const NodalField<M>& v, std::span<State> out) const {
    const int nloc = mesh_.nodes_per_element();
    const int* nodes = mesh_.element_nodes(e);
    const double vol = mesh_.geometry(e).volume;
    const double m = mesh_.local_mass();
    for (int i = 0; i < nloc; ++i) out[i] = State{};
    for (int q = 0; q < basis_.num_quad(); ++q) {
      State vq{};
      for (int j = 0; j < nloc; ++j) vq += basis_.value(q, j) * v[nodes[j]];
      const double w = vol * basis_.weight(q);
      for (int i = 0; i < nloc; ++i) out[i] += (w * basis_.value(q, i)) * vq;
    }
    for (int i = 0; i < nloc; ++i) out[i] -= m * v[nodes[i]];
  }

  // A_i = int grad phi_i . (f(u_h) - f_h) and B_i = int (phi_i - m/|K|) div f_h
  void flux_terms(int e, const NodalField<M>& u, std::span<State> A, std::span<State> B, bool need_a) const {
    const int nloc = mesh_.nodes_per_element();
    const int* nodes = mesh_.element_nodes(e);
    const auto& geo = mesh_.geometry(e);
    std::array<typename Problem<Dim, M>::Flux, kMaxLocalNodes> fn;
    for (int j = 0; j < nloc; ++j) fn[j] = pb_.flux(mesh_.local_node_coordinate(e, j), u[nodes[j]]);
    for (int i = 0; i < nloc; ++i) A[i] = B[i] = State{};
    const double inv_n = 1.0 / nloc;
    for (int q = 0; q < basis_.num_quad(); ++q) {
      const double w = geo.volume * basis_.weight(q);
      State div{};
      std::array<State, Dim> fh{};
      State uq{};
      for (int j = 0; j < nloc; ++j) {
        const double phi = basis_.value(q, j);
        uq += phi * u[nodes[j]];
        for (int d = 0; d < Dim; ++d) {
          div += (basis_.ref_gradient(q, j)[d] / geo.extent[d]) * fn[j][d];
          fh[d] += phi * fn[j][d];
        }
      }
      std::array<State, Dim> diff{};
      if (need_a) {
        const auto fq = pb_.flux(mesh_.map(e, basis_.point(q)), uq);
        for (int d = 0; d < Dim; ++d) diff[d] = fq[d] - fh[d];
      }
      for (int i = 0; i < nloc; ++i) {
        B[i] += (w * (basis_.value(q, i) - inv_n)) * div;
        if (need_a)
          for (int d = 0; d < Dim; ++d) A[i] += (w * basis_.ref_gradient(q, i)[d] / geo.extent[d]) * diff[d];
      }
    }
  }

  // boundary part g_i^e of the full contributions (lumped boundary term)
  void boundary_terms(int e, const NodalField<M>& u, std::span<State> g) const {
    const int nloc = mesh_.nodes_per_element();
    const int* nodes = mesh_.element_nodes(e);
    const auto& geo = mesh_.geometry(e);
    const double m = mesh_.local_mass();
    for (int i = 0; i < nloc; ++i) g[i] = State{};
    State global{};
    for (int f = 0; f < kFacets; ++f) {
      if (!mesh_.facet(e, f).is_boundary(mesh_.num_elements())) continue;
      const Point n = geo.facet_normal[f];
      for (int i : geo.facet_nodes[f]) {
        const State& ui = u[nodes[i]];
        const auto [F, uh] = boundary_node_flux(e, f, i, ui);
        const State fn = pb_.flux_normal(mesh_.local_node_coordinate(e, i), ui, n);
        const double sig = geo.sigma[f][i];
        global += sig * (fn - F);
        g[i] += sig * (F - fn);
      }
    }
    for (int i = 0; i < nloc; ++i) g[i] += (m / geo.volume) * global;
  }

  void full_contributions(const NodalField<M>& u) {
    const int E = mesh_.num_elements();
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    grad_ = gradient_projection<Dim, M>(*mass_, basis_, u, 1e-10, &grad_);
    std::vector<State> statics(static_cast<std::size_t>(E) * nloc);
    parallel_for(E, cfg_.threads, [&](std::size_t ee) {
      const int e = static_cast<int>(ee);
      std::array<State, kMaxLocalNodes> A, B, g, S;
      const bool nonlinear = true;
      flux_terms(e, u, A, B, nonlinear);
      if (has_boundary_facet(e)) boundary_terms(e, u, g);
      else std::fill(g.begin(), g.end(), State{});
      stabilization_element<Dim, M>(mesh_, basis_, u, grad_, gamma_[e], viscosity(e), e, S);
      const auto& geo = mesh_.geometry(e);
      State fsum{};
      for (int f = 0; f < kFacets; ++f) fsum += geo.facet_measure[f] * fH_[e * kFacets + f];
      const int* nodes = mesh_.element_nodes(e);
      for (int i = 0; i < nloc; ++i) {
        const State rest = A[i] - B[i] - g[i] - S[i];
        residual_[e * nloc + i] = rest - (m / geo.volume) * fsum;
        statics[e * nloc + i] = m * (u[nodes[i]] - avg_[e]) + dt_[e] * rest;
      }
    });
    // time derivative of the target scheme
    udot_.assign(mesh_.num_nodes(), State{});
    for (int e = 0; e < E; ++e) {
      const int* nodes = mesh_.element_nodes(e);
      for (int i = 0; i < nloc; ++i) udot_[nodes[i]] += residual_[e * nloc + i];
    }
    if (cfg_.udot == UdotMode::consistent) {
      // previous solution (or the lumped one) as initial guess
      NodalField<M> rhs = udot_;
      if (udot_guess_.size() != udot_.size()) {
        udot_guess_.resize(udot_.size());
        for (int j = 0; j < mesh_.num_nodes(); ++j) udot_guess_[j] = (1.0 / mesh_.lumped_mass(j)) * rhs[j];
      }
      udot_ = udot_guess_;
      mass_->template solve<M>(rhs, udot_, 1e-12, 1000);
      udot_guess_ = udot_;
    } else {
      for (int j = 0; j < mesh_.num_nodes(); ++j) udot_[j] = (1.0 / mesh_.lumped_mass(j)) * udot_[j];
    }
    parallel_for(E, cfg_.threads, [&](std::size_t ee) {
      const int e = static_cast<int>(ee);
      std::array<State, kMaxLocalNodes> C;
      mass_defect(e, udot_, C);
      for (int i = 0; i < nloc; ++i) contrib_[e * nloc + i] = statics[e * nloc + i] - dt_[e] * C[i];
    });
  }

  void q1_contributions(const NodalField<M>& u) {
    const int E = mesh_.num_elements();
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    parallel_for(E, cfg_.threads, [&](std::size_t ee) {
      const int e = static_cast<int>(ee);
      std::array<State, kMaxLocalNodes> A, B, C;
      if (gamma_[e] == 0.0) {
        for (int i = 0; i < nloc; ++i) contrib_[e * nloc + i] = State{};
        return;
      }
      flux_terms(e, u, A, B, false);
      mass_defect(e, udot_low_, C);
      const int* nodes = mesh_.element_nodes(e);
      for (int i = 0; i < nloc; ++i)
        contrib_[e * nloc + i] = gamma_[e] * (m * (u[nodes[i]] - avg_[e]) - dt_[e] * (B[i] - C[i]));
    });
  }

  double slope_factor(int e) {
    const int nloc = mesh_.nodes_per_element();
    const double m = mesh_.local_mass();
    const auto fe = contributions(e);
    if constexpr (M == 3) {
      if (pb_.is_euler) return euler_positivity_factor(ubar_[e], fe, m, floors_, pb_.gamma);
    }
    const int* nodes = mesh_.element_nodes(e);
    double beta = 1.0;
    for (int k = 0; k < M; ++k)
      for (int i = 0; i < nloc; ++i) {
        double lo = lower_, hi = upper_;
        if (cfg_.bounds == BoundsMode::local && !bounds_.node_min.empty()) {
          lo = bounds_.node_min[nodes[i]];
          hi = bounds_.node_max[nodes[i]];
        }
        beta = std::min(beta, slope_correction_factor_scalar(ubar_[e][k], fe[i][k], m, lo, hi));
      }
    return beta;
  }

  const Mesh<Dim>& mesh_;
  Problem<Dim, M> pb_;
  SchemeConfig cfg_;
  BasisTable<Dim> basis_;

  const NodalField<M>* u_ = nullptr;
  double t_ = 0.0;
  double lower_ = 0.0, upper_ = 1.0;
  Vec<M> scale_{};
  PositivityFloors floors_;

  std::vector<State> avg_, ubar_, ubar_high_, ubar_low_;
  std::vector<double> dt_, gamma_, xi_, beta_;
  std::vector<int> halvings_;
  std::vector<State> fH_, fL_, fbar_;
  std::vector<double> lam_;
  std::vector<State> contrib_, residual_;
  NodalField<M> udot_, udot_low_, udot_guess_;
  std::optional<MassMatrix<Dim>> mass_;
  GradientField<Dim, M> grad_;
  ScalarBounds bounds_;
};

}  // namespace cgidp
