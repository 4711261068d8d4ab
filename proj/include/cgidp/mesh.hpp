#pragma once

// Uniform structured meshes (1D intervals, 2D quadrilaterals) carrying
// Bernstein node numbering, facet adjacency and the precomputed boundary
// vectors c_{i,e}, c_{i,ee'} and trace masses sigma_{i,ee'}.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cgidp/common.hpp"

namespace cgidp {

// upper bound on nodes per element; sizes per-element scratch arrays
inline constexpr int kMaxLocalNodes = 16;

// Neighbour across a facet. Interior facets point at another element
// (id < num_elements); boundary facets carry a unique id >= num_elements.
struct FacetLink {
  int neighbour = -1;
  int neighbour_facet = -1;  // local facet index on the neighbour, -1 on the boundary
  bool is_boundary(int num_elements) const { return neighbour >= num_elements; }
};

// Geometric vectors of one element. Facet f = 2*d + side is the facet with
// outward normal -e_d (side 0) or +e_d (side 1).
template <int Dim>
struct ElementGeometry {
  static constexpr int kFacets = 2 * Dim;

  double volume = 0.0;      // |K_e|
  double perimeter = 0.0;   // |dK_e| = sum of facet measures
  double size = 0.0;        // h_e
  Vec<Dim> extent{};        // edge lengths per direction

  std::array<double, kFacets> facet_measure{};   // |S_ee'|
  std::array<Vec<Dim>, kFacets> facet_normal{};  // n_ee'

  // Per local node.
  std::vector<Vec<Dim>> c_node;   // c_{i,e}
  std::vector<Vec<Dim>> n_node;   // n_{i,e}; zero for interior nodes
  std::vector<char> on_boundary;  // i in N_e^boundary

  // Per facet and local node: sigma_{i,ee'}; c_{i,ee'} = sigma_{i,ee'} n_ee'.
  std::array<std::vector<double>, kFacets> sigma;
  std::array<std::vector<int>, kFacets> facet_nodes;

  Vec<Dim> c_facet_node(int f, int i) const { return sigma[f][i] * facet_normal[f]; }
  // c_ee' = sum_i c_{i,ee'}
  Vec<Dim> c_facet(int f) const { return facet_measure[f] * facet_normal[f]; }
};

template <int Dim>
class Mesh {
 public:
  static constexpr int kFacets = 2 * Dim;

  int dimension() const { return Dim; }
  int degree() const { return p_; }
  bool periodic() const { return periodic_; }
  int num_elements() const { return num_elements_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int nodes_per_element() const { return nloc_; }
  int num_boundary_facets() const { return num_boundary_facets_; }
  const Vec<Dim>& lower() const { return lo_; }
  const Vec<Dim>& upper() const { return hi_; }
  const std::array<int, Dim>& cells() const { return cells_; }

  // Global node index of local node i of element e.
  int node(int e, int i) const { return element_nodes_[e * nloc_ + i]; }
  const int* element_nodes(int e) const { return &element_nodes_[e * nloc_]; }
  // Canonical node coordinate (wrapped into the domain on periodic meshes).
  const Vec<Dim>& node_coordinate(int j) const { return nodes_[j]; }
  // Coordinate of local node i as seen from element e (no wrapping).
  Vec<Dim> local_node_coordinate(int e, int i) const {
    Vec<Dim> x = origin(e);
    int idx = i;
    for (int d = 0; d < Dim; ++d) {
      x[d] += geometry_.extent[d] * static_cast<double>(idx % (p_ + 1)) / p_;
      idx /= (p_ + 1);
    }
    return x;
  }
  // Lower corner of element e.
  Vec<Dim> origin(int e) const {
    Vec<Dim> x{};
    int idx = e;
    for (int d = 0; d < Dim; ++d) {
      x[d] = lo_[d] + geometry_.extent[d] * (idx % cells_[d]);
      idx /= cells_[d];
    }
    return x;
  }
  // Physical point of a reference coordinate in element e.
  Vec<Dim> map(int e, const Vec<Dim>& xi) const {
    Vec<Dim> x = origin(e);
    for (int d = 0; d < Dim; ++d) x[d] += geometry_.extent[d] * xi[d];
    return x;
  }
  Vec<Dim> facet_center(int e, int f) const {
    Vec<Dim> xi{};
    xi.fill(0.5);
    xi[f / 2] = (f % 2 == 0) ? 0.0 : 1.0;
    return map(e, xi);
  }

  const FacetLink& facet(int e, int f) const { return facets_[e * kFacets + f]; }
  const ElementGeometry<Dim>& geometry(int /*e*/) const { return geometry_; }

  // Elements containing node j (E_j).
  std::span<const int> node_elements(int j) const {
    return {node_elem_.data() + node_elem_offset_[j],
            static_cast<std::size_t>(node_elem_offset_[j + 1] - node_elem_offset_[j])};
  }
  // m_i^e = |K_e| / |N_e| for Bernstein elements.
  double local_mass() const { return geometry_.volume / nloc_; }
  // m_i = sum over E_i of m_i^e.
  double lumped_mass(int j) const { return lumped_[j]; }
  double domain_measure() const {
    double m = 1.0;
    for (int d = 0; d < Dim; ++d) m *= hi_[d] - lo_[d];
    return m;
  }

  template <int D>
  friend Mesh<D> build_box_mesh(const Vec<D>&, const Vec<D>&, const std::array<int, D>&, int, bool);

 private:
  int p_ = 1;
  bool periodic_ = false;
  int nloc_ = 0;
  int num_elements_ = 0;
  int num_boundary_facets_ = 0;
  Vec<Dim> lo_{}, hi_{};
  std::array<int, Dim> cells_{};
  std::vector<Vec<Dim>> nodes_;
  std::vector<int> element_nodes_;
  std::vector<FacetLink> facets_;
  std::vector<int> node_elem_offset_;
  std::vector<int> node_elem_;
  std::vector<double> lumped_;
  ElementGeometry<Dim> geometry_;
};

// Exact trace integrals of the tensor Bernstein basis on an axis-aligned box.
template <int Dim>
ElementGeometry<Dim> box_geometry(const Vec<Dim>& extent, int p) {
  ElementGeometry<Dim> g;
  g.extent = extent;
  g.volume = 1.0;
  g.size = 0.0;
  for (int d = 0; d < Dim; ++d) {
    g.volume *= extent[d];
    g.size = std::max(g.size, extent[d]);
  }
  int nloc = 1;
  for (int d = 0; d < Dim; ++d) nloc *= (p + 1);
  g.c_node.assign(nloc, Vec<Dim>{});
  g.n_node.assign(nloc, Vec<Dim>{});
  g.on_boundary.assign(nloc, 0);
  g.perimeter = 0.0;
  for (int f = 0; f < 2 * Dim; ++f) {
    const int dir = f / 2;
    const int side = f % 2;
    double measure = 1.0;
    for (int d = 0; d < Dim; ++d)
      if (d != dir) measure *= extent[d];
    g.facet_measure[f] = measure;
    g.perimeter += measure;
    g.facet_normal[f] = Vec<Dim>{};
    g.facet_normal[f][dir] = side == 0 ? -1.0 : 1.0;
    g.sigma[f].assign(nloc, 0.0);
    for (int i = 0; i < nloc; ++i) {
      int idx = i;
      std::array<int, Dim> j{};
      for (int d = 0; d < Dim; ++d) {
        j[d] = idx % (p + 1);
        idx /= (p + 1);
      }
      if (j[dir] != (side == 0 ? 0 : p)) continue;
      // each Bernstein function integrates to h/(p+1) along a facet direction
      double s = 1.0;
      for (int d = 0; d < Dim; ++d)
        if (d != dir) s *= extent[d] / (p + 1);
      g.sigma[f][i] = s;
      g.facet_nodes[f].push_back(i);
      g.on_boundary[i] = 1;
      g.c_node[i] += g.c_facet_node(f, i);
    }
  }
  for (int i = 0; i < nloc; ++i) {
    const double len = norm(g.c_node[i]);
    if (g.on_boundary[i] && len > 0.0) g.n_node[i] = (1.0 / len) * g.c_node[i];
  }
  return g;
}

template <int Dim>
Mesh<Dim> build_box_mesh(const Vec<Dim>& lo, const Vec<Dim>& hi, const std::array<int, Dim>& cells,
                         int degree, bool periodic) {
  for (int d = 0; d < Dim; ++d) {
    if (!(lo[d] < hi[d])) throw InvalidArgument("mesh: lower bound must be below upper bound");
    if (cells[d] < 2) throw InvalidArgument("mesh: need at least 2 cells per direction");
  }
  if (degree < 1) throw InvalidArgument("mesh: polynomial degree must be >= 1");
  if (degree > 8) throw UnsupportedDegree("mesh: polynomial degree above 8 is not supported");
  int nloc = 1;
  for (int d = 0; d < Dim; ++d) nloc *= degree + 1;
  if (nloc > kMaxLocalNodes) throw UnsupportedDegree("mesh: too many nodes per element");

  Mesh<Dim> m;
  m.p_ = degree;
  m.periodic_ = periodic;
  m.lo_ = lo;
  m.hi_ = hi;
  m.cells_ = cells;
  const int p = degree;
  m.nloc_ = 1;
  m.num_elements_ = 1;
  Vec<Dim> extent{};
  std::array<int, Dim> nodes_per_dir{};
  for (int d = 0; d < Dim; ++d) {
    m.nloc_ *= (p + 1);
    m.num_elements_ *= cells[d];
    extent[d] = (hi[d] - lo[d]) / cells[d];
    nodes_per_dir[d] = periodic ? cells[d] * p : cells[d] * p + 1;
  }
  m.geometry_ = box_geometry<Dim>(extent, p);

  int total_nodes = 1;
  for (int d = 0; d < Dim; ++d) total_nodes *= nodes_per_dir[d];
  m.nodes_.resize(total_nodes);
  for (int j = 0; j < total_nodes; ++j) {
    int idx = j;
    for (int d = 0; d < Dim; ++d) {
      const int a = idx % nodes_per_dir[d];
      idx /= nodes_per_dir[d];
      m.nodes_[j][d] = lo[d] + extent[d] * static_cast<double>(a) / p;
    }
  }

  const int E = m.num_elements_;
  m.element_nodes_.resize(static_cast<std::size_t>(E) * m.nloc_);
  m.facets_.resize(static_cast<std::size_t>(E) * Mesh<Dim>::kFacets);
  int boundary_id = E;
  for (int e = 0; e < E; ++e) {
    std::array<int, Dim> ec{};
    int idx = e;
    for (int d = 0; d < Dim; ++d) {
      ec[d] = idx % cells[d];
      idx /= cells[d];
    }
    for (int i = 0; i < m.nloc_; ++i) {
      int li = i;
      int global = 0;
      int stride = 1;
      for (int d = 0; d < Dim; ++d) {
        const int jd = li % (p + 1);
        li /= (p + 1);
        int a = ec[d] * p + jd;
        if (periodic) a %= nodes_per_dir[d];
        global += a * stride;
        stride *= nodes_per_dir[d];
      }
      m.element_nodes_[e * m.nloc_ + i] = global;
    }
    for (int f = 0; f < Mesh<Dim>::kFacets; ++f) {
      const int dir = f / 2;
      const int side = f % 2;
      std::array<int, Dim> nc = ec;
      nc[dir] += side == 0 ? -1 : 1;
      FacetLink link;
      if (nc[dir] < 0 || nc[dir] >= cells[dir]) {
        if (periodic) {
          nc[dir] = (nc[dir] + cells[dir]) % cells[dir];
        } else {
          link.neighbour = boundary_id++;
          m.facets_[e * Mesh<Dim>::kFacets + f] = link;
          continue;
        }
      }
      int ne = 0;
      int stride = 1;
      for (int d = 0; d < Dim; ++d) {
        ne += nc[d] * stride;
        stride *= cells[d];
      }
      link.neighbour = ne;
      link.neighbour_facet = 2 * dir + (1 - side);
      m.facets_[e * Mesh<Dim>::kFacets + f] = link;
    }
  }
  m.num_boundary_facets_ = boundary_id - E;

  // node -> elements (CSR), each element listed once per node
  std::vector<std::vector<int>> tmp(total_nodes);
  for (int e = 0; e < E; ++e)
    for (int i = 0; i < m.nloc_; ++i) {
      auto& list = tmp[m.element_nodes_[e * m.nloc_ + i]];
      if (list.empty() || list.back() != e) list.push_back(e);
    }
  m.node_elem_offset_.assign(total_nodes + 1, 0);
  for (int j = 0; j < total_nodes; ++j)
    m.node_elem_offset_[j + 1] = m.node_elem_offset_[j] + static_cast<int>(tmp[j].size());
  m.node_elem_.reserve(m.node_elem_offset_.back());
  for (auto& list : tmp) m.node_elem_.insert(m.node_elem_.end(), list.begin(), list.end());

  m.lumped_.assign(total_nodes, 0.0);
  const double me = m.geometry_.volume / m.nloc_;
  for (int e = 0; e < E; ++e)
    for (int i = 0; i < m.nloc_; ++i) m.lumped_[m.element_nodes_[e * m.nloc_ + i]] += me;
  return m;
}

inline Mesh<1> build_interval_mesh(double x_lo, double x_hi, int n_cells, int degree, bool periodic) {
  return build_box_mesh<1>({x_lo}, {x_hi}, {n_cells}, degree, periodic);
}

// Q1 quadrilateral mesh of the rectangle [lo, hi]; higher degrees are not
// supported in 2D.
inline Mesh<2> build_quad_mesh(const Vec<2>& lo, const Vec<2>& hi, int nx, int ny, int degree,
                               bool periodic) {
  if (degree != 1)
    throw UnsupportedDegree("build_quad_mesh: only Q1 (degree 1) is supported in 2D, got " +
                            std::to_string(degree));
  return build_box_mesh<2>(lo, hi, {nx, ny}, degree, periodic);
}

template <int Dim>
const ElementGeometry<Dim>& element_geometry(const Mesh<Dim>& mesh, int e) {
  return mesh.geometry(e);
}

}  // namespace cgidp
