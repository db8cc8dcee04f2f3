#pragma once

// Explicit triangulations of F^N (vertex table + cell list + facet adjacency).
// Used for barycentric subdivision, for exporting a Kuhn triangulation and
// as an independent route for counting and mesh measurements.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sperner/errors.hpp"
#include "sperner/kuhn.hpp"
#include "sperner/lattice.hpp"

namespace sperner {

struct Scheme {
  enum class Kind { Trivial, Kuhn, Barycentric };
  Kind kind = Kind::Trivial;
  std::int64_t parameter = 0;  // resolution k for Kuhn, depth r for Barycentric

  std::string name() const {
    switch (kind) {
      case Kind::Trivial: return "trivial";
      case Kind::Kuhn: return "kuhn";
      case Kind::Barycentric: return "barycentric";
    }
    return "unknown";
  }
};

struct ComplexCell {
  std::vector<std::size_t> vertex_ids;
  std::vector<std::size_t> carrier;  // 1-based indices of the minimal face of F^N
};

class SimplicialComplex {
 public:
  /// Vertex numerators share one denominator; cells list vertex ids.
  SimplicialComplex(std::size_t dim, std::int64_t denom, std::vector<std::vector<std::int64_t>> vertices,
                    std::vector<std::vector<std::size_t>> cells, Scheme scheme)
      : dim_(dim), denom_(denom), vertices_(std::move(vertices)), scheme_(scheme) {
    cells_.reserve(cells.size());
    for (auto& ids : cells) {
      if (ids.size() != dim_ + 1) throw PreconditionError("cell does not have N+1 vertices");
      std::vector<std::size_t> carrier;
      for (std::size_t j = 0; j <= dim_; ++j)
        for (auto id : ids)
          if (vertices_.at(id)[j] > 0) {
            carrier.push_back(j + 1);
            break;
          }
      cells_.push_back({std::move(ids), std::move(carrier)});
    }
    build_adjacency();
  }

  std::size_t dim() const noexcept { return dim_; }
  std::int64_t denominator() const noexcept { return denom_; }
  const Scheme& scheme() const noexcept { return scheme_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  const std::vector<ComplexCell>& cells() const noexcept { return cells_; }
  const ComplexCell& cell(std::size_t id) const { return cells_.at(id); }

  LatticePoint vertex(std::size_t id) const { return {vertices_.at(id), denom_}; }
  const std::vector<std::int64_t>& vertex_numerators(std::size_t id) const { return vertices_.at(id); }

  std::vector<LatticePoint> vertices(std::size_t cell_id) const {
    std::vector<LatticePoint> out;
    for (auto id : cells_.at(cell_id).vertex_ids) out.push_back(vertex(id));
    return out;
  }

  /// Neighbor across the facet opposite the cell's local vertex `t`.
  std::optional<std::size_t> facet_neighbor(std::size_t cell_id, std::size_t t) const {
    if (t > dim_) throw PreconditionError("vertex index " + std::to_string(t) + " not in cell");
    return neighbors_.at(cell_id)[t];
  }

  /// Number of facets shared by more than two cells (0 for a proper triangulation).
  std::size_t overfull_facets() const noexcept { return overfull_; }
  std::size_t boundary_facets() const noexcept { return boundary_; }

 private:
  void build_adjacency() {
    std::map<std::vector<std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>> facets;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& ids = cells_[c].vertex_ids;
      for (std::size_t t = 0; t < ids.size(); ++t) {
        std::vector<std::size_t> key;
        for (std::size_t s = 0; s < ids.size(); ++s)
          if (s != t) key.push_back(ids[s]);
        std::sort(key.begin(), key.end());
        facets[std::move(key)].push_back({c, t});
      }
    }
    neighbors_.assign(cells_.size(), std::vector<std::optional<std::size_t>>(dim_ + 1));
    for (const auto& [key, owners] : facets) {
      if (owners.size() == 1) ++boundary_;
      if (owners.size() > 2) ++overfull_;
      if (owners.size() == 2) {
        neighbors_[owners[0].first][owners[0].second] = owners[1].first;
        neighbors_[owners[1].first][owners[1].second] = owners[0].first;
      }
    }
  }

  std::size_t dim_;
  std::int64_t denom_;
  std::vector<std::vector<std::int64_t>> vertices_;
  std::vector<ComplexCell> cells_;
  Scheme scheme_;
  std::vector<std::vector<std::optional<std::size_t>>> neighbors_;
  std::size_t overfull_ = 0;
  std::size_t boundary_ = 0;
};

/// F^N as a single cell on e_1..e_{N+1}.
inline SimplicialComplex trivial_complex(std::size_t dim) {
  if (dim < 1) throw PreconditionError("triangulation dimension must be >= 1");
  std::vector<std::vector<std::int64_t>> vertices(dim + 1, std::vector<std::int64_t>(dim + 1, 0));
  std::vector<std::size_t> cell(dim + 1);
  for (std::size_t j = 0; j <= dim; ++j) {
    vertices[j][j] = 1;
    cell[j] = j;
  }
  return SimplicialComplex(dim, 1, std::move(vertices), {cell}, {Scheme::Kind::Trivial, 0});
}

/// Materializes a Kuhn triangulation, vertices in lexicographic order.
inline SimplicialComplex to_complex(const KuhnTriangulation& t) {
  auto points = t.lattice_points();
  std::map<std::vector<std::int64_t>, std::size_t> index;
  std::vector<std::vector<std::int64_t>> vertices;
  vertices.reserve(points.size());
  for (auto& p : points) {
    index.emplace(p.num, vertices.size());
    vertices.push_back(std::move(p.num));
  }
  std::vector<std::vector<std::size_t>> cells;
  t.for_each_cell([&](const KuhnCell& c) {
    std::vector<std::size_t> ids;
    for (const auto& v : t.vertices(c)) ids.push_back(index.at(v.num));
    cells.push_back(std::move(ids));
  });
  return SimplicialComplex(t.dim(), t.resolution(), std::move(vertices), std::move(cells),
                           {Scheme::Kind::Kuhn, t.resolution()});
}

/// Replaces each N-cell by the (N+1)! cells of its barycentric subdivision.
inline SimplicialComplex barycentric_subdivide(const SimplicialComplex& t,
                                               std::size_t cell_cap = kDefaultCellCap) {
  const std::size_t n = t.dim();
  std::uint64_t factorial = 1;
  std::int64_t lcm = 1;
  for (std::size_t j = 1; j <= n + 1; ++j) {
    factorial *= j;
    lcm = std::lcm(lcm, static_cast<std::int64_t>(j));
  }
  const auto new_cells = static_cast<unsigned __int128>(t.cell_count()) * factorial;
  if (new_cells > cell_cap)
    throw ResourceCapExceeded("barycentric subdivision would produce more than " +
                                  std::to_string(cell_cap) + " cells",
                              cell_cap);
  const auto denom = static_cast<__int128>(t.denominator()) * lcm;
  if (denom > (std::int64_t{1} << 52))
    throw ResourceCapExceeded("barycentric denominators exceed exact range", cell_cap);

  std::map<std::vector<std::int64_t>, std::size_t> index;
  std::vector<std::vector<std::int64_t>> vertices;
  auto intern = [&](std::vector<std::int64_t> num) {
    auto [it, inserted] = index.emplace(num, vertices.size());
    if (inserted) vertices.push_back(std::move(num));
    return it->second;
  };

  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(static_cast<std::size_t>(new_cells));
  for (const auto& cell : t.cells()) {
    std::vector<std::size_t> order(cell.vertex_ids);
    std::sort(order.begin(), order.end());
    do {
      // Barycenters of the flag {v_0}, {v_0, v_1}, ..., {v_0..v_N}.
      std::vector<std::size_t> ids;
      std::vector<std::int64_t> acc(n + 1, 0);
      for (std::size_t j = 0; j <= n; ++j) {
        const auto& v = t.vertex_numerators(order[j]);
        for (std::size_t c = 0; c <= n; ++c) acc[c] += v[c];
        const std::int64_t scale = lcm / static_cast<std::int64_t>(j + 1);
        std::vector<std::int64_t> num(n + 1);
        for (std::size_t c = 0; c <= n; ++c) num[c] = acc[c] * scale;
        ids.push_back(intern(std::move(num)));
      }
      cells.push_back(std::move(ids));
    } while (std::next_permutation(order.begin(), order.end()));
  }
  const std::int64_t depth =
      t.scheme().kind == Scheme::Kind::Barycentric ? t.scheme().parameter + 1 : 1;
  return SimplicialComplex(n, static_cast<std::int64_t>(denom), std::move(vertices), std::move(cells),
                           {Scheme::Kind::Barycentric, depth});
}

enum class MeshMetric { SupNorm, TruncatedProductMetric };

namespace detail {

inline double vertex_distance(const LatticePoint& a, const LatticePoint& b, MeshMetric metric) {
  double out = 0.0;
  for (std::size_t j = 0; j < a.num.size(); ++j) {
    const double d = static_cast<double>(a.num[j] > b.num[j] ? a.num[j] - b.num[j] : b.num[j] - a.num[j]) /
                     static_cast<double>(a.denom);
    if (metric == MeshMetric::SupNorm)
      out = std::max(out, d);
    else
      out += detail::metric_term(j + 1, d);
  }
  return out;
}

inline double cell_diameter(const std::vector<LatticePoint>& vs, MeshMetric metric) {
  double out = 0.0;
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = a + 1; b < vs.size(); ++b)
      out = std::max(out, vertex_distance(vs[a], vs[b], metric));
  return out;
}

}  // namespace detail

/// Largest cell diameter. The product metric is the truncated one on
/// coordinates 1..N+1, i.e. the product metric of the embedded face.
inline double mesh_size(const SimplicialComplex& t, MeshMetric metric) {
  double out = 0.0;
  for (std::size_t c = 0; c < t.cell_count(); ++c)
    out = std::max(out, detail::cell_diameter(t.vertices(c), metric));
  return out;
}

inline double mesh_size(const KuhnTriangulation& t, MeshMetric metric) {
  double out = 0.0;
  t.for_each_cell([&](const KuhnCell& c) {
    out = std::max(out, detail::cell_diameter(t.vertices(c), metric));
  });
  return out;
}

}  // namespace sperner
