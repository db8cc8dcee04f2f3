#pragma once

// Sperner labellings of triangulated faces F^N: the truncation g of a map
// onto F^N, the argmax labelling it induces, validation, exhaustive counting
// of fully labelled cells and the door-in/door-out walk that finds one.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sperner/complex.hpp"
#include "sperner/errors.hpp"
#include "sperner/kuhn.hpp"
#include "sperner/lattice.hpp"
#include "sperner/map.hpp"

namespace sperner {

/// g(x) = (f_1(x), ..., f_N(x), 1 - sum_{i<=N} f_i(x)) on F^N.
class FiniteMap {
 public:
  FiniteMap(MapPtr source, std::size_t dim) : source_(std::move(source)), dim_(dim) {
    if (!source_) throw PreconditionError("null map");
    if (dim < 1) throw PreconditionError("truncation dimension must be >= 1");
  }

  std::size_t dim() const noexcept { return dim_; }
  const MapOracle& source() const noexcept { return *source_; }
  const MapPtr& source_ptr() const noexcept { return source_; }
  std::uint64_t evaluations() const noexcept { return evaluations_.load(std::memory_order_relaxed); }

  /// coords holds x_1..x_{N+1}; returns g_1..g_{N+1}, summing to 1.
  std::vector<double> operator()(std::span<const double> coords) const {
    if (coords.size() != dim_ + 1) throw PreconditionError("point is not in F^N");
    const Point x = Point::from_dense(coords);
    return at(x);
  }

  std::vector<double> operator()(const LatticePoint& v) const {
    if (v.num.size() != dim_ + 1) throw PreconditionError("lattice point is not in F^N");
    return at(v.to_point());
  }

 private:
  std::vector<double> at(const Point& x) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    auto g = source_->components(x, dim_);
    double total = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double v = g[i];
      if (!std::isfinite(v) || v < -kMembershipTol || v > 1.0 + kMembershipTol)
        throw MapRangeError("component f" + std::to_string(i + 1) + " = " + detail::format_real(v) +
                            " outside [0,1] at x = " + to_text(x));
      g[i] = std::clamp(v, 0.0, 1.0);
      total += g[i];
    }
    if (total > 1.0 + kMembershipTol)
      throw MapRangeError("f_1 + ... + f_" + std::to_string(dim_) + " = " + detail::format_real(total) +
                          " > 1 at x = " + to_text(x));
    if (total > 1.0) {
      for (std::size_t i = 0; i < dim_; ++i) g[i] /= total;
      g.push_back(0.0);
    } else {
      g.push_back(1.0 - total);
    }
    return g;
  }

  MapPtr source_;
  std::size_t dim_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

inline FiniteMap truncate_map(MapPtr f, std::size_t dim) { return FiniteMap(std::move(f), dim); }

/// Least index i in the carrier of v maximizing v_i - g_i. Labels are 1-based.
inline std::size_t argmax_label(std::span<const double> v, std::span<const double> g) {
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) continue;
    const double d = v[i] - g[i];
    if (best == 0 || d > best_value) {
      best = i + 1;
      best_value = d;
    }
  }
  if (best == 0) throw PreconditionError("vertex has an empty carrier");
  return best;
}

inline std::size_t sperner_label(const LatticePoint& v, const FiniteMap& g) {
  const auto gv = g(v);
  return argmax_label(v.coords(), gv);
}

/// Lazily evaluated, memoized labelling induced by a truncated map.
/// Safe for concurrent queries; each vertex is evaluated at most once.
class MapLabeling {
 public:
  explicit MapLabeling(const FiniteMap& g) : g_(&g) {}

  std::size_t operator()(const LatticePoint& v) const {
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(v); it != cache_.end()) return it->second;
    }
    const std::size_t label = sperner_label(v, *g_);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(v, label).first->second;
  }

  std::size_t cached_vertices() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

  const FiniteMap& map() const noexcept { return *g_; }

 private:
  const FiniteMap* g_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<LatticePoint, std::size_t, LatticePointHash> cache_;
};

/// Labels stored per vertex.
class ExplicitLabeling {
 public:
  void assign(LatticePoint v, std::size_t label) { labels_[std::move(v)] = label; }

  std::size_t operator()(const LatticePoint& v) const {
    auto it = labels_.find(v);
    if (it == labels_.end()) throw PreconditionError("vertex has no label");
    return it->second;
  }

  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> labels_;
};

/// Uniform choice from each vertex's carrier, so the result is always a
/// Sperner labelling. Reproducible for a given seed and vertex order.
inline ExplicitLabeling random_sperner_labeling(const std::vector<LatticePoint>& vertices,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ExplicitLabeling out;
  for (const auto& v : vertices) {
    const auto carrier = v.carrier();
    out.assign(v, carrier[rng() % carrier.size()]);
  }
  return out;
}

inline std::vector<LatticePoint> all_vertices(const KuhnTriangulation& t) { return t.lattice_points(); }

inline std::vector<LatticePoint> all_vertices(const SimplicialComplex& t) {
  std::vector<LatticePoint> out;
  out.reserve(t.vertex_count());
  for (std::size_t id = 0; id < t.vertex_count(); ++id) out.push_back(t.vertex(id));
  return out;
}

struct SpernerViolation {
  LatticePoint vertex;
  std::size_t label;
};

struct SpernerReport {
  bool valid = true;
  std::optional<SpernerViolation> first_violation;
};

/// True iff every vertex's label indexes a vertex of its carrier face.
template <typename Labeler>
SpernerReport validate_sperner(const std::vector<LatticePoint>& vertices, const Labeler& label) {
  for (const auto& v : vertices) {
    const std::size_t l = label(v);
    if (!v.in_carrier(l)) return {false, SpernerViolation{v, l}};
  }
  return {};
}

template <typename Triangulation, typename Labeler>
SpernerReport validate_sperner(const Triangulation& t, const Labeler& label) {
  return validate_sperner(all_vertices(t), label);
}

/// Labels form a permutation of 1..labels.size().
inline bool is_full(std::span<const std::size_t> labels) {
  std::vector<bool> seen(labels.size() + 1, false);
  for (auto l : labels) {
    if (l < 1 || l > labels.size() || seen[l]) return false;
    seen[l] = true;
  }
  return true;
}

/// Fully labelled cells in enumeration order.
template <typename Labeler>
std::vector<KuhnCell> full_cells(const KuhnTriangulation& t, const Labeler& label) {
  std::vector<KuhnCell> out;
  std::vector<std::size_t> labels;
  t.for_each_cell([&](const KuhnCell& c) {
    labels.clear();
    for (const auto& v : t.vertices(c)) labels.push_back(label(v));
    if (is_full(labels)) out.push_back(c);
  });
  return out;
}

template <typename Labeler>
std::vector<std::size_t> full_cells(const SimplicialComplex& t, const Labeler& label) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    labels.clear();
    for (const auto& v : t.vertices(c)) labels.push_back(label(v));
    if (is_full(labels)) out.push_back(c);
  }
  return out;
}

template <typename Triangulation, typename Labeler>
std::size_t count_full_cells(const Triangulation& t, const Labeler& label) {
  return full_cells(t, label).size();
}

struct PathOptions {
  /// Keep every visited cell to prove the walk never repeats one.
  bool track_visits = false;
};

struct PathResult {
  KuhnCell cell;
  std::vector<std::size_t> labels;  // label of each vertex of `cell`
  std::size_t cells_visited = 0;    // over all face dimensions
  std::size_t pivots = 0;
};

namespace detail {

struct KuhnCellHash {
  std::size_t operator()(const KuhnCell& c) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ull ^ c.perm.size();
    for (auto v : c.base) h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    for (auto v : c.perm) h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Finds a fully labelled N-cell by following doors from the vertex e_1.
///
/// The walk moves through the nested faces F^0 = {e_1} ⊂ F^1 ⊂ ... ⊂ F^N.
/// Inside F^m a door is a facet whose labels are exactly {1..m}; a cell of
/// F^m labelled {1..m+1} is a door into F^{m+1}. Every cell on the way has
/// exactly two doors except e_1 and the fully labelled N-cells, so the walk
/// cannot repeat a cell and stops at a full cell. A door found on the
/// boundary of F^m must lie in F^{m-1} (Sperner property) and the walk steps
/// back down into it.
template <typename Labeler>
PathResult find_full_cell_pathfollow(const KuhnTriangulation& t, const Labeler& label,
                                     PathOptions options = {}) {
  const std::size_t top = t.dim();
  const std::int64_t k = t.resolution();
  auto vertex_label = [&](const KuhnCell& c, std::size_t s) {
    return label(kuhn::w_to_lattice(kuhn::vertex_w(c, s), k, top));
  };

  PathResult result;
  std::unordered_set<KuhnCell, detail::KuhnCellHash> visited;

  // Step up from e_1 into the 1-cell [e_1, e_1 + (e_2 - e_1)/k].
  KuhnCell cell{{0}, {0}};
  std::vector<std::size_t> labels{vertex_label(cell, 0), vertex_label(cell, 1)};
  if (labels[0] != 1) throw InternalError("e_1 must carry label 1");
  std::size_t m = 1;
  std::optional<std::size_t> entry = 1;  // door we came through; nullopt when entered from above

  for (;;) {
    if (++result.cells_visited > t.cell_cap())
      throw ResourceCapExceeded("path-following visited more than " + std::to_string(t.cell_cap()) + " cells",
                                t.cell_cap());
    if (options.track_visits && !visited.insert(cell).second)
      throw InternalError("path-following revisited a cell; the labelling changed during the walk");

    std::size_t exit = 0;
    if (entry) {
      if (is_full(labels)) {
        if (m == top) {
          result.cell = std::move(cell);
          result.labels = std::move(labels);
          return result;
        }
        // Door into F^{m+1}: append a move along the new axis.
        cell.base.push_back(0);
        cell.perm.push_back(static_cast<int>(m));
        labels.push_back(vertex_label(cell, m + 1));
        ++m;
        entry = m;
        continue;
      }
      const std::size_t in = *entry;
      std::size_t twin = in;
      for (std::size_t s = 0; s <= m; ++s)
        if (s != in && labels[s] == labels[in]) twin = s;
      if (twin == in) throw InternalError("entered a cell through a facet that is not a door");
      exit = twin;
    } else {
      // Came down from F^{m+1}: leave through the facet without label m+1.
      auto it = std::find(labels.begin(), labels.end(), m + 1);
      if (it == labels.end()) throw InternalError("descended into a cell that is not fully labelled");
      exit = static_cast<std::size_t>(it - labels.begin());
    }

    ++result.pivots;
    if (auto next = kuhn::pivot(cell, exit, k)) {
      const std::size_t fresh = kuhn::pivot_fresh_index(exit, m);
      if (exit == 0) {
        labels.erase(labels.begin());
        labels.push_back(0);
      } else if (exit == m) {
        labels.pop_back();
        labels.insert(labels.begin(), 0);
      }
      cell = std::move(*next);
      labels[fresh] = vertex_label(cell, fresh);
      entry = fresh;
      continue;
    }

    // Boundary door: only the face x_{m+1} = 0 can carry labels {1..m}.
    const bool on_lower_face = exit == m && cell.base[m - 1] == 0 &&
                               cell.perm[m - 1] == static_cast<int>(m - 1);
    if (!on_lower_face)
      throw InternalError("door on the boundary of F^" + std::to_string(m) +
                          " outside its lower face; the labelling is not Sperner");
    if (m == 1) throw InternalError("path-following returned to e_1");
    cell.base.pop_back();
    cell.perm.pop_back();
    labels.pop_back();
    --m;
    entry.reset();
  }
}

}  // namespace sperner
