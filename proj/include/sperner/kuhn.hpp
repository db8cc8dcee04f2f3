#pragma once

// Freudenthal/Kuhn subdivision of the face F^N at resolution k.
//
// A lattice point z (nonnegative integers summing to k) is stored through
// its tail sums w_j = z_{j+1} + ... + z_{N+1}, j = 1..N, which range over
// {k >= w_1 >= w_2 >= ... >= w_N >= 0}. That region is a union of cells of
// Kuhn's cube triangulation: a cell is a base point b and a permutation p
// of the axes, with vertices v_0 = b and v_t = v_{t-1} + e_{p_t}. Moving along
// axis j takes one unit from z_j to z_{j+1}, so every cell has sup diameter
// exactly 1/k and there are k^N cells.
//
// The same representation with dim() < N describes the cells of the lower
// faces F^m = conv{e_1..e_{m+1}}; the walk in labeling.hpp relies on that.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "sperner/errors.hpp"
#include "sperner/lattice.hpp"

namespace sperner {

/// Default budget for cells enumerated or visited.
inline constexpr std::size_t kDefaultCellCap = 50'000'000;

struct KuhnCell {
  std::vector<std::int64_t> base;  // tail-sum coordinates of vertex 0
  std::vector<int> perm;           // 0-based axes, perm.size() == dim

  std::size_t dim() const noexcept { return perm.size(); }

  friend bool operator==(const KuhnCell&, const KuhnCell&) = default;
  friend auto operator<=>(const KuhnCell&, const KuhnCell&) = default;
};

namespace kuhn {

inline std::vector<std::int64_t> vertex_w(const KuhnCell& c, std::size_t t) {
  auto w = c.base;
  for (std::size_t s = 0; s < t; ++s) ++w[static_cast<std::size_t>(c.perm[s])];
  return w;
}

inline bool w_in_region(const std::vector<std::int64_t>& w, std::int64_t k) {
  if (w.empty()) return true;
  if (w.front() > k || w.back() < 0) return false;
  for (std::size_t j = 1; j < w.size(); ++j)
    if (w[j] > w[j - 1]) return false;
  return true;
}

/// Lattice point of tail sums w, padded with zeros to coordinates 1..ambient+1.
inline LatticePoint w_to_lattice(const std::vector<std::int64_t>& w, std::int64_t k,
                                 std::size_t ambient) {
  LatticePoint p;
  p.denom = k;
  p.num.assign(ambient + 1, 0);
  const std::size_t m = w.size();
  if (m == 0) {
    p.num[0] = k;
    return p;
  }
  p.num[0] = k - w[0];
  for (std::size_t j = 1; j < m; ++j) p.num[j] = w[j - 1] - w[j];
  p.num[m] = w[m - 1];
  return p;
}

inline bool contains(const KuhnCell& c, std::int64_t k) {
  for (std::size_t t = 0; t <= c.dim(); ++t)
    if (!w_in_region(vertex_w(c, t), k)) return false;
  return true;
}

/// Replaces vertex t by reflection. Returns nullopt when the facet opposite
/// vertex t lies on the boundary of F^{dim}.
inline std::optional<KuhnCell> pivot(const KuhnCell& c, std::size_t t, std::int64_t k) {
  const std::size_t m = c.dim();
  if (t > m) throw PreconditionError("pivot vertex index out of range");
  if (m == 0) return std::nullopt;
  KuhnCell next = c;
  std::size_t fresh;  // index of the new vertex in `next`
  if (t == 0) {
    ++next.base[static_cast<std::size_t>(c.perm[0])];
    std::rotate(next.perm.begin(), next.perm.begin() + 1, next.perm.end());
    fresh = m;
  } else if (t == m) {
    --next.base[static_cast<std::size_t>(c.perm[m - 1])];
    std::rotate(next.perm.begin(), next.perm.end() - 1, next.perm.end());
    fresh = 0;
  } else {
    std::swap(next.perm[t - 1], next.perm[t]);
    fresh = t;
  }
  if (!w_in_region(vertex_w(next, fresh), k)) return std::nullopt;
  return next;
}

/// Index of the vertex that pivot(c, t) introduced, within the new cell.
inline std::size_t pivot_fresh_index(std::size_t t, std::size_t m) {
  if (t == 0) return m;
  if (t == m) return 0;
  return t;
}

inline std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    out *= base;
  }
  return out;
}

inline std::uint64_t saturating_binomial(std::uint64_t n, std::uint64_t r) {
  r = std::min(r, n - r);
  unsigned __int128 out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    out = out * (n - r + i) / i;
    if (out > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(out);
}

}  // namespace kuhn

/// Lazy Kuhn triangulation of F^N; nothing is materialized until enumerated.
class KuhnTriangulation {
 public:
  KuhnTriangulation(std::size_t dim, std::int64_t resolution,
                    std::size_t cell_cap = kDefaultCellCap)
      : dim_(dim), k_(resolution), cap_(cell_cap) {
    if (dim < 1) throw PreconditionError("triangulation dimension must be >= 1");
    if (resolution < 1) throw PreconditionError("resolution must be >= 1");
    if (resolution > (std::int64_t{1} << 52))
      throw ResourceCapExceeded("resolution exceeds exact lattice range", cell_cap);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::int64_t resolution() const noexcept { return k_; }
  std::size_t cell_cap() const noexcept { return cap_; }

  std::uint64_t cell_count() const {
    return kuhn::saturating_pow(static_cast<std::uint64_t>(k_), dim_);
  }
  /// Lattice points of the k-dilated simplex: C(k+N, N).
  std::uint64_t vertex_count() const {
    return kuhn::saturating_binomial(static_cast<std::uint64_t>(k_) + dim_, dim_);
  }

  /// The cell at e_1 with the identity move order.
  KuhnCell corner_cell() const {
    KuhnCell c;
    c.base.assign(dim_, 0);
    c.perm.resize(dim_);
    std::iota(c.perm.begin(), c.perm.end(), 0);
    return c;
  }

  LatticePoint vertex(const KuhnCell& c, std::size_t t) const {
    return kuhn::w_to_lattice(kuhn::vertex_w(c, t), k_, dim_);
  }

  std::vector<LatticePoint> vertices(const KuhnCell& c) const {
    std::vector<LatticePoint> out;
    out.reserve(c.dim() + 1);
    auto w = c.base;
    out.push_back(kuhn::w_to_lattice(w, k_, dim_));
    for (std::size_t s = 0; s < c.dim(); ++s) {
      ++w[static_cast<std::size_t>(c.perm[s])];
      out.push_back(kuhn::w_to_lattice(w, k_, dim_));
    }
    return out;
  }

  bool contains(const KuhnCell& c) const {
    return c.dim() == dim_ && c.base.size() == dim_ && kuhn::contains(c, k_);
  }

  /// The cell sharing the facet opposite vertex t, or nullopt on the boundary.
  std::optional<KuhnCell> facet_neighbor(const KuhnCell& c, std::size_t t) const {
    if (c.dim() != dim_) throw PreconditionError("cell dimension mismatch");
    if (t > dim_) throw PreconditionError("vertex index " + std::to_string(t) + " not in cell");
    return kuhn::pivot(c, t, k_);
  }

  /// Visits every N-cell in lexicographic (base, permutation) order.
  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    check_cap(cell_count(), "cells");
    std::vector<std::int64_t> base(dim_, 0);
    enumerate_bases(0, k_ - 1, base, fn);
  }

  /// All lattice points in lexicographic order of their numerators.
  std::vector<LatticePoint> lattice_points() const {
    check_cap(vertex_count(), "vertices");
    std::vector<LatticePoint> out;
    LatticePoint p;
    p.denom = k_;
    p.num.assign(dim_ + 1, 0);
    enumerate_points(0, k_, p, out);
    return out;
  }

 private:
  void check_cap(std::uint64_t count, const char* what) const {
    if (count > cap_)
      throw ResourceCapExceeded(std::string("Kuhn triangulation has ") + std::to_string(count) +
                                    " " + what + ", above the cap of " + std::to_string(cap_),
                                cap_);
  }

  template <typename Fn>
  void enumerate_bases(std::size_t j, std::int64_t upper, std::vector<std::int64_t>& base,
                       Fn& fn) const {
    if (j == dim_) {
      emit_perms(base, fn);
      return;
    }
    for (std::int64_t v = 0; v <= upper; ++v) {
      base[j] = v;
      enumerate_bases(j + 1, v, base, fn);
    }
  }

  template <typename Fn>
  void emit_perms(const std::vector<std::int64_t>& base, Fn& fn) const {
    KuhnCell c;
    c.base = base;
    c.perm.resize(dim_);
    std::iota(c.perm.begin(), c.perm.end(), 0);
    std::vector<std::size_t> pos(dim_);
    do {
      for (std::size_t s = 0; s < dim_; ++s) pos[static_cast<std::size_t>(c.perm[s])] = s;
      bool ok = true;
      // Where two tail sums tie, the earlier axis must move first.
      for (std::size_t j = 0; j + 1 < dim_ && ok; ++j)
        if (base[j] == base[j + 1] && pos[j] > pos[j + 1]) ok = false;
      if (ok) fn(static_cast<const KuhnCell&>(c));
    } while (std::next_permutation(c.perm.begin(), c.perm.end()));
  }

  void enumerate_points(std::size_t j, std::int64_t remaining, LatticePoint& p,
                        std::vector<LatticePoint>& out) const {
    if (j == dim_) {
      p.num[j] = remaining;
      out.push_back(p);
      return;
    }
    for (std::int64_t v = 0; v <= remaining; ++v) {
      p.num[j] = v;
      enumerate_points(j + 1, remaining - v, p, out);
    }
  }

  std::size_t dim_;
  std::int64_t k_;
  std::size_t cap_;
};

inline KuhnTriangulation kuhn_triangulate(std::size_t dim, std::int64_t resolution,
                                          std::size_t cell_cap = kDefaultCellCap) {
  return KuhnTriangulation(dim, resolution, cell_cap);
}

}  // namespace sperner
