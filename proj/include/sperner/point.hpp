#pragma once

// Finitely supported points of the closed infinite-dimensional simplex
// {x : 0 <= x_i <= 1, sum x_i <= 1}, the product metric on them, and the
// bounds relating its truncations to the sup norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "sperner/errors.hpp"

namespace sperner {

/// Absolute tolerance for sum and range checks.
inline constexpr double kMembershipTol = 1e-9;
/// Magnitudes below this are dropped from the sparse representation.
inline constexpr double kZeroCutoff = 1e-15;

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

struct Entry {
  std::size_t index;  // 1-based
  double value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Element of the closed infinite simplex stored as its nonzero coordinates.
/// The default-constructed Point is the origin.
class Point {
 public:
  Point() = default;

  /// Validates and canonicalizes. Entries may arrive unsorted; duplicate
  /// indices, index 0, non-finite values, values outside [0,1] or a sum above
  /// 1 (beyond kMembershipTol) are rejected.
  static Point from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    Point p;
    double total = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const Entry& e = entries[k];
      if (e.index == 0) throw PreconditionError("point coordinates are 1-indexed");
      if (k > 0 && entries[k - 1].index == e.index)
        throw PreconditionError("duplicate coordinate index " + std::to_string(e.index));
      if (!std::isfinite(e.value))
        throw PreconditionError("non-finite coordinate at index " + std::to_string(e.index));
      if (e.value < -kMembershipTol || e.value > 1.0 + kMembershipTol)
        throw PreconditionError("coordinate " + std::to_string(e.index) + " = " +
                                detail::format_real(e.value) + " outside [0,1]");
      const double v = std::clamp(e.value, 0.0, 1.0);
      if (v < kZeroCutoff) continue;
      total += v;
      p.entries_.push_back({e.index, v});
    }
    if (total > 1.0 + kMembershipTol)
      throw PreconditionError("coordinate sum " + detail::format_real(total) + " exceeds 1");
    return p;
  }

  /// coords[0] becomes coordinate 1.
  static Point from_dense(std::span<const double> coords) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] != 0.0) entries.push_back({i + 1, coords[i]});
    return from_entries(std::move(entries));
  }

  static Point basis(std::size_t index) { return from_entries({{index, 1.0}}); }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Coordinate at a 1-based index; zero outside the support.
  double operator[](std::size_t index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, std::size_t i) { return e.index < i; });
    return (it != entries_.end() && it->index == index) ? it->value : 0.0;
  }

  /// Largest index with a nonzero coordinate, 0 for the origin.
  std::size_t support_max() const noexcept {
    return entries_.empty() ? 0 : entries_.back().index;
  }

  double sum() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.value;
    return s;
  }

  /// Coordinates 1..n as a dense vector.
  std::vector<double> dense(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    for (const auto& e : entries_)
      if (e.index <= n) out[e.index - 1] = e.value;
    return out;
  }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<Entry> entries_;
};

namespace detail {

/// Calls fn(index, |x_i - y_i|) for every index in the joint support, in
/// increasing order.
template <typename Fn>
void for_each_difference(const Point& x, const Point& y, Fn&& fn) {
  const auto& a = x.entries();
  const auto& b = y.entries();
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      fn(a[i].index, a[i].value);
      ++i;
    } else if (i == a.size() || b[j].index < a[i].index) {
      fn(b[j].index, b[j].value);
      ++j;
    } else {
      fn(a[i].index, std::abs(a[i].value - b[j].value));
      ++i;
      ++j;
    }
  }
}

inline double metric_term(std::size_t index, double diff) {
  return std::ldexp(diff / (1.0 + diff), -static_cast<int>(std::min<std::size_t>(index, 2000)));
}

}  // namespace detail

/// sum_i |x_i - y_i| / (2^i (1 + |x_i - y_i|)); finite because both supports are.
inline double product_metric(const Point& x, const Point& y) {
  double total = 0.0;
  detail::for_each_difference(x, y, [&](std::size_t i, double d) {
    total += detail::metric_term(i, d);
  });
  return total;
}

/// The product metric restricted to coordinates 1..n.
inline double truncated_metric(const Point& x, const Point& y, std::size_t n) {
  if (n == 0) throw PreconditionError("truncated metric needs n >= 1");
  double total = 0.0;
  detail::for_each_difference(x, y, [&](std::size_t i, double d) {
    if (i <= n) total += detail::metric_term(i, d);
  });
  return total;
}

inline double sup_distance(const Point& x, const Point& y) {
  double m = 0.0;
  detail::for_each_difference(x, y, [&](std::size_t, double d) { m = std::max(m, d); });
  return m;
}

/// Truncation dimension and diameter bound M for the sup-norm sandwich.
struct MetricParams {
  std::size_t truncation_dim = 1;
  double bound_M = 1.0;
};

struct EquivalenceCheck {
  bool lhs_ok;  // d_n(x,y) <= n |x-y|_inf
  bool rhs_ok;  // |x-y|_inf <= 2^n (1+M) d_n(x,y)
};

inline EquivalenceCheck check_equivalence_bounds(const Point& x, const Point& y, std::size_t n,
                                                 double bound_M) {
  if (n == 0) throw PreconditionError("equivalence bounds need n >= 1");
  if (x.support_max() > n || y.support_max() > n)
    throw PreconditionError("point support exceeds truncation dimension " + std::to_string(n));
  if (!(bound_M >= 0.0)) throw PreconditionError("bound M must be nonnegative");
  const double sup = sup_distance(x, y);
  if (sup > bound_M) throw PreconditionError("sup distance exceeds bound M");
  const double dn = truncated_metric(x, y, n);
  return {dn <= static_cast<double>(n) * sup,
          sup <= std::ldexp(1.0 + bound_M, static_cast<int>(n)) * dn};
}

/// Regions of the infinite simplex a point can be tested against.
struct Region {
  enum class Kind { SimplexClosure, Face, OpenHull };
  Kind kind = Kind::SimplexClosure;
  std::size_t face_dim = 0;  // n for the face conv{e_1, ..., e_{n+1}}

  static Region closure() { return {Kind::SimplexClosure, 0}; }
  static Region face(std::size_t n) { return {Kind::Face, n}; }
  static Region open_hull() { return {Kind::OpenHull, 0}; }
};

inline bool is_member(const Point& x, Region region) {
  // Construction already enforces the closure invariants.
  switch (region.kind) {
    case Region::Kind::SimplexClosure:
      return true;
    case Region::Kind::Face:
      return x.support_max() <= region.face_dim + 1 &&
             std::abs(x.sum() - 1.0) <= kMembershipTol;
    case Region::Kind::OpenHull:
      return std::abs(x.sum() - 1.0) <= kMembershipTol;
  }
  return false;
}

/// Isometric embedding of the standard simplex in R^{n+1} onto the face
/// spanned by e_1..e_{n+1}.
inline Point embed_face(std::span<const double> coords) {
  double total = 0.0;
  for (double c : coords) {
    if (!(c >= 0.0)) throw PreconditionError("face coordinates must be nonnegative");
    total += c;
  }
  if (std::abs(total - 1.0) > kMembershipTol)
    throw PreconditionError("face coordinates sum to " + detail::format_real(total) + ", not 1");
  return Point::from_dense(coords);
}

/// [[index, value], ...] with 17 significant digits.
inline std::string to_text(const Point& x) {
  std::string out = "[";
  bool first = true;
  for (const auto& e : x.entries()) {
    if (!first) out += ", ";
    first = false;
    out += "[" + std::to_string(e.index) + ", " + detail::format_real(e.value) + "]";
  }
  return out + "]";
}

}  // namespace sperner
