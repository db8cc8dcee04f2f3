#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "sperner/point.hpp"

namespace sperner {

/// Exact rational point of a face F^N: coordinate j+1 is num[j] / denom.
/// Numerators are nonnegative and sum to denom.
struct LatticePoint {
  std::vector<std::int64_t> num;
  std::int64_t denom = 1;

  std::size_t dim() const noexcept { return num.empty() ? 0 : num.size() - 1; }

  double coord(std::size_t index) const {
    return index >= 1 && index <= num.size()
               ? static_cast<double>(num[index - 1]) / static_cast<double>(denom)
               : 0.0;
  }

  /// 1-based indices of the nonzero coordinates.
  std::vector<std::size_t> carrier() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < num.size(); ++j)
      if (num[j] > 0) out.push_back(j + 1);
    return out;
  }

  bool in_carrier(std::size_t label) const {
    return label >= 1 && label <= num.size() && num[label - 1] > 0;
  }

  std::vector<double> coords() const {
    std::vector<double> out(num.size());
    for (std::size_t j = 0; j < num.size(); ++j) out[j] = coord(j + 1);
    return out;
  }

  Point to_point() const {
    const auto c = coords();
    return Point::from_dense(c);
  }

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull ^ static_cast<std::uint64_t>(p.denom);
    for (auto v : p.num) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace sperner
