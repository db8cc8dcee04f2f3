#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sperner/point.hpp"

namespace sperner::testing {

/// Random point of the closed simplex supported in 1..n (sum <= 1).
inline Point random_point(std::mt19937_64& rng, std::size_t n, bool on_face = false) {
  std::exponential_distribution<double> exp(1.0);
  std::vector<double> w(n + 1);
  double total = 0.0;
  for (auto& v : w) total += (v = exp(rng));
  std::vector<double> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = w[i] / total;
  if (on_face) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += coords[i];
    coords[n - 1] = std::max(0.0, 1.0 - s);
  }
  return Point::from_dense(coords);
}

/// Dense reference implementation of the product metric over 1..n.
inline double dense_metric(const std::vector<double>& x, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - y[i]);
    total += d / (std::pow(2.0, static_cast<double>(i + 1)) * (1.0 + d));
  }
  return total;
}

}  // namespace sperner::testing
