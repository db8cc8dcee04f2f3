#pragma once

// epsilon-fixed points of continuous self-maps of the closed infinite simplex.
//
// For a target epsilon the map f is truncated to g on the face F^N with
// 2^-N < epsilon/2, F^N is triangulated, the argmax labelling of g is walked
// to a fully labelled cell and the candidate y is the first N coordinates of
// that cell's label-1 vertex. The residual d(y, f(y)) is then measured and
// the triangulation refined until it drops below epsilon.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sperner/errors.hpp"
#include "sperner/kuhn.hpp"
#include "sperner/labeling.hpp"
#include "sperner/lattice.hpp"
#include "sperner/map.hpp"
#include "sperner/point.hpp"

namespace sperner {

inline constexpr const char* kSolverVersion = "1.0.0";

struct SolverParams {
  double epsilon = 1.0;
  std::size_t N = 2;
  double eps0 = 0.0;         // epsilon / (8 (N+1))
  double eps1 = 0.0;         // epsilon / (2^{N+5} (N+1))
  double mesh_target = 0.0;  // min(delta_1, eps1) in the product metric
  std::size_t max_refinements = 20;
  std::optional<double> lipschitz;  // modulus: d(g x, g y) <= L d(x, y)
  double tail_bound = 0.0;          // 2^-N, always < epsilon / 2
};

struct PlanOverrides {
  std::optional<std::size_t> N;  // must still satisfy the tail bound
  std::optional<std::size_t> max_refinements;
  std::optional<double> lipschitz;
};

/// Derives N, eps0, eps1 and the mesh target from epsilon (clamped to 1).
inline SolverParams plan_parameters(double epsilon, const PlanOverrides& overrides = {}) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("epsilon must be positive");
  SolverParams p;
  p.epsilon = std::min(epsilon, 1.0);
  auto n = static_cast<std::size_t>(std::ceil(std::log2(2.0 / p.epsilon) + 1.0));
  // Guard against rounding in log2 so that 2^-N < epsilon/2 holds exactly.
  while (std::ldexp(1.0, -static_cast<int>(n)) >= p.epsilon / 2.0) ++n;
  if (overrides.N) {
    if (*overrides.N < n)
      throw PreconditionError("N = " + std::to_string(*overrides.N) + " violates the tail bound; need N >= " +
                              std::to_string(n));
    n = *overrides.N;
  }
  p.N = n;
  const double np1 = static_cast<double>(n + 1);
  p.eps0 = p.epsilon / (8.0 * np1);
  p.eps1 = std::ldexp(p.epsilon / np1, -static_cast<int>(n + 5));
  p.tail_bound = std::ldexp(1.0, -static_cast<int>(n));
  if (overrides.max_refinements) p.max_refinements = *overrides.max_refinements;
  if (overrides.lipschitz) {
    if (!(*overrides.lipschitz > 0.0)) throw PreconditionError("Lipschitz constant must be positive");
    p.lipschitz = overrides.lipschitz;
  }
  p.mesh_target = p.lipschitz ? std::min(p.eps1 / *p.lipschitz, p.eps1) : p.eps1;
  return p;
}

struct SolverConfig {
  std::size_t max_refinements = 20;
  std::optional<double> lipschitz;
  /// Starting Kuhn resolution; 0 picks one from epsilon (or from the modulus).
  std::int64_t initial_resolution = 0;
  std::size_t cell_cap = kDefaultCellCap;
  bool track_visits = false;
};

struct ResidualReport {
  double value = 0.0;       // sum over coordinates 1..prefix
  double tail_bound = 0.0;  // bound on the neglected coordinates
  std::size_t prefix = 0;
};

/// d(y, f(y)) over coordinates 1..max(support(y), min_prefix); the rest of
/// the series is bounded by 2^-prefix unless f declares a smaller support.
inline ResidualReport residual(const MapOracle& f, const Point& y, std::size_t min_prefix = 60) {
  ResidualReport r;
  r.prefix = std::max({y.support_max(), min_prefix, std::size_t{60}});
  const auto bound = f.support_bound();
  const auto fy = f.components(y, r.prefix);
  detail::check_range(fy, y);
  for (std::size_t i = 1; i <= r.prefix; ++i) {
    const double d = std::abs(y[i] - fy[i - 1]);
    if (d > 0.0) r.value += detail::metric_term(i, d);
  }
  r.tail_bound = (bound && *bound <= r.prefix) ? 0.0 : std::ldexp(1.0, -static_cast<int>(r.prefix));
  return r;
}

struct Certificate {
  Point point_y;
  double epsilon_requested = 0.0;
  double residual = 0.0;
  double residual_tail_bound = 0.0;
  SolverParams params;
  std::string map_name;
  KuhnCell witness_cell;
  std::vector<LatticePoint> witness_vertices;
  std::vector<std::size_t> witness_labels;
  std::int64_t resolution = 0;
  double mesh_used = 0.0;  // sup-norm diameter of every cell, 1/resolution
  std::size_t refinement_count = 0;
  std::uint64_t map_evaluations = 0;
  std::size_t cells_visited = 0;
};

struct WitnessCheck {
  bool diagonal_nonnegative = true;  // x^i_i - g_i(x^i) >= 0 for every i
  bool vertices_close = true;        // |x^1_j - x^i_j| < 2^{N+2} * mesh for all i, j
  double min_diagonal = 0.0;
  double max_spread = 0.0;
};

/// Re-evaluates g at the witness vertices and checks both inequalities.
inline WitnessCheck check_witness(const Certificate& c, const FiniteMap& g) {
  WitnessCheck out;
  const std::size_t n1 = c.witness_vertices.size();
  std::vector<const LatticePoint*> by_label(n1 + 1, nullptr);
  for (std::size_t s = 0; s < n1; ++s) by_label.at(c.witness_labels.at(s)) = &c.witness_vertices[s];
  out.min_diagonal = INFINITY;
  for (std::size_t i = 1; i <= n1; ++i) {
    const auto gi = g(*by_label[i]);
    const double d = by_label[i]->coord(i) - gi[i - 1];
    out.min_diagonal = std::min(out.min_diagonal, d);
    if (!(d >= 0.0)) out.diagonal_nonnegative = false;
  }
  const double limit = std::ldexp(c.mesh_used, static_cast<int>(c.params.N + 2));
  for (std::size_t i = 1; i <= n1; ++i)
    for (std::size_t j = 1; j <= n1; ++j) {
      const double spread = std::abs(by_label[1]->coord(j) - by_label[i]->coord(j));
      out.max_spread = std::max(out.max_spread, spread);
      if (!(spread < limit)) out.vertices_close = false;
    }
  return out;
}

class RefinementExhausted : public Error {
 public:
  RefinementExhausted(const std::string& what, Certificate best) : Error(what), best_(std::move(best)) {}
  const Certificate& best() const noexcept { return best_; }

 private:
  Certificate best_;
};

namespace detail {

inline std::int64_t resolution_for_mesh(std::size_t n, double mesh) {
  // d_{N+1} <= (N+1) |.|_inf on F^N, so sup-mesh (N+1)^-1 * mesh suffices.
  const double k = std::ceil(static_cast<double>(n + 1) / mesh);
  if (!(k <= static_cast<double>(std::int64_t{1} << 52)))
    throw ResourceCapExceeded("required resolution exceeds exact lattice range", 0);
  return static_cast<std::int64_t>(k);
}

inline std::int64_t initial_resolution(const SolverParams& p, const SolverConfig& config) {
  if (config.initial_resolution > 0) return config.initial_resolution;
  if (p.lipschitz) return resolution_for_mesh(p.N, p.mesh_target);
  // Without a modulus the a-priori mesh eps1 is astronomically fine; start
  // at sup-mesh epsilon/2 and let the residual test drive refinement.
  return std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(2.0 / p.epsilon)), 2);
}

}  // namespace detail

/// One pass at a fixed resolution: walk to a full cell and build the candidate.
inline Certificate solve_at_resolution(const MapPtr& f, const SolverParams& params, std::int64_t resolution,
                                       const SolverConfig& config = {}) {
  const FiniteMap g = truncate_map(f, params.N);
  const KuhnTriangulation tri(params.N, resolution, config.cell_cap);
  const MapLabeling labeling(g);
  auto path = find_full_cell_pathfollow(tri, labeling, {config.track_visits});

  Certificate c;
  c.params = params;
  c.epsilon_requested = params.epsilon;
  c.map_name = f->describe();
  c.resolution = resolution;
  c.mesh_used = 1.0 / static_cast<double>(resolution);
  c.witness_vertices = tri.vertices(path.cell);
  c.witness_labels = path.labels;
  c.witness_cell = std::move(path.cell);
  c.cells_visited = path.cells_visited;

  const auto x1 = std::find(c.witness_labels.begin(), c.witness_labels.end(), std::size_t{1});
  const LatticePoint& first = c.witness_vertices[static_cast<std::size_t>(x1 - c.witness_labels.begin())];
  std::vector<double> y(params.N);
  for (std::size_t i = 0; i < params.N; ++i) y[i] = first.coord(i + 1);
  c.point_y = Point::from_dense(y);

  const auto r = residual(*f, c.point_y, params.N);
  c.residual = r.value;
  c.residual_tail_bound = r.tail_bound;
  c.map_evaluations = g.evaluations() + 1;
  return c;
}

/// Certified epsilon-fixed point: residual + tail bound < epsilon.
inline Certificate epsilon_fixed_point(const MapPtr& f, double epsilon, const SolverConfig& config = {}) {
  const SolverParams params =
      plan_parameters(epsilon, {std::nullopt, config.max_refinements, config.lipschitz});
  std::int64_t k = detail::initial_resolution(params, config);
  std::uint64_t evaluations = 0;
  std::optional<Certificate> best;
  for (std::size_t pass = 0; pass <= params.max_refinements; ++pass) {
    Certificate c = solve_at_resolution(f, params, k, config);
    evaluations += c.map_evaluations;
    c.map_evaluations = evaluations;
    c.refinement_count = pass;
    if (c.residual + c.residual_tail_bound < params.epsilon) return c;
    if (!best || c.residual < best->residual) best = c;
    if (k > (std::int64_t{1} << 51)) break;
    k *= 2;
  }
  best->map_evaluations = evaluations;
  throw RefinementExhausted("no epsilon-fixed point after " + std::to_string(params.max_refinements) +
                                " refinements (best residual " + detail::format_real(best->residual) +
                                " at resolution " + std::to_string(best->resolution) +
                                "); the map may be discontinuous or vary faster than the budget allows",
                            *best);
}

/// Drives the residual below tol, halving epsilon from the largest tol*2^m <= 1
/// and starting each stage at the previous stage's resolution.
inline Certificate fixed_point(const MapPtr& f, double tol, const SolverConfig& config = {}) {
  if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
  double eps = std::min(tol, 1.0);
  int stages = 0;
  while (eps * 2.0 <= 1.0) {
    eps *= 2.0;
    ++stages;
  }
  SolverConfig stage_config = config;
  std::uint64_t evaluations = 0;
  std::size_t refinements = 0;
  std::optional<Certificate> last;
  for (int s = 0; s <= stages; ++s) {
    const double stage_eps = std::ldexp(eps, -s);
    if (last) {
      const auto fresh = detail::initial_resolution(
          plan_parameters(stage_eps, {std::nullopt, config.max_refinements, config.lipschitz}), config);
      stage_config.initial_resolution = std::max(fresh, last->resolution);
    }
    last = epsilon_fixed_point(f, stage_eps, stage_config);
    evaluations += last->map_evaluations;
    refinements += last->refinement_count;
  }
  last->map_evaluations = evaluations;
  last->refinement_count = refinements;
  return *last;
}

}  // namespace sperner
