#include <catch_amalgamated.hpp>

#include <cmath>

#include "sperner/io.hpp"
#include "sperner/map.hpp"
#include "sperner/map_dsl.hpp"
#include "sperner/solver.hpp"

using namespace sperner;

namespace {

double sup_to_barycenter(const Point& y, std::size_t n) {
  double out = 0.0;
  for (std::size_t i = 1; i <= std::max(n, y.support_max()); ++i)
    out = std::max(out, std::abs(y[i] - (i <= n ? 1.0 / static_cast<double>(n) : 0.0)));
  return out;
}

// Residual recomputed from scratch over a long dense prefix.
double independent_residual(const MapOracle& f, const Point& y) {
  const std::size_t n = 200;
  const auto fy = f.components(y, n);
  double total = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double d = std::abs(y[i] - fy[i - 1]);
    total += d / (std::pow(2.0, static_cast<double>(i)) * (1.0 + d));
  }
  return total;
}

void check_certificate(const Certificate& c, const MapPtr& f) {
  CHECK(c.residual + c.residual_tail_bound < c.epsilon_requested);
  CHECK(independent_residual(*f, c.point_y) < c.epsilon_requested);
  CHECK(c.point_y.support_max() <= c.params.N);
  CHECK(is_member(c.point_y, Region::closure()));
  CHECK(is_full(c.witness_labels));
  CHECK(c.witness_vertices.size() == c.params.N + 1);
  CHECK(c.mesh_used == 1.0 / static_cast<double>(c.resolution));
  const auto w = check_witness(c, truncate_map(f, c.params.N));
  CHECK(w.diagonal_nonnegative);
  CHECK(w.vertices_close);
}

}  // namespace

TEST_CASE("plan_parameters examples") {
  const auto half = plan_parameters(0.5);
  CHECK(half.N == 3);
  CHECK(half.eps0 == 0.015625);
  CHECK(half.eps1 == 0.5 / (256.0 * 4.0));
  CHECK(half.mesh_target == half.eps1);
  CHECK(plan_parameters(0.01).N == 9);
  CHECK(plan_parameters(2.0).epsilon == 1.0);
  CHECK_THROWS_AS(plan_parameters(0.0), PreconditionError);
  CHECK_THROWS_AS(plan_parameters(-1.0), PreconditionError);
  CHECK_THROWS_AS(plan_parameters(0.5, {std::size_t{2}, std::nullopt, std::nullopt}), PreconditionError);
  CHECK(plan_parameters(0.5, {std::size_t{5}, std::nullopt, std::nullopt}).N == 5);
  CHECK(plan_parameters(0.5, {std::nullopt, std::nullopt, 4.0}).mesh_target == half.eps1 / 4.0);
  CHECK(plan_parameters(0.5, {std::nullopt, std::nullopt, 0.5}).mesh_target == half.eps1);
}

TEST_CASE("the tail bound holds and N is monotone") {
  std::size_t last = 0;
  for (double eps = 1.0; eps > 1e-12; eps *= 0.83) {
    const auto p = plan_parameters(eps);
    CHECK(std::ldexp(1.0, -static_cast<int>(p.N)) < p.epsilon / 2.0);
    CHECK(p.N == static_cast<std::size_t>(std::ceil(std::log2(2.0 / p.epsilon) + 1.0)));
    CHECK(p.N >= last);
    last = p.N;
  }
}

TEST_CASE("residual examples") {
  const Point y = Point::from_entries({{1, 0.25}, {3, 0.5}});
  CHECK(residual(*identity_map(), y).value == 0.0);
  const auto r = residual(*builtin("constant-e1"), Point::basis(2));
  CHECK(r.value == 0.375);
  CHECK(r.tail_bound == 0.0);
  CHECK(residual(*shift_map(), Point{}).value == 0.0);
  const auto s = residual(*shift_map(), y);
  CHECK(s.prefix == 60);
  CHECK(s.tail_bound == std::ldexp(1.0, -60));
  CHECK(s.value == Catch::Approx(independent_residual(*shift_map(), y)).epsilon(1e-14));
}

TEST_CASE("identity is solved on the first pass") {
  for (double eps : {0.5, 0.1, 0.01}) {
    const auto c = epsilon_fixed_point(identity_map(), eps);
    CHECK(c.residual == 0.0);
    CHECK(c.refinement_count == 0);
  }
  SolverConfig coarse;
  coarse.initial_resolution = 4;
  CHECK(epsilon_fixed_point(identity_map(), 1e-6, coarse).residual == 0.0);
}

TEST_CASE("rotation lands near the barycenter") {
  const auto f = builtin("rotation-3");
  for (double eps : {0.1, 0.01}) {
    const auto c = epsilon_fixed_point(f, eps);
    check_certificate(c, f);
    CHECK(sup_to_barycenter(c.point_y, 3) < 10.0 * eps);
  }
}

TEST_CASE("shift converges towards the origin") {
  const auto f = shift_map();
  const auto c = epsilon_fixed_point(f, 0.05);
  check_certificate(c, f);
  CHECK(product_metric(c.point_y, Point{}) < 0.2);
}

TEST_CASE("every builtin yields a valid certificate") {
  for (const auto& name : builtin_suite()) {
    CAPTURE(name);
    const auto f = builtin(name);
    for (double eps : {0.2, 0.05}) check_certificate(epsilon_fixed_point(f, eps), f);
  }
}

TEST_CASE("parsed maps can be solved") {
  const auto f = parsed_map(parse_map("f1 = 0.5*x1 + 0.5*x2; f2 = 0.5*x1 + 0.5*x2"), "averaging");
  const auto c = epsilon_fixed_point(f, 0.01);
  check_certificate(c, f);
  CHECK(c.map_name == "averaging");
}

TEST_CASE("fixed_point drives the residual below the tolerance") {
  const auto rot = builtin("rotation-3");
  const auto c = fixed_point(rot, 1e-3);
  check_certificate(c, rot);
  CHECK(c.residual < 1e-3);
  CHECK(c.epsilon_requested == 1e-3);

  const auto e1 = builtin("constant-e1");
  const auto d = fixed_point(e1, 1e-4);
  CHECK(product_metric(d.point_y, Point::basis(1)) < 1e-4);
}

TEST_CASE("a Lipschitz modulus sets the starting mesh") {
  SolverConfig config;
  config.lipschitz = 1.0;
  const auto f = builtin("rotation-3");
  const auto c = epsilon_fixed_point(f, 0.5, config);
  check_certificate(c, f);
  CHECK(c.resolution == static_cast<std::int64_t>(std::ceil(4.0 / c.params.mesh_target)));
  CHECK(c.params.lipschitz == 1.0);
}

TEST_CASE("refinement exhaustion reports the best candidate") {
  SolverConfig config;
  config.initial_resolution = 2;
  config.max_refinements = 0;
  try {
    epsilon_fixed_point(builtin("rotation-3"), 1e-3, config);
    FAIL("expected RefinementExhausted");
  } catch (const RefinementExhausted& e) {
    CHECK(e.best().resolution == 2);
    CHECK(e.best().residual >= 1e-3);
    CHECK(std::string(e.what()).find("best residual") != std::string::npos);
  }
}

TEST_CASE("solver errors") {
  const auto bad = parsed_map(parse_map("f1 = 0.9; f2 = 0.9"), "bad");
  CHECK_THROWS_AS(epsilon_fixed_point(bad, 0.1), MapRangeError);
  SolverConfig tiny;
  tiny.cell_cap = 3;
  CHECK_THROWS_AS(epsilon_fixed_point(identity_map(), 0.1, tiny), ResourceCapExceeded);
  CHECK_THROWS_AS(fixed_point(identity_map(), 0.0), PreconditionError);
}

TEST_CASE("solving is deterministic") {
  const auto f = builtin("combo(0.5,rotation-3,shift)");
  const auto a = certificate_to_json(epsilon_fixed_point(f, 0.01));
  const auto b = certificate_to_json(epsilon_fixed_point(f, 0.01));
  CHECK(a == b);
  CHECK(a.find("\"schema_version\": 1") != std::string::npos);
}
