#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sperner/map.hpp"
#include "sperner/map_dsl.hpp"
#include "test_support.hpp"

using namespace sperner;

namespace {

Point pt(std::initializer_list<double> xs) { return Point::from_dense(std::vector<double>(xs)); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> corpus(const char* sub) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(SPERNER_SOURCE_DIR) / "maps" / sub))
    if (e.path().extension() == ".map") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Random expression trees of bounded depth, built directly as Expr values.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 10);
  switch (pick(rng)) {
    case 0: {
      const double choices[] = {0.0, 0.5, 1.0, 2.0, 0.125, 1e-5, 0.1, 1.0 / 3.0};
      return Expr{Expr::Kind::Number, choices[rng() % 8], 0, {}};
    }
    case 1: return Expr{Expr::Kind::Variable, 0.0, 1 + rng() % 12, {}};
    case 2: return Expr{Expr::Kind::Neg, 0.0, 0, {random_expr(rng, depth - 1)}};
    case 3: return Expr{Expr::Kind::Add, 0.0, 0, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
    case 4: return Expr{Expr::Kind::Sub, 0.0, 0, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
    case 5: return Expr{Expr::Kind::Mul, 0.0, 0, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
    case 6: return Expr{Expr::Kind::Div, 0.0, 0, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
    case 7: return Expr{Expr::Kind::Abs, 0.0, 0, {random_expr(rng, depth - 1)}};
    case 8: return Expr{Expr::Kind::Pow, rng() % 2 ? 2.0 : -1.5, 0, {random_expr(rng, depth - 1)}};
    case 9: return Expr{Expr::Kind::Min, 0.0, 0, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
    default:
      return Expr{Expr::Kind::Max,
                  0.0,
                  0,
                  {random_expr(rng, depth - 1), random_expr(rng, depth - 1), random_expr(rng, depth - 1)}};
  }
}

template <typename E>
E parse_error(std::string_view src) {
  try {
    parse_map(src);
  } catch (const E& e) {
    return e;
  }
  FAIL("expected a parse error for: " << src);
  throw;
}

}  // namespace

TEST_CASE("parse examples") {
  const auto rot = parse_map("f1 = x3; f2 = x1; f3 = x2; tail zeros");
  REQUIRE(rot.components.size() == 3);
  CHECK(rot.components[0] == Expr{Expr::Kind::Variable, 0.0, 3, {}});
  CHECK(rot.tail.kind == TailRule::Kind::Zeros);
  CHECK(rot.post == PostStep::None);

  const auto avg = parse_map("f1 = 0.5*x1 + 0.5*x2; f2 = 0.5*x1 + 0.5*x2; tail zeros");
  REQUIRE(avg.components.size() == 2);
  CHECK(avg.components[0].kind == Expr::Kind::Add);
  CHECK(avg.components[0].args[0].kind == Expr::Kind::Mul);

  const auto multi = parse_map("# comment\n\nf2 = x1\nf1 = 0   # trailing\ntail shift from 2\npost project\n");
  CHECK(multi.components.size() == 2);
  CHECK(multi.tail == TailRule{TailRule::Kind::ShiftFrom, 2});
  CHECK(multi.post == PostStep::ProjectToSimplex);
}

TEST_CASE("precedence and associativity") {
  const auto s = parse_map("f1 = 1 - 0.5 - 0.25 + 0.5*x1/2");
  CHECK(dsl::eval(s.components[0], Point::basis(1)) == Catch::Approx(0.25 + 0.25));
  const auto neg = parse_map("f1 = -x1*x2 + -(-0.5)");
  CHECK(dsl::eval(neg.components[0], pt({0.5, 0.5})) == Catch::Approx(0.25));
  const auto fn = parse_map("f1 = min(x1, x2, 0.3) + max(x1, 0) + abs(x2 - x1) + pow(x1, 2)");
  CHECK(dsl::eval(fn.components[0], pt({0.5, 0.25})) == Catch::Approx(0.25 + 0.5 + 0.25 + 0.25));
}

TEST_CASE("dangling operator is reported at the operator") {
  const auto e = parse_error<SyntaxError>("f1 = x1 +");
  CHECK(e.line() == 1);
  CHECK(e.column() == 9);
  CHECK(e.message().find("'+'") != std::string::npos);
  CHECK(e.expected().count("variable") == 1);
  CHECK(std::string(e.what()).rfind("1:9:", 0) == 0);
}

TEST_CASE("parse diagnostics") {
  CHECK(parse_error<EmptyComponentList>("# nothing here\n").line() == 2);
  CHECK(parse_error<EmptyComponentList>("tail zeros").line() == 1);

  const auto undeclared = parse_error<UndeclaredVariable>("f1 = 0.5\nf2 = y + 1");
  CHECK(undeclared.line() == 2);
  CHECK(undeclared.column() == 6);
  CHECK(parse_error<UndeclaredVariable>("f1 = x0").column() == 6);

  CHECK(parse_error<SyntaxError>("f1 = x1; f3 = x2").message() == "component f2 is missing");
  CHECK(parse_error<SyntaxError>("f1 = x1; f1 = x2").message() == "duplicate component f1");
  CHECK(parse_error<SyntaxError>("f1 = (x1 + x2").column() == 14);
  CHECK(parse_error<SyntaxError>("f1 = pow(x1, x2)").column() == 14);
  CHECK(parse_error<SyntaxError>("f1 = min(x1)").column() == 6);
  CHECK(parse_error<SyntaxError>("f1 = x1 $ 2").column() == 9);
  CHECK(parse_error<SyntaxError>("f1 x1").column() == 4);
  CHECK(parse_error<SyntaxError>("f1 = x1 x2").column() == 9);
  CHECK(parse_error<SyntaxError>("f1 = x1\ntail shift 2").line() == 2);
  CHECK(parse_error<SyntaxError>("f1 = x1\npost clamp").column() == 6);
  CHECK(parse_error<SyntaxError>("g1 = x1").column() == 1);
}

TEST_CASE("evaluate examples") {
  const auto rot = parse_map("f1 = x3; f2 = x1; f3 = x2; tail zeros");
  CHECK(evaluate_map(rot, pt({0.5, 0.5, 0.0})) == pt({0.0, 0.5, 0.5}));

  const auto avg = parse_map("f1 = 0.5*x1 + 0.5*x2; f2 = 0.5*x1 + 0.5*x2; tail zeros");
  CHECK(evaluate_map(avg, Point::basis(1)) == pt({0.5, 0.5}));

  CHECK_THROWS_AS(evaluate_map(parse_map("f1 = 2*x1; tail zeros"), Point::basis(1)), RangeViolation);
  CHECK(evaluate_map(parse_map("f1 = 2*x1; post project"), Point::basis(1)) == Point::basis(1));

  const auto shift = parse_map("f1 = 0; tail shift from 2");
  const Point x = pt({0.1, 0.2, 0.3});
  CHECK(evaluate_map(shift, x) == evaluate(*shift_map(), x));
  CHECK(evaluate_map(parse_map("f1 = x1; f2 = x2; tail shift from 3"), x) == pt({0.1, 0.2, 0.1, 0.2, 0.3}));
}

TEST_CASE("division by zero echoes the input") {
  try {
    evaluate_map(parse_map("f1 = x1 / x2"), Point::basis(1));
    FAIL("expected DivisionByZero");
  } catch (const DivisionByZero& e) {
    const std::string what = e.what();
    CHECK(what.find("x1/x2") != std::string::npos);
    CHECK(what.find("[[1, 1]]") != std::string::npos);
  }
}

TEST_CASE("project_to_simplex") {
  const std::vector<double> big{2.0, 0.0, 0.0};
  CHECK(project_to_simplex(big) == Point::basis(1));
  const std::vector<double> halves{0.5, 0.5, 0.5};
  const Point third = project_to_simplex(halves);
  for (std::size_t i = 1; i <= 3; ++i) CHECK(third[i] == Catch::Approx(1.0 / 3));
  const std::vector<double> neg{-0.5, 0.25};
  CHECK(project_to_simplex(neg) == pt({0.0, 0.25}));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> wide(-1.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> raw(1 + trial % 9);
    for (auto& v : raw) v = wide(rng);
    const Point once = project_to_simplex(raw);
    CHECK(is_member(once, Region::closure()));
    const auto dense = once.dense(raw.size());
    CHECK(project_to_simplex(dense) == once);

    const Point inside = testing::random_point(rng, raw.size());
    const auto inside_dense = inside.dense(raw.size());
    CHECK(project_to_simplex(inside_dense) == inside);
  }
}

TEST_CASE("round trip of random specs") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    MapSpec spec;
    const std::size_t m = 1 + rng() % 4;
    for (std::size_t i = 0; i < m; ++i) spec.components.push_back(random_expr(rng, 4));
    if (rng() % 2) spec.tail = {TailRule::Kind::ShiftFrom, 1 + rng() % 5};
    if (rng() % 2) spec.post = PostStep::ProjectToSimplex;
    const std::string text = render_map(spec);
    CAPTURE(text);
    const MapSpec back = parse_map(text);
    CHECK(back == spec);
    CHECK(render_map(back) == text);
  }
}

TEST_CASE("builtin examples") {
  std::mt19937_64 rng(8);
  const Point x = testing::random_point(rng, 5);
  CHECK(evaluate(*builtin("identity"), x) == x);
  CHECK(evaluate(*builtin("shift"), Point::basis(1)) == Point::basis(2));
  CHECK(evaluate(*builtin("constant-e3"), x) == Point::basis(3));
  CHECK(builtin("shift")->support_bound() == std::nullopt);
  CHECK(builtin("constant-e3")->support_bound() == 3);
  CHECK(builtin("rotation-3")->describe() == "rotation-3");

  // Rotation agrees with the plain cyclic rotation on its face.
  CHECK(evaluate(*builtin("rotation-3"), pt({0.5, 0.5, 0.0})) == pt({0.0, 0.5, 0.5}));
  const Point bary = evaluate(*builtin("rotation-3"), Point{});
  for (std::size_t i = 1; i <= 3; ++i) CHECK(bary[i] == Catch::Approx(1.0 / 3));

  const Point combo = evaluate(*builtin("combo(0.5,identity,constant-e2)"), Point::basis(1));
  CHECK(combo == pt({0.5, 0.5}));
}

TEST_CASE("unknown builtins") {
  for (const char* name : {"", "identityx", "rotation-0", "rotation-", "constant-e0", "constant(0.7,0.7)",
                           "combo(2,identity,shift)", "combo(0.5,identity)", "spin"})
    CHECK_THROWS_AS(builtin(name), UnknownBuiltin);
}

TEST_CASE("builtins pass a randomized range audit") {
  std::mt19937_64 rng(10'000);
  for (const auto& name : builtin_suite()) {
    const auto f = builtin(name);
    for (int trial = 0; trial < 10'000; ++trial) {
      const Point x = testing::random_point(rng, 1 + trial % 12, trial % 3 == 0);
      const Point y = evaluate(*f, x);
      REQUIRE(is_member(y, Region::closure()));
    }
  }
}

TEST_CASE("the shipped map corpus parses and round-trips") {
  const auto valid = corpus("valid");
  CHECK(valid.size() >= 10);
  std::mt19937_64 rng(4);
  for (const auto& path : valid) {
    CAPTURE(path.filename().string());
    const MapSpec spec = parse_map(slurp(path));
    CHECK(parse_map(render_map(spec)) == spec);
    const auto f = parsed_map(spec, path.stem().string());
    for (int trial = 0; trial < 200; ++trial)
      CHECK(is_member(evaluate(*f, testing::random_point(rng, 1 + trial % 8)), Region::closure()));
  }
}

TEST_CASE("the malformed corpus is rejected with positions") {
  const auto malformed = corpus("malformed");
  CHECK(malformed.size() >= 10);
  for (const auto& path : malformed) {
    CAPTURE(path.filename().string());
    CHECK_THROWS_AS(parse_map(slurp(path)), ParseError);
  }
}
