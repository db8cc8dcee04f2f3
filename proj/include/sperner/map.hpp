#pragma once

// Continuous self-maps of the closed infinite simplex, evaluated component
// by component, and the small library of builtin maps.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sperner/errors.hpp"
#include "sperner/point.hpp"

namespace sperner {

class MapOracle {
 public:
  virtual ~MapOracle() = default;

  /// Raw components f_1..f_n at x, without range checks. Must be pure.
  virtual std::vector<double> components(const Point& x, std::size_t n) const = 0;

  /// Largest index whose component can be nonzero at x.
  virtual std::size_t output_extent(const Point& x) const = 0;

  /// Largest index that can be nonzero anywhere; nullopt when unbounded.
  virtual std::optional<std::size_t> support_bound() const = 0;

  virtual std::string describe() const = 0;
};

using MapPtr = std::shared_ptr<const MapOracle>;

namespace detail {

inline void check_range(const std::vector<double>& raw, const Point& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!std::isfinite(v) || v < -kMembershipTol || v > 1.0 + kMembershipTol)
      throw MapRangeError("component f" + std::to_string(i + 1) + " = " + format_real(v) +
                          " outside [0,1] at x = " + to_text(x));
    total += v;
  }
  if (total > 1.0 + kMembershipTol)
    throw MapRangeError("components sum to " + format_real(total) + " > 1 at x = " + to_text(x));
}

inline Point clamp_to_point(const std::vector<double>& raw) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (raw[i] != 0.0) entries.push_back({i + 1, std::clamp(raw[i], 0.0, 1.0)});
  return Point::from_entries(std::move(entries));
}

}  // namespace detail

/// f(x) as a Point. Throws MapRangeError if the output leaves the simplex.
inline Point evaluate(const MapOracle& f, const Point& x) {
  const auto raw = f.components(x, f.output_extent(x));
  detail::check_range(raw, x);
  return detail::clamp_to_point(raw);
}

/// Clamp every entry to [0,1], then rescale if the sum exceeds 1. Entry 0 is
/// coordinate 1. Exactly idempotent on points of the simplex.
inline Point project_to_simplex(std::span<const double> raw) {
  std::vector<double> v(raw.begin(), raw.end());
  double total = 0.0;
  for (double& c : v) {
    if (std::isnan(c)) throw MapRangeError("cannot project a NaN component");
    c = std::clamp(c, 0.0, 1.0);
    total += c;
  }
  // Sums within a few ulps of 1 are left alone so a second pass is a no-op.
  if (total > 1.0 + 1e-12)
    for (double& c : v) c /= total;
  return detail::clamp_to_point(v);
}

class IdentityMap final : public MapOracle {
 public:
  std::vector<double> components(const Point& x, std::size_t n) const override { return x.dense(n); }
  std::size_t output_extent(const Point& x) const override { return x.support_max(); }
  std::optional<std::size_t> support_bound() const override { return std::nullopt; }
  std::string describe() const override { return "identity"; }
};

class ConstantMap final : public MapOracle {
 public:
  explicit ConstantMap(Point value) : value_(std::move(value)) {}
  std::vector<double> components(const Point&, std::size_t n) const override { return value_.dense(n); }
  std::size_t output_extent(const Point&) const override { return value_.support_max(); }
  std::optional<std::size_t> support_bound() const override { return value_.support_max(); }
  std::string describe() const override {
    const auto& e = value_.entries();
    if (e.size() == 1 && e[0].value == 1.0) return "constant-e" + std::to_string(e[0].index);
    std::string out = "constant(";
    for (std::size_t i = 1; i <= value_.support_max(); ++i) {
      if (i > 1) out += ",";
      out += detail::format_real(value_[i]);
    }
    return out + ")";
  }

 private:
  Point value_;
};

/// Cyclic rotation of the first n coordinates, f_i = x_{i-1} (f_1 = x_n),
/// with the mass 1 - sum_{j<=n} x_j spread evenly over them. The image lies
/// in the face spanned by e_1..e_n and the barycenter of that face is the
/// unique fixed point.
class RotationMap final : public MapOracle {
 public:
  explicit RotationMap(std::size_t n) : n_(n) {
    if (n < 1) throw PreconditionError("rotation needs at least one coordinate");
  }
  std::vector<double> components(const Point& x, std::size_t n) const override {
    const auto head = x.dense(n_);
    // Extended precision keeps the barycenter an exact fixed point.
    long double mass = 1.0L;
    for (double v : head) mass -= v;
    const auto share = static_cast<double>(std::max(mass, 0.0L) / static_cast<long double>(n_));
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < std::min(n, n_); ++i)
      out[i] = head[(i + n_ - 1) % n_] + share;
    return out;
  }
  std::size_t output_extent(const Point&) const override { return n_; }
  std::optional<std::size_t> support_bound() const override { return n_; }
  std::string describe() const override { return "rotation-" + std::to_string(n_); }

 private:
  std::size_t n_;
};

/// x -> (0, x_1, x_2, ...). Fixed point: the origin.
class ShiftMap final : public MapOracle {
 public:
  std::vector<double> components(const Point& x, std::size_t n) const override {
    std::vector<double> out(n, 0.0);
    for (const auto& e : x.entries())
      if (e.index + 1 <= n) out[e.index] = e.value;
    return out;
  }
  std::size_t output_extent(const Point& x) const override {
    return x.empty() ? 0 : x.support_max() + 1;
  }
  std::optional<std::size_t> support_bound() const override { return std::nullopt; }
  std::string describe() const override { return "shift"; }
};

/// (1-t) f + t g.
class ConvexComboMap final : public MapOracle {
 public:
  ConvexComboMap(MapPtr f, MapPtr g, double t) : f_(std::move(f)), g_(std::move(g)), t_(t) {
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("convex weight must lie in [0,1]");
  }
  std::vector<double> components(const Point& x, std::size_t n) const override {
    auto a = f_->components(x, n);
    const auto b = g_->components(x, n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (1.0 - t_) * a[i] + t_ * b[i];
    return a;
  }
  std::size_t output_extent(const Point& x) const override {
    return std::max(f_->output_extent(x), g_->output_extent(x));
  }
  std::optional<std::size_t> support_bound() const override {
    const auto a = f_->support_bound();
    const auto b = g_->support_bound();
    if (!a || !b) return std::nullopt;
    return std::max(*a, *b);
  }
  std::string describe() const override {
    return "combo(" + detail::format_real(t_) + "," + f_->describe() + "," + g_->describe() + ")";
  }

 private:
  MapPtr f_, g_;
  double t_;
};

inline MapPtr identity_map() { return std::make_shared<IdentityMap>(); }
inline MapPtr constant_map(Point value) { return std::make_shared<ConstantMap>(std::move(value)); }
inline MapPtr rotation_map(std::size_t n) { return std::make_shared<RotationMap>(n); }
inline MapPtr shift_map() { return std::make_shared<ShiftMap>(); }
inline MapPtr convex_combo(MapPtr f, MapPtr g, double t) {
  return std::make_shared<ConvexComboMap>(std::move(f), std::move(g), t);
}

namespace detail {

class BuiltinParser {
 public:
  explicit BuiltinParser(std::string_view text) : text_(text) {}

  MapPtr parse_all() {
    auto out = parse();
    if (pos_ != text_.size()) fail("trailing characters");
    return out;
  }

 private:
  MapPtr parse() {
    const auto name = word();
    if (name == "identity") return identity_map();
    if (name == "shift") return shift_map();
    if (name.starts_with("rotation-")) return rotation_map(integer(name.substr(9)));
    if (name.starts_with("constant-e")) return constant_map(Point::basis(integer(name.substr(10))));
    if (name == "constant") {
      std::vector<double> coords;
      expect('(');
      coords.push_back(number());
      while (peek(',')) coords.push_back(number());
      expect(')');
      try {
        return constant_map(Point::from_dense(coords));
      } catch (const PreconditionError& e) {
        fail(std::string("constant map value: ") + e.what());
      }
    }
    if (name == "combo") {
      expect('(');
      const double t = number();
      expect(',');
      auto f = parse();
      expect(',');
      auto g = parse();
      expect(')');
      try {
        return convex_combo(std::move(f), std::move(g), t);
      } catch (const PreconditionError& e) {
        fail(e.what());
      }
    }
    throw UnknownBuiltin("unknown builtin map '" + std::string(name) + "'");
  }

  std::string_view word() {
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
      ++pos_;
    if (start == pos_) fail("expected a builtin name");
    return text_.substr(start, pos_ - start);
  }

  std::size_t integer(std::string_view digits) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size() || v == 0)
      throw UnknownBuiltin("bad builtin parameter '" + std::string(digits) + "'");
    return v;
  }

  double number() {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(p - text_.data());
    return v;
  }

  bool peek(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw UnknownBuiltin("bad builtin '" + std::string(text_) + "': " + what + " at offset " +
                         std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Builtins by name: identity, shift, rotation-<n>, constant-e<i>,
/// constant(p1,p2,...), combo(t,<map>,<map>).
inline MapPtr builtin(std::string_view name) { return detail::BuiltinParser(name).parse_all(); }

/// The maps every solver-level property is checked against.
inline std::vector<std::string> builtin_suite() {
  return {"identity",   "constant-e1", "constant-e3", "constant(0.2,0.3,0.1)", "rotation-3",
          "rotation-4", "shift",       "combo(0.5,rotation-3,shift)", "combo(0.25,identity,constant-e2)"};
}

}  // namespace sperner
