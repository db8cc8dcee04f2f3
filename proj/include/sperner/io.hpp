#pragma once

// JSON renderings of certificates, triangulations and label dumps. Reals are
// written with 17 significant digits; keys keep a fixed order so identical
// inputs give byte-identical output.

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <type_traits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sperner/complex.hpp"
#include "sperner/labeling.hpp"
#include "sperner/solver.hpp"

namespace sperner {

inline constexpr int kSchemaVersion = 1;

/// Minimal ordered JSON writer.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(const std::string& k) {
    separate();
    newline();
    out_ += quote(k) + ": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(std::isfinite(v) ? detail::format_real(v) : "null"); }
  template <typename T>
    requires(std::is_integral_v<T> && !std::is_same_v<T, bool>)
  JsonWriter& value(T v) {
    return raw(std::to_string(v));
  }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& v) { return raw(quote(v)); }
  JsonWriter& value(const char* v) { return raw(quote(v)); }
  JsonWriter& null() { return raw("null"); }

  /// Arrays of scalars stay on one line.
  template <typename T>
  JsonWriter& inline_array(const std::vector<T>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ", ";
      if constexpr (std::is_floating_point_v<T>)
        s += detail::format_real(xs[i]);
      else
        s += std::to_string(xs[i]);
    }
    return raw(s + "]");
  }

  JsonWriter& point(const Point& p) { return raw(to_text(p)); }

  /// Inserts pre-rendered JSON text as a value.
  JsonWriter& raw_value(const std::string& json) { return raw(json); }

  std::string str() const { return out_ + "\n"; }

 private:
  JsonWriter& open(char c) {
    raw_prefix();
    out_ += c;
    stack_.push_back(true);
    return *this;
  }

  JsonWriter& close(char c) {
    const bool empty = stack_.back();
    stack_.pop_back();
    if (!empty) newline();
    out_ += c;
    return *this;
  }

  JsonWriter& raw(const std::string& s) {
    raw_prefix();
    out_ += s;
    return *this;
  }

  void raw_prefix() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (!stack_.empty()) {
      separate();
      newline();
    }
  }

  void separate() {
    if (stack_.empty()) return;
    if (!stack_.back()) out_ += ",";
    stack_.back() = false;
  }

  void newline() {
    out_ += "\n";
    out_.append(2 * stack_.size(), ' ');
  }

  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out += c;
          }
      }
    }
    return out + "\"";
  }

  std::string out_;
  std::vector<bool> stack_;  // true while the container is still empty
  bool pending_key_ = false;
};

/// Key/value pairs echoed into the output; values are raw JSON text.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline void write_params(JsonWriter& w, const SolverParams& p) {
  w.begin_object();
  w.key("epsilon").value(p.epsilon);
  w.key("N").value(static_cast<std::uint64_t>(p.N));
  w.key("eps0").value(p.eps0);
  w.key("eps1").value(p.eps1);
  w.key("mesh_target").value(p.mesh_target);
  w.key("max_refinements").value(static_cast<std::uint64_t>(p.max_refinements));
  w.key("lipschitz");
  if (p.lipschitz)
    w.value(*p.lipschitz);
  else
    w.null();
  w.key("tail_bound").value(p.tail_bound);
  w.end_object();
}

inline std::string certificate_to_json(const Certificate& c, const ConfigEcho& config = {}) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kSchemaVersion);
  w.key("kind").value("certificate");
  w.key("solver_version").value(kSolverVersion);
  w.key("map").value(c.map_name);
  w.key("point_y").point(c.point_y);
  w.key("epsilon_requested").value(c.epsilon_requested);
  w.key("residual").value(c.residual);
  w.key("residual_tail_bound").value(c.residual_tail_bound);
  w.key("params");
  write_params(w, c.params);
  w.key("witness_cell").begin_object();
  w.key("base").inline_array(c.witness_cell.base);
  w.key("perm").inline_array(c.witness_cell.perm);
  w.key("labels").inline_array(std::vector<std::uint64_t>(c.witness_labels.begin(), c.witness_labels.end()));
  w.key("vertices").begin_array();
  for (const auto& v : c.witness_vertices) w.inline_array(v.num);
  w.end_array();
  w.key("denominator").value(c.resolution);
  w.end_object();
  w.key("mesh_used").value(c.mesh_used);
  w.key("resolution").value(c.resolution);
  w.key("refinement_count").value(static_cast<std::uint64_t>(c.refinement_count));
  w.key("map_evaluations").value(c.map_evaluations);
  w.key("cells_visited").value(static_cast<std::uint64_t>(c.cells_visited));
  w.key("config").begin_object();
  for (const auto& [k, v] : config) w.key(k).raw_value(v);
  w.end_object();
  w.end_object();
  return w.str();
}

/// Vertices (exact numerators and coordinates), cells and optional labels.
inline std::string triangulation_to_json(const SimplicialComplex& t,
                                         const std::vector<std::size_t>* labels = nullptr,
                                         const std::string& map_name = {}) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kSchemaVersion);
  w.key("kind").value("triangulation");
  w.key("dim").value(static_cast<std::uint64_t>(t.dim()));
  w.key("scheme").begin_object();
  w.key("name").value(t.scheme().name());
  w.key("parameter").value(t.scheme().parameter);
  w.end_object();
  w.key("denominator").value(t.denominator());
  w.key("vertex_count").value(static_cast<std::uint64_t>(t.vertex_count()));
  w.key("cell_count").value(static_cast<std::uint64_t>(t.cell_count()));
  w.key("vertices").begin_array();
  for (std::size_t id = 0; id < t.vertex_count(); ++id) w.inline_array(t.vertex_numerators(id));
  w.end_array();
  w.key("coords").begin_array();
  for (std::size_t id = 0; id < t.vertex_count(); ++id) w.inline_array(t.vertex(id).coords());
  w.end_array();
  w.key("cells").begin_array();
  for (const auto& c : t.cells())
    w.inline_array(std::vector<std::uint64_t>(c.vertex_ids.begin(), c.vertex_ids.end()));
  w.end_array();
  if (labels) {
    if (!map_name.empty()) w.key("map").value(map_name);
    w.key("labels").inline_array(std::vector<std::uint64_t>(labels->begin(), labels->end()));
  }
  w.end_object();
  return w.str();
}

inline std::string sperner_report_to_json(const SpernerReport& r, std::size_t vertices_checked) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kSchemaVersion);
  w.key("kind").value("sperner-report");
  w.key("valid").value(r.valid);
  w.key("vertices_checked").value(static_cast<std::uint64_t>(vertices_checked));
  w.key("violation");
  if (r.first_violation) {
    w.begin_object();
    w.key("vertex").inline_array(r.first_violation->vertex.num);
    w.key("denominator").value(r.first_violation->vertex.denom);
    w.key("label").value(static_cast<std::uint64_t>(r.first_violation->label));
    const auto carrier = r.first_violation->vertex.carrier();
    w.key("carrier").inline_array(std::vector<std::uint64_t>(carrier.begin(), carrier.end()));
    w.end_object();
  } else {
    w.null();
  }
  w.end_object();
  return w.str();
}

}  // namespace sperner
