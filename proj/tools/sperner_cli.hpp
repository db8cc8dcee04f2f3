#pragma once

// Command-line front end. Kept in a header so the test suites can drive
// run() in-process.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sperner/complex.hpp"
#include "sperner/io.hpp"
#include "sperner/kuhn.hpp"
#include "sperner/labeling.hpp"
#include "sperner/map.hpp"
#include "sperner/map_dsl.hpp"
#include "sperner/solver.hpp"

namespace sperner::cli {

enum ExitCode : int {
  kOk = 0,
  kGenericError = 1,
  kParseError = 2,
  kRangeError = 3,
  kRefinementExhausted = 4,
  kResourceCap = 5,
  kVerificationFailed = 6,
  kInternalError = 7,
  kUsage = 64,
};

inline constexpr const char* kCapEnvVar = "SPERNER_RESOURCE_CAP";

struct RunConfig {
  std::string command;
  std::string map_name;
  std::string map_file;
  double epsilon = 0.0;
  double tol = 0.0;
  std::int64_t initial_resolution = 0;
  std::optional<double> lipschitz;
  std::size_t max_refinements = 20;
  std::size_t dim = 2;
  std::int64_t resolution = 4;
  std::string scheme = "kuhn";
  std::int64_t depth = 1;
  std::optional<std::uint64_t> seed;
  std::string input;
  std::string output;
  std::optional<std::size_t> cap;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string json_string(const std::string& s) {
  return nlohmann::json(s).dump();
}

inline std::size_t cell_cap(const RunConfig& c) {
  if (c.cap) return *c.cap;
  if (const char* env = std::getenv(kCapEnvVar)) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw PreconditionError(std::string(kCapEnvVar) + " is not a nonnegative integer");
    }
  }
  return kDefaultCellCap;
}

/// Parse failures from map files are reported with the file name prepended.
struct MapFileError {
  std::string path;
  ParseError error;
};

inline MapPtr load_map(const RunConfig& c) {
  if (!c.map_file.empty()) {
    const std::string text = read_file(c.map_file);
    try {
      return parsed_map(parse_map(text), "file:" + std::filesystem::path(c.map_file).filename().string());
    } catch (const ParseError& e) {
      throw MapFileError{c.map_file, e};
    }
  }
  if (c.map_name.empty()) throw PreconditionError("one of --map or --map-file is required");
  return builtin(c.map_name);
}

inline ConfigEcho echo(const RunConfig& c, std::size_t cap) {
  ConfigEcho e{{"command", json_string(c.command)}};
  if (!c.map_file.empty())
    e.emplace_back("map_file", json_string(c.map_file));
  else
    e.emplace_back("map", json_string(c.map_name));
  if (c.command == "solve") e.emplace_back("epsilon", sperner::detail::format_real(c.epsilon));
  if (c.command == "fixpoint") e.emplace_back("tol", sperner::detail::format_real(c.tol));
  e.emplace_back("initial_resolution", std::to_string(c.initial_resolution));
  e.emplace_back("lipschitz", c.lipschitz ? sperner::detail::format_real(*c.lipschitz) : "null");
  e.emplace_back("max_refinements", std::to_string(c.max_refinements));
  e.emplace_back("cell_cap", std::to_string(cap));
  return e;
}

inline void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + c.output + "'");
  f << text;
}

inline SimplicialComplex build_complex(const RunConfig& c, std::size_t cap) {
  if (c.scheme == "kuhn") return to_complex(KuhnTriangulation(c.dim, c.resolution, cap));
  if (c.scheme == "barycentric") {
    if (c.depth < 0) throw PreconditionError("depth must be nonnegative");
    auto t = trivial_complex(c.dim);
    for (std::int64_t r = 0; r < c.depth; ++r) t = barycentric_subdivide(t, cap);
    return t;
  }
  throw PreconditionError("unknown scheme '" + c.scheme + "' (expected kuhn or barycentric)");
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  const std::size_t cap = cell_cap(c);
  const MapPtr f = load_map(c);
  SolverConfig sc;
  sc.max_refinements = c.max_refinements;
  sc.lipschitz = c.lipschitz;
  sc.initial_resolution = c.initial_resolution;
  sc.cell_cap = cap;
  const Certificate cert =
      c.command == "solve" ? epsilon_fixed_point(f, c.epsilon, sc) : fixed_point(f, c.tol, sc);
  emit(c, out, certificate_to_json(cert, echo(c, cap)));
  return kOk;
}

inline int cmd_count_full(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::size_t cap = cell_cap(c);
  std::size_t count = 0;
  std::string labelling;
  auto count_with = [&](const auto& tri) {
    if (!c.map_name.empty() || !c.map_file.empty()) {
      const FiniteMap g = truncate_map(load_map(c), c.dim);
      const MapLabeling lab(g);
      count = count_full_cells(tri, lab);
      labelling = "{\"kind\": \"map\", \"map\": " + json_string(g.source().describe()) + "}";
    } else {
      const auto seed = c.seed.value_or(0);
      const auto lab = random_sperner_labeling(all_vertices(tri), seed);
      count = count_full_cells(tri, lab);
      labelling = "{\"kind\": \"random\", \"seed\": " + std::to_string(seed) + "}";
    }
  };
  std::int64_t parameter = 0;
  if (c.scheme == "kuhn") {
    const KuhnTriangulation tri(c.dim, c.resolution, cap);
    count_with(tri);
    parameter = c.resolution;
  } else {
    const auto tri = build_complex(c, cap);
    count_with(tri);
    parameter = c.depth;
  }
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kSchemaVersion);
  w.key("kind").value("full-cell-count");
  w.key("dim").value(static_cast<std::uint64_t>(c.dim));
  w.key("scheme").begin_object();
  w.key("name").value(c.scheme);
  w.key("parameter").value(parameter);
  w.end_object();
  w.key("labelling").raw_value(labelling);
  w.key("full_cells").value(static_cast<std::uint64_t>(count));
  w.key("odd").value(count % 2 == 1);
  w.end_object();
  emit(c, out, w.str());
  if (count % 2 == 0) {
    err << "error: even number of fully labelled cells (" << count << "); the labelling is not Sperner\n";
    return kVerificationFailed;
  }
  return kOk;
}

inline int cmd_triangulate(const RunConfig& c, std::ostream& out) {
  const std::size_t cap = cell_cap(c);
  const auto tri = build_complex(c, cap);
  const bool with_map = !c.map_name.empty() || !c.map_file.empty();
  if (!with_map && !c.seed) {
    emit(c, out, triangulation_to_json(tri));
    return kOk;
  }
  std::vector<std::size_t> labels;
  labels.reserve(tri.vertex_count());
  std::string name;
  if (with_map) {
    const FiniteMap g = truncate_map(load_map(c), c.dim);
    name = g.source().describe();
    for (std::size_t id = 0; id < tri.vertex_count(); ++id) labels.push_back(sperner_label(tri.vertex(id), g));
  } else {
    const auto lab = random_sperner_labeling(all_vertices(tri), *c.seed);
    name = "random:" + std::to_string(*c.seed);
    for (std::size_t id = 0; id < tri.vertex_count(); ++id) labels.push_back(lab(tri.vertex(id)));
  }
  emit(c, out, triangulation_to_json(tri, &labels, name));
  return kOk;
}

inline int cmd_verify_label(const RunConfig& c, std::ostream& out, std::ostream& err) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(c.input));
  } catch (const nlohmann::json::parse_error& e) {
    err << c.input << ": error: " << e.what() << "\n";
    return kParseError;
  }
  std::vector<LatticePoint> vertices;
  ExplicitLabeling lab;
  try {
    const auto denom = doc.at("denominator").get<std::int64_t>();
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto& vs = doc.at("vertices");
    const auto& ls = doc.at("labels");
    if (!vs.is_array() || !ls.is_array() || vs.size() != ls.size())
      throw std::runtime_error("'vertices' and 'labels' must be arrays of equal length");
    if (denom < 1) throw std::runtime_error("'denominator' must be positive");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      LatticePoint p{vs[i].get<std::vector<std::int64_t>>(), denom};
      std::int64_t total = 0;
      for (auto v : p.num) {
        if (v < 0) throw std::runtime_error("vertex " + std::to_string(i) + " has a negative numerator");
        total += v;
      }
      if (p.num.size() != dim + 1 || total != denom)
        throw std::runtime_error("vertex " + std::to_string(i) + " does not lie on F^" + std::to_string(dim));
      lab.assign(p, ls[i].get<std::size_t>());
      vertices.push_back(std::move(p));
    }
  } catch (const std::exception& e) {
    err << c.input << ": error: malformed label dump: " << e.what() << "\n";
    return kParseError;
  }
  const auto report = validate_sperner(vertices, lab);
  emit(c, out, sperner_report_to_json(report, vertices.size()));
  if (!report.valid) {
    err << "error: label " << report.first_violation->label << " is outside the carrier of vertex "
        << nlohmann::json(report.first_violation->vertex.num).dump() << "/" << report.first_violation->vertex.denom
        << "\n";
    return kVerificationFailed;
  }
  return kOk;
}

inline int cmd_parse_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::string text = read_file(c.input);
  MapSpec spec;
  try {
    spec = parse_map(text);
  } catch (const ParseError& e) {
    err << c.input << ":" << e.line() << ":" << e.column() << ": error: " << e.message();
    if (const auto* s = dynamic_cast<const SyntaxError*>(&e); s && !s->expected().empty()) {
      err << " (expected:";
      for (const auto& x : s->expected()) err << " " << x;
      err << ")";
    }
    err << "\n";
    return kParseError;
  }
  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kSchemaVersion);
  w.key("kind").value("parse-check");
  w.key("file").value(c.input);
  w.key("ok").value(true);
  w.key("components").value(static_cast<std::uint64_t>(spec.components.size()));
  w.key("normalized").value(render_map(spec));
  w.end_object();
  emit(c, out, w.str());
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Certified epsilon-fixed points of self-maps of the infinite simplex"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_map = [&](CLI::App* sub) {
    auto* m = sub->add_option("--map", c.map_name, "builtin map, e.g. rotation-3, shift, combo(0.5,identity,shift)");
    auto* f = sub->add_option("--map-file", c.map_file, "map definition file");
    m->excludes(f);
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output,-o", c.output, "write the result to this file instead of stdout");
    sub->add_option("--cap", c.cap, std::string("cell budget (default from ") + kCapEnvVar + " or 50000000)");
  };
  auto add_solver = [&](CLI::App* sub) {
    add_map(sub);
    add_common(sub);
    sub->add_option("--initial-resolution", c.initial_resolution, "starting Kuhn resolution (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--lipschitz", c.lipschitz, "Lipschitz constant of the map in the product metric")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-refinements", c.max_refinements, "resolution doublings before giving up");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--dim", c.dim, "dimension N of the face F^N")->check(CLI::PositiveNumber);
    sub->add_option("--resolution", c.resolution, "Kuhn resolution k")->check(CLI::PositiveNumber);
    sub->add_option("--scheme", c.scheme, "kuhn or barycentric")->check(CLI::IsMember({"kuhn", "barycentric"}));
    sub->add_option("--depth", c.depth, "barycentric subdivision depth")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", c.seed, "seed for a random Sperner labelling");
  };

  auto* solve = app.add_subcommand("solve", "compute a certified epsilon-fixed point");
  add_solver(solve);
  solve->add_option("--epsilon", c.epsilon, "target residual")->required()->check(CLI::PositiveNumber);

  auto* fixpoint = app.add_subcommand("fixpoint", "drive the residual below a tolerance by halving epsilon");
  add_solver(fixpoint);
  fixpoint->add_option("--tol", c.tol, "tolerance")->required()->check(CLI::PositiveNumber);

  auto* count = app.add_subcommand("count-full", "count fully labelled cells exhaustively");
  add_grid(count);
  add_map(count);
  add_common(count);

  auto* tri = app.add_subcommand("triangulate", "export vertices, cells and optional labels");
  add_grid(tri);
  add_map(tri);
  add_common(tri);

  auto* verify = app.add_subcommand("verify-label", "check a label dump for the Sperner property");
  verify->add_option("--input,input", c.input, "label dump (triangulate output with labels)")->required();
  add_common(verify);

  auto* parse = app.add_subcommand("parse-check", "validate a map definition file");
  parse->add_option("--input,input", c.input, "map file")->required();
  add_common(parse);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (c.command == "solve" || c.command == "fixpoint") return detail::cmd_solve(c, out);
    if (c.command == "count-full") return detail::cmd_count_full(c, out, err);
    if (c.command == "triangulate") return detail::cmd_triangulate(c, out);
    if (c.command == "verify-label") return detail::cmd_verify_label(c, out, err);
    return detail::cmd_parse_check(c, out, err);
  } catch (const detail::MapFileError& e) {
    err << e.path << ":" << e.error.line() << ":" << e.error.column() << ": error: " << e.error.message() << "\n";
    return kParseError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const UnknownBuiltin& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const RefinementExhausted& e) {
    err << "error: " << e.what() << "\n";
    return kRefinementExhausted;
  } catch (const MapRangeError& e) {
    err << "error: map leaves the simplex: " << e.what() << "\n";
    return kRangeError;
  } catch (const DivisionByZero& e) {
    err << "error: " << e.what() << "\n";
    return kRangeError;
  } catch (const ResourceCapExceeded& e) {
    err << "error: " << e.what() << " (raise it with --cap or " << kCapEnvVar << ")\n";
    return kResourceCap;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kGenericError;
  }
}

}  // namespace sperner::cli
