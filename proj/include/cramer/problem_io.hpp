#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/problem.hpp"
#include "cramer/sdp_bridge.hpp"

namespace cramer {

/// A parsed problem file. The LP/SDP instance is kept alongside the maxent
/// problem because sweeps need the barrier solvers.
struct ProblemFile {
  std::string kind;
  MaxentProblem problem;
  std::optional<LPInstance> lp;
  std::optional<SDPInstance> sdp;
  SolverOptions solver;
};

namespace detail {

using nlohmann::json;

/// 1-based line of byte offset `pos` in `text`.
inline std::size_t line_of_offset(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

/// Line of the first occurrence of "key" in the document; 1 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

class SchemaReader {
 public:
  SchemaReader(const json& doc, const std::string& text) : doc_(doc), text_(text) {}

  [[noreturn]] void error(const std::string& key, const std::string& msg) const {
    fail(Errc::invalid_argument, "line " + std::to_string(line_of_key(text_, key)) + ": field '" + key + "': " + msg);
  }

  const json& field(const std::string& key) const {
    if (!doc_.contains(key)) fail(Errc::invalid_argument, "line 1: missing required field '" + key + "'");
    return doc_.at(key);
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  double number(const json& j, const std::string& key) const {
    if (!j.is_number()) error(key, "expected a number");
    return j.get<double>();
  }

  Vector vector(const json& j, const std::string& key) const {
    if (!j.is_array()) error(key, "expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], key);
    return v;
  }

  Matrix matrix(const json& j, const std::string& key) const {
    if (!j.is_array() || j.empty() || !j[0].is_array()) error(key, "expected a non-empty array of rows");
    const std::size_t cols = j[0].size();
    Matrix M(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
      const Vector row = vector(j[r], key);
      if (static_cast<std::size_t>(row.size()) != cols) error(key, "rows have different lengths");
      M.row(static_cast<Index>(r)) = row.transpose();
    }
    return M;
  }

  /// Symmetric matrix from rows of its lower triangle: row i has i + 1 entries.
  Matrix lower_triangle(const json& j, const std::string& key) const {
    if (!j.is_array() || j.empty()) error(key, "expected lower-triangle rows");
    const auto d = static_cast<Index>(j.size());
    Matrix M(d, d);
    for (Index i = 0; i < d; ++i) {
      const Vector row = vector(j[static_cast<std::size_t>(i)], key);
      if (row.size() != i + 1) error(key, "row " + std::to_string(i) + " of a lower triangle must have " + std::to_string(i + 1) + " entries");
      for (Index k = 0; k <= i; ++k) M(i, k) = M(k, i) = row(k);
    }
    return M;
  }

  std::string string(const json& j, const std::string& key) const {
    if (!j.is_string()) error(key, "expected a string");
    return j.get<std::string>();
  }

 private:
  const json& doc_;
  const std::string& text_;
};

inline SolverOptions read_solver(const SchemaReader& rd, const json& doc) {
  SolverOptions opts;
  if (!doc.contains("solver")) return opts;
  const json& s = doc.at("solver");
  if (!s.is_object()) rd.error("solver", "expected an object");
  for (const auto& [key, value] : s.items()) {
    if (key == "grad_tol") opts.grad_tol = rd.number(value, key);
    else if (key == "max_iters") opts.max_iters = static_cast<int>(rd.number(value, key));
    else if (key == "fraction_to_boundary") opts.fraction_to_boundary = rd.number(value, key);
    else if (key == "armijo_c") opts.armijo_c = rd.number(value, key);
    else if (key == "divergence_norm_bound") opts.divergence_norm_bound = rd.number(value, key);
    else rd.error(key, "unknown solver option");
  }
  try {
    opts.validate();
  } catch (const Error& e) {
    rd.error("solver", e.what());
  }
  return opts;
}

}  // namespace detail

/// Parses and validates a problem document. Schema and value errors throw
/// Error(invalid_argument) with a "line N:" prefix.
inline ProblemFile parse_problem(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::invalid_argument, "line " + std::to_string(detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                     ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) fail(Errc::invalid_argument, "line 1: problem file must be a JSON object");
  const detail::SchemaReader rd(doc, text);
  ProblemFile out;
  out.kind = rd.string(rd.field("kind"), "kind");
  out.solver = detail::read_solver(rd, doc);
  const Vector y = rd.vector(rd.field("y"), "y");
  std::optional<Vector> lambda0;
  if (rd.has("lambda0")) lambda0 = rd.vector(doc.at("lambda0"), "lambda0");

  // Library-level validation errors keep their code but gain the line of the offending field.
  auto guarded = [&](const std::string& key, auto&& build) {
    try {
      return build();
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(detail::line_of_key(text, key)) + ": " + e.what());
    }
  };

  if (out.kind == "lp") {
    const Matrix A = rd.matrix(rd.field("A"), "A");
    const Vector c = rd.vector(rd.field("c"), "c");
    out.lp = guarded("A", [&] { return normalize_instance(A, c, y, lambda0); });
    out.problem = guarded("A", [&] { return lp_maxent_problem(*out.lp); });
  } else if (out.kind == "sdp") {
    const Matrix A0 = rd.lower_triangle(rd.field("A0"), "A0");
    const json& ajs = rd.field("A_js");
    if (!ajs.is_array() || ajs.empty()) rd.error("A_js", "expected a non-empty list of lower triangles");
    std::vector<Matrix> As;
    for (const auto& a : ajs) {
      As.push_back(rd.lower_triangle(a, "A_js"));
      if (As.back().rows() != A0.rows()) rd.error("A_js", "constraint matrices must match the size of A0");
    }
    out.sdp = guarded("A0", [&] { return make_sdp_instance(A0, As, y, lambda0); });
    out.problem = sdp_maxent_problem(*out.sdp);
  } else if (out.kind == "box") {
    const json& b = rd.field("bounds");
    if (!b.is_array() || b.empty()) rd.error("bounds", "expected a list of [lo, hi] pairs");
    std::vector<Interval> bounds;
    for (const auto& pair : b) {
      const Vector v = rd.vector(pair, "bounds");
      if (v.size() != 2) rd.error("bounds", "each bound must be [lo, hi]");
      bounds.push_back({v(0), v(1)});
    }
    const std::string density = rd.string(rd.field("density_id"), "density_id");
    const std::string map = rd.string(rd.field("map_id"), "map_id");
    out.problem = guarded("density_id", [&] {
      return make_box_problem(bounds, parse_box_density(density), parse_box_map(map), y);
    });
  } else {
    rd.error("kind", "must be one of \"lp\", \"sdp\", \"box\"");
  }
  return out;
}

inline ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_argument, "cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace cramer
