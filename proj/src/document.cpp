#include "doa/document.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace doa {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw DocumentError(path + ": " + what);
}

std::size_t positive_int(const json& j, const std::string& path, bool allow_zero = false) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  auto v = j.get<long long>();
  if (v < (allow_zero ? 0 : 1)) fail(path, allow_zero ? "expected a non-negative integer" : "expected a positive integer");
  return static_cast<std::size_t>(v);
}

ExprMatrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  ExprMatrix m;
  m.rows = j.size();
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const json& row = j[r];
    if (!row.is_array() || row.empty()) fail(row_path, "expected a non-empty array of formula strings");
    if (r == 0) m.cols = row.size();
    if (row.size() != m.cols) fail(row_path, "row length differs from the first row");
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string entry_path = row_path + "[" + std::to_string(c) + "]";
      if (!row[c].is_string()) fail(entry_path, "expected a formula string");
      try {
        m.entries.push_back(parse(row[c].get<std::string>()));
      } catch (const ParseError& e) {
        fail(entry_path, e.what());
      }
    }
  }
  return m;
}

json matrix_json(const ExprMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(to_string(m.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void check_coordinates(const ExprMatrix& m, std::size_t n_dims, const std::string& path) {
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (static_cast<std::size_t>(m.entries[i].max_coordinate()) > n_dims)
      fail(path + "[" + std::to_string(i / m.cols) + "][" + std::to_string(i % m.cols) + "]",
           "references k" + std::to_string(m.entries[i].max_coordinate()) + " but n_dims is " +
               std::to_string(n_dims));
}

}  // namespace

bool OperatorDocument::uses_lambda() const {
  auto any = [](const ExprMatrix& m) {
    for (const auto& e : m.entries)
      if (e.uses_lambda()) return true;
    return false;
  };
  if (any(a0)) return true;
  for (const auto& t : terms)
    if (any(t.a) || any(t.b)) return true;
  return false;
}

OperatorDocument parse_document(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw DocumentError("JSON syntax error at " + line_column(json_text, e.byte > 0 ? e.byte - 1 : 0) +
                        " (byte " + std::to_string(e.byte) + "): " + e.what());
  }
  if (!j.is_object()) fail("$", "expected an object");
  for (const char* key : {"n_dims", "m", "grid", "a0"})
    if (!j.contains(key)) fail("$", std::string("missing required key '") + key + "'");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "n_dims" && it.key() != "m" && it.key() != "grid" && it.key() != "a0" && it.key() != "terms")
      fail("$." + it.key(), "unknown key");

  OperatorDocument doc;
  doc.n_dims = positive_int(j["n_dims"], "$.n_dims");
  doc.m = positive_int(j["m"], "$.m");
  const json& grid = j["grid"];
  if (!grid.is_array() || grid.size() != doc.n_dims) fail("$.grid", "expected n_dims resolutions");
  for (std::size_t i = 0; i < grid.size(); ++i)
    doc.grid.push_back(positive_int(grid[i], "$.grid[" + std::to_string(i) + "]"));

  doc.a0 = parse_matrix(j["a0"], "$.a0");
  if (doc.a0.rows != doc.m || doc.a0.cols != doc.m) fail("$.a0", "expected an m x m matrix");
  check_coordinates(doc.a0, doc.n_dims, "$.a0");

  if (j.contains("terms")) {
    const json& terms = j["terms"];
    if (!terms.is_array()) fail("$.terms", "expected an array");
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string path = "$.terms[" + std::to_string(i) + "]";
      const json& t = terms[i];
      if (!t.is_object()) fail(path, "expected an object");
      for (const char* key : {"level", "a", "b"})
        if (!t.contains(key)) fail(path, std::string("missing required key '") + key + "'");
      for (auto it = t.begin(); it != t.end(); ++it)
        if (it.key() != "level" && it.key() != "a" && it.key() != "b") fail(path + "." + it.key(), "unknown key");
      DocumentTerm term;
      term.level = positive_int(t["level"], path + ".level");
      if (term.level > doc.n_dims) fail(path + ".level", "level exceeds n_dims");
      if (!seen.insert(term.level).second) fail(path + ".level", "duplicate level");
      term.a = parse_matrix(t["a"], path + ".a");
      term.b = parse_matrix(t["b"], path + ".b");
      if (term.a.rows != doc.m) fail(path + ".a", "expected m rows");
      if (term.b.cols != doc.m) fail(path + ".b", "expected m columns");
      if (term.a.cols != term.b.rows) fail(path, "inner widths of a and b differ");
      check_coordinates(term.a, doc.n_dims, path + ".a");
      check_coordinates(term.b, doc.n_dims, path + ".b");
      doc.terms.push_back(std::move(term));
    }
  }
  return doc;
}

OperatorDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DocumentError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

std::string serialize_document(const OperatorDocument& doc) {
  json j;
  j["n_dims"] = doc.n_dims;
  j["m"] = doc.m;
  j["grid"] = doc.grid;
  j["a0"] = matrix_json(doc.a0);
  json terms = json::array();
  for (const auto& t : doc.terms) terms.push_back({{"level", t.level}, {"a", matrix_json(t.a)}, {"b", matrix_json(t.b)}});
  j["terms"] = std::move(terms);
  return j.dump(2);
}

DefectOperator build_operator(const OperatorDocument& doc, std::optional<Complex> lambda) {
  if (doc.uses_lambda() && !lambda) throw DocumentError("document uses 'lambda' but no value was supplied");
  GridSpec spec(doc.grid);
  const Complex* bound = lambda ? &*lambda : nullptr;
  auto build = [&](const ExprMatrix& m) {
    try {
      return sample(m.entries, spec, static_cast<Index>(m.rows), static_cast<Index>(m.cols), bound);
    } catch (const EvalError& e) {
      throw DocumentError(std::string("evaluation failed: ") + e.what());
    }
  };
  std::vector<std::optional<LevelTerm>> terms(doc.n_dims);
  for (const auto& t : doc.terms) terms[t.level - 1] = LevelTerm{build(t.a), build(t.b)};
  return DefectOperator(build(doc.a0), std::move(terms));
}

}  // namespace doa
