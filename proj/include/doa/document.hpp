#pragma once

// JSON operator documents:
//
// {
//   "n_dims": 2, "m": 1, "grid": [8, 8],
//   "a0": [["lambda"]],
//   "terms": [
//     {"level": 1, "a": [["1", "sqrt(2)*sin(2*pi*k1)"]], "b": [["1"], ["sqrt(2)*sin(2*pi*k1)"]]},
//     {"level": 2, "a": [["1"]], "b": [["1"]]}
//   ]
// }
//
// Matrices are arrays of rows; every entry is a formula string (see expr.hpp).
// The symbol "lambda" is bound at build time.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "doa/expr.hpp"
#include "doa/operator.hpp"

namespace doa {

class DocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExprMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<FieldExpr> entries;  // row-major

  const FieldExpr& at(std::size_t r, std::size_t c) const { return entries.at(r * cols + c); }
};

struct DocumentTerm {
  std::size_t level = 0;
  ExprMatrix a;
  ExprMatrix b;
};

struct OperatorDocument {
  std::size_t n_dims = 0;
  std::size_t m = 0;
  std::vector<std::size_t> grid;
  ExprMatrix a0;
  std::vector<DocumentTerm> terms;

  bool uses_lambda() const;
};

/// Parse and validate. Errors carry line/column for JSON syntax problems and
/// a JSON path for schema problems.
OperatorDocument parse_document(std::string_view json_text);
OperatorDocument load_document(const std::string& path);

/// Canonical JSON text (formulas in printer form).
std::string serialize_document(const OperatorDocument& doc);

DefectOperator build_operator(const OperatorDocument& doc, std::optional<Complex> lambda = std::nullopt);

}  // namespace doa
