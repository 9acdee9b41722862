#pragma once

// A small formula language for field entries.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' INT)?
//   base   := NUMBER | 'pi' | 'lambda' | COORD | FUNC '(' expr ')'
//           | '(' expr ')' | '-' factor
//   COORD  := 'k' DIGITS            (1-based: k1, k2, ...)
//   FUNC   := sin | cos | exp | sqrt
//   NUMBER := DIGITS ('.' DIGITS?)? ([eE] [+-]? DIGITS)? 'i'?
//   INT    := '-'? DIGITS
//
// A trailing 'i' makes a number imaginary ("2i"). Unary minus takes a whole
// factor, so "-k1^2" is -(k1^2).

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace doa {

/// Syntax problem while parsing; offset is a byte position in the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation failure (division by zero, sqrt of a negative real, unbound
/// coordinate or lambda); offset points at the offending sub-expression.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FieldExpr {
 public:
  struct Node;

  FieldExpr() = default;
  explicit FieldExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  const Node* root() const noexcept { return root_.get(); }
  bool empty() const noexcept { return !root_; }

  /// Highest coordinate index referenced (0 if none).
  int max_coordinate() const;
  bool uses_lambda() const;

  /// Structural equality (source offsets are ignored).
  friend bool operator==(const FieldExpr& a, const FieldExpr& b);

 private:
  std::shared_ptr<const Node> root_;
};

FieldExpr parse(std::string_view text);

/// Evaluate at a point; coords[i] is the value of k_{i+1}.
std::complex<double> evaluate(const FieldExpr& expr, std::span<const double> coords,
                              std::optional<std::complex<double>> lambda = std::nullopt);

/// Canonical text form that parses back to an identical tree.
std::string to_string(const FieldExpr& expr);

}  // namespace doa
