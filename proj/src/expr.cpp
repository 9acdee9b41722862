#include "doa/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace doa {

enum class NodeKind { Number, Pi, Lambda, Coord, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Sin, Cos, Exp, Sqrt };

struct FieldExpr::Node {
  NodeKind kind;
  std::size_t offset = 0;
  std::complex<double> value{};  // Number
  int index = 0;                 // Coord (1-based) or Pow exponent
  Function function = Function::Sin;
  std::vector<std::shared_ptr<const Node>> children;
};

using Node = FieldExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

EvalError::EvalError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

NodePtr make(NodeKind kind, std::size_t offset, std::vector<NodePtr> children = {}) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->offset = offset;
  n->children = std::move(children);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    auto root = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (accept('+')) {
        lhs = make(NodeKind::Add, at, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make(NodeKind::Sub, at, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (accept('*')) {
        lhs = make(NodeKind::Mul, at, {lhs, parse_factor()});
      } else if (accept('/')) {
        lhs = make(NodeKind::Div, at, {lhs, parse_factor()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    skip_ws();
    std::size_t at = pos_;
    if (accept('-')) return make(NodeKind::Neg, at, {parse_factor()});
    auto base = parse_base();
    skip_ws();
    at = pos_;
    if (accept('^')) {
      skip_ws();
      std::size_t int_at = pos_;
      bool negative = accept('-');
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) throw ParseError("expected integer exponent", int_at);
      if (pos_ - start > 6) throw ParseError("exponent too large", start);
      int exponent = std::stoi(std::string(text_.substr(start, pos_ - start)));
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Pow;
      n->offset = at;
      n->index = negative ? -exponent : exponent;
      n->children = {base};
      return n;
    }
    return base;
  }

  NodePtr parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    std::size_t at = pos_;
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (accept('(')) {
      auto inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string_view word = text_.substr(start, pos_ - start);
      if (word == "pi") return make(NodeKind::Pi, at);
      if (word == "lambda") return make(NodeKind::Lambda, at);
      if (word.size() >= 2 && word[0] == 'k') {
        bool digits = true;
        for (char d : word.substr(1)) digits = digits && std::isdigit(static_cast<unsigned char>(d));
        if (digits) {
          if (word.size() > 4) throw ParseError("coordinate index too large", at);
          int idx = std::stoi(std::string(word.substr(1)));
          if (idx < 1) throw ParseError("coordinate index must be >= 1", at);
          auto n = std::make_shared<Node>();
          n->kind = NodeKind::Coord;
          n->offset = at;
          n->index = idx;
          return n;
        }
      }
      Function f;
      if (word == "sin") {
        f = Function::Sin;
      } else if (word == "cos") {
        f = Function::Cos;
      } else if (word == "exp") {
        f = Function::Exp;
      } else if (word == "sqrt") {
        f = Function::Sqrt;
      } else {
        throw ParseError("unknown identifier '" + std::string(word) + "'", at);
      }
      expect('(');
      auto arg = parse_expr();
      expect(')');
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Call;
      n->offset = at;
      n->function = f;
      n->children = {arg};
      return n;
    }
    throw ParseError(std::string("unexpected '") + c + "'", at);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      frac_digits = digits();
    }
    if (int_digits + frac_digits == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed number exponent", start);
    }
    if (pos_ < text_.size() && text_[pos_] == '.') throw ParseError("malformed number", start);
    std::string literal(text_.substr(start, pos_ - start));
    double v = std::strtod(literal.c_str(), nullptr);
    bool imaginary = false;
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        !(pos_ + 1 < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      imaginary = true;
      ++pos_;
    } else if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      throw ParseError("malformed number", start);
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Number;
    n->offset = start;
    n->value = imaginary ? std::complex<double>(0.0, v) : std::complex<double>(v, 0.0);
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

using C = std::complex<double>;

C eval_node(const Node& n, std::span<const double> coords, const std::optional<C>& lambda) {
  switch (n.kind) {
    case NodeKind::Number:
      return n.value;
    case NodeKind::Pi:
      return std::numbers::pi;
    case NodeKind::Lambda:
      if (!lambda) throw EvalError("'lambda' is not bound", n.offset);
      return *lambda;
    case NodeKind::Coord:
      if (static_cast<std::size_t>(n.index) > coords.size())
        throw EvalError("coordinate k" + std::to_string(n.index) + " is not available", n.offset);
      return coords[n.index - 1];
    case NodeKind::Neg:
      return -eval_node(*n.children[0], coords, lambda);
    case NodeKind::Add:
      return eval_node(*n.children[0], coords, lambda) + eval_node(*n.children[1], coords, lambda);
    case NodeKind::Sub:
      return eval_node(*n.children[0], coords, lambda) - eval_node(*n.children[1], coords, lambda);
    case NodeKind::Mul:
      return eval_node(*n.children[0], coords, lambda) * eval_node(*n.children[1], coords, lambda);
    case NodeKind::Div: {
      C num = eval_node(*n.children[0], coords, lambda);
      C den = eval_node(*n.children[1], coords, lambda);
      if (den == C(0.0)) throw EvalError("division by zero", n.offset);
      return num / den;
    }
    case NodeKind::Pow: {
      C base = eval_node(*n.children[0], coords, lambda);
      int e = n.index;
      if (e < 0 && base == C(0.0)) throw EvalError("division by zero", n.offset);
      C result = 1.0;
      C b = e < 0 ? C(1.0) / base : base;
      for (unsigned k = static_cast<unsigned>(e < 0 ? -e : e); k; k >>= 1) {
        if (k & 1u) result *= b;
        b *= b;
      }
      return result;
    }
    case NodeKind::Call: {
      C x = eval_node(*n.children[0], coords, lambda);
      switch (n.function) {
        case Function::Sin:
          return x.imag() == 0.0 ? C(std::sin(x.real())) : std::sin(x);
        case Function::Cos:
          return x.imag() == 0.0 ? C(std::cos(x.real())) : std::cos(x);
        case Function::Exp:
          return x.imag() == 0.0 ? C(std::exp(x.real())) : std::exp(x);
        case Function::Sqrt:
          if (x.imag() == 0.0) {
            if (x.real() < 0.0) throw EvalError("sqrt of negative real", n.offset);
            return std::sqrt(x.real());
          }
          return std::sqrt(x);
      }
    }
  }
  throw EvalError("corrupt expression node", n.offset);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // "1" and "1.5" parse fine; only guard forms the grammar lacks.
  if (s == "inf" || s == "-inf" || s == "nan") throw std::domain_error("non-finite literal");
  return s;
}

void print_node(const Node& n, std::string& out) {
  static const char* names[] = {"sin", "cos", "exp", "sqrt"};
  switch (n.kind) {
    case NodeKind::Number:
      if (n.value.imag() != 0.0 && n.value.real() == 0.0) {
        out += format_real(n.value.imag()) + "i";
      } else if (n.value.imag() == 0.0) {
        out += format_real(n.value.real());
      } else {
        out += "(" + format_real(n.value.real()) + " + " + format_real(n.value.imag()) + "i)";
      }
      return;
    case NodeKind::Pi:
      out += "pi";
      return;
    case NodeKind::Lambda:
      out += "lambda";
      return;
    case NodeKind::Coord:
      out += "k" + std::to_string(n.index);
      return;
    case NodeKind::Neg:
      out += "(-";
      print_node(*n.children[0], out);
      out += ")";
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char* op = n.kind == NodeKind::Add ? " + " : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? " * " : " / ";
      out += "(";
      print_node(*n.children[0], out);
      out += op;
      print_node(*n.children[1], out);
      out += ")";
      return;
    }
    case NodeKind::Pow:
      out += "(";
      print_node(*n.children[0], out);
      out += "^" + std::to_string(n.index) + ")";
      return;
    case NodeKind::Call:
      out += names[static_cast<int>(n.function)];
      out += "(";
      print_node(*n.children[0], out);
      out += ")";
      return;
  }
}

bool same(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (a.value != b.value) return false;
      break;
    case NodeKind::Coord:
    case NodeKind::Pow:
      if (a.index != b.index) return false;
      break;
    case NodeKind::Call:
      if (a.function != b.function) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same(*a.children[i], *b.children[i])) return false;
  return true;
}

template <typename F>
void visit(const Node& n, F&& f) {
  f(n);
  for (const auto& c : n.children) visit(*c, f);
}

}  // namespace

int FieldExpr::max_coordinate() const {
  int m = 0;
  if (root_) visit(*root_, [&](const Node& n) {
    if (n.kind == NodeKind::Coord) m = std::max(m, n.index);
  });
  return m;
}

bool FieldExpr::uses_lambda() const {
  bool found = false;
  if (root_) visit(*root_, [&](const Node& n) { found = found || n.kind == NodeKind::Lambda; });
  return found;
}

bool operator==(const FieldExpr& a, const FieldExpr& b) {
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return same(*a.root_, *b.root_);
}

FieldExpr parse(std::string_view text) { return FieldExpr(Parser(text).parse_all()); }

std::complex<double> evaluate(const FieldExpr& expr, std::span<const double> coords,
                              std::optional<std::complex<double>> lambda) {
  if (expr.empty()) throw EvalError("empty expression", 0);
  return eval_node(*expr.root(), coords, lambda);
}

std::string to_string(const FieldExpr& expr) {
  std::string out;
  if (!expr.empty()) print_node(*expr.root(), out);
  return out;
}

}  // namespace doa
