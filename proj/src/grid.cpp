#include "doa/grid.hpp"

#include <algorithm>
#include <cmath>

#include "doa/expr.hpp"

namespace doa {

SingularNodeError::SingularNodeError(std::size_t node, double abs_det)
    : std::runtime_error("singular matrix at node " + std::to_string(node) +
                         " (|det| = " + std::to_string(abs_det) + ")"),
      node_(node),
      abs_det_(abs_det) {}

GridSpec::GridSpec(std::vector<std::size_t> points_per_dim) : points_(std::move(points_per_dim)) {
  for (std::size_t n : points_) {
    if (n == 0) throw ShapeError("grid resolution must be >= 1 on every axis");
    node_count_ *= n;
  }
}

std::size_t GridSpec::leading_count(std::size_t j) const {
  if (j > dims()) throw ShapeError("leading_count: axis count exceeds grid dims");
  std::size_t c = 1;
  for (std::size_t i = 0; i < j; ++i) c *= points_[i];
  return c;
}

GridSpec GridSpec::trailing(std::size_t j) const {
  if (j > dims()) throw ShapeError("trailing: axis count exceeds grid dims");
  return GridSpec(std::vector<std::size_t>(points_.begin() + static_cast<std::ptrdiff_t>(j), points_.end()));
}

double GridSpec::coordinate(std::size_t axis, std::size_t index) const {
  return (static_cast<double>(index) + 0.5) / static_cast<double>(points_.at(axis));
}

std::vector<std::size_t> GridSpec::multi_index(std::size_t node) const {
  std::vector<std::size_t> idx(dims());
  for (std::size_t i = 0; i < dims(); ++i) {
    idx[i] = node % points_[i];
    node /= points_[i];
  }
  return idx;
}

std::size_t GridSpec::linear_index(std::span<const std::size_t> multi) const {
  if (multi.size() != dims()) throw ShapeError("linear_index: wrong multi-index length");
  std::size_t node = 0;
  for (std::size_t i = dims(); i-- > 0;) {
    if (multi[i] >= points_[i]) throw ShapeError("linear_index: index out of range");
    node = node * points_[i] + multi[i];
  }
  return node;
}

std::vector<double> GridSpec::node_coordinates(std::size_t node) const {
  std::vector<double> k(dims());
  for (std::size_t i = 0; i < dims(); ++i) {
    k[i] = coordinate(i, node % points_[i]);
    node /= points_[i];
  }
  return k;
}

MatrixField::MatrixField(GridSpec spec, Index rows, Index cols)
    : spec_(std::move(spec)), rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("negative field shape");
  data_.assign(spec_.node_count() * static_cast<std::size_t>(rows * cols), Complex(0.0));
}

MatrixField MatrixField::constant(const GridSpec& spec, const Matrix& value) {
  MatrixField f(spec, value.rows(), value.cols());
  for (std::size_t i = 0; i < f.node_count(); ++i) f.node(i) = value;
  return f;
}

MatrixField MatrixField::identity(const GridSpec& spec, Index n) {
  return constant(spec, Matrix::Identity(n, n));
}

double MatrixField::max_norm() const {
  double m = 0.0;
  if (rows_ == 0 || cols_ == 0) return m;
  for (std::size_t i = 0; i < node_count(); ++i) {
    const auto a = node(i);
    double n = a.size() == 1 ? std::abs(a(0, 0))
                             : Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
    m = std::max(m, n);
  }
  return m;
}

double MatrixField::max_abs() const {
  double m = 0.0;
  for (const Complex& z : data_) m = std::max(m, std::abs(z));
  return m;
}

MatrixField sample(std::span<const FieldExpr> entries, const GridSpec& spec, Index rows,
                   Index cols, const Complex* lambda) {
  if (entries.size() != static_cast<std::size_t>(rows * cols))
    throw ShapeError("sample: expression table does not match rows x cols");
  for (const auto& e : entries) {
    if (static_cast<std::size_t>(e.max_coordinate()) > spec.dims())
      throw ParseError("expression references k" + std::to_string(e.max_coordinate()) +
                           " but the grid has " + std::to_string(spec.dims()) + " coordinates",
                       0);
  }
  std::optional<Complex> bound;
  if (lambda) bound = *lambda;
  MatrixField f(spec, rows, cols);
  for (std::size_t n = 0; n < spec.node_count(); ++n) {
    auto k = spec.node_coordinates(n);
    auto m = f.node(n);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c)
        m(r, c) = evaluate(entries[static_cast<std::size_t>(r * cols + c)], k, bound);
  }
  return f;
}

namespace {

// Pairwise sum of `count` consecutive node matrices starting at `first`.
void pairwise_sum(const MatrixField& f, std::size_t first, std::size_t count, Matrix& out) {
  if (count <= 8) {
    out = f.node(first);
    for (std::size_t i = 1; i < count; ++i) out += f.node(first + i);
    return;
  }
  std::size_t half = count / 2;
  Matrix right;
  pairwise_sum(f, first, half, out);
  pairwise_sum(f, first + half, count - half, right);
  out += right;
}

void require_same(const MatrixField& a, const MatrixField& b, const char* what) {
  if (!(a.spec() == b.spec())) throw ShapeError(std::string(what) + ": grid mismatch");
}

}  // namespace

MatrixField integrate_first(const MatrixField& field, std::size_t j) {
  const GridSpec& spec = field.spec();
  if (j > spec.dims()) throw ShapeError("integrate_first: j exceeds field dims");
  if (j == 0) return field;
  std::size_t block = spec.leading_count(j);
  MatrixField out(spec.trailing(j), field.rows(), field.cols());
  if (field.rows() == 0 || field.cols() == 0) return out;
  double w = 1.0 / static_cast<double>(block);
  Matrix acc;
  for (std::size_t t = 0; t < out.node_count(); ++t) {
    pairwise_sum(field, t * block, block, acc);
    out.node(t) = acc * w;
  }
  return out;
}

MatrixField lift(const MatrixField& field, const GridSpec& target) {
  if (field.spec().dims() > target.dims() ||
      !(target.trailing(target.dims() - field.spec().dims()) == field.spec()))
    throw ShapeError("lift: field grid is not a trailing sub-grid of the target");
  std::size_t block = target.leading_count(target.dims() - field.spec().dims());
  MatrixField out(target, field.rows(), field.cols());
  for (std::size_t n = 0; n < target.node_count(); ++n) out.node(n) = field.node(n / block);
  return out;
}

MatrixField matmul(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "matmul");
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  MatrixField out(a.spec(), a.rows(), b.cols());
  if (a.cols() == 0) return out;
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n).noalias() = a.node(n) * b.node(n);
  return out;
}

MatrixField add(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("add: shapes differ");
  MatrixField out(a.spec(), a.rows(), a.cols());
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n) = a.node(n) + b.node(n);
  return out;
}

MatrixField subtract(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "subtract");
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("subtract: shapes differ");
  MatrixField out(a.spec(), a.rows(), a.cols());
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n) = a.node(n) - b.node(n);
  return out;
}

MatrixField scale(Complex alpha, const MatrixField& a) {
  MatrixField out(a.spec(), a.rows(), a.cols());
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n) = alpha * a.node(n);
  return out;
}

MatrixField adjoint(const MatrixField& a) {
  MatrixField out(a.spec(), a.cols(), a.rows());
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n) = a.node(n).adjoint();
  return out;
}

MatrixField hstack(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "hstack");
  if (a.rows() != b.rows()) throw ShapeError("hstack: row counts differ");
  MatrixField out(a.spec(), a.rows(), a.cols() + b.cols());
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    auto m = out.node(n);
    m.leftCols(a.cols()) = a.node(n);
    m.rightCols(b.cols()) = b.node(n);
  }
  return out;
}

MatrixField vstack(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "vstack");
  if (a.cols() != b.cols()) throw ShapeError("vstack: column counts differ");
  MatrixField out(a.spec(), a.rows() + b.rows(), a.cols());
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    auto m = out.node(n);
    m.topRows(a.rows()) = a.node(n);
    m.bottomRows(b.rows()) = b.node(n);
  }
  return out;
}

MatrixField trace(const MatrixField& a) {
  if (a.rows() != a.cols()) throw ShapeError("trace: field is not square");
  MatrixField out(a.spec(), 1, 1);
  for (std::size_t n = 0; n < a.node_count(); ++n) out.node(n)(0, 0) = a.node(n).trace();
  return out;
}

MatrixField determinant(const MatrixField& a) {
  if (a.rows() != a.cols()) throw ShapeError("determinant: field is not square");
  MatrixField out(a.spec(), 1, 1);
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    // An empty matrix has determinant 1.
    out.node(n)(0, 0) = a.rows() == 0 ? Complex(1.0) : Complex(a.node(n).determinant());
  }
  return out;
}

PointwiseInverse pointwise_inverse(const MatrixField& a, double singular_tol) {
  if (a.rows() != a.cols()) throw ShapeError("pointwise_inverse: field is not square");
  PointwiseInverse result{MatrixField(a.spec(), a.rows(), a.cols()), 0,
                          std::numeric_limits<double>::infinity()};
  if (a.rows() == 0) return result;
  double threshold = singular_tol * std::pow(a.max_norm(), static_cast<double>(a.rows()));
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    Eigen::PartialPivLU<Matrix> lu(a.node(n));
    double d = std::abs(lu.determinant());
    if (d < result.min_abs_det) {
      result.min_abs_det = d;
      result.min_det_node = n;
    }
    if (d <= threshold || d == 0.0) throw SingularNodeError(n, d);
    result.inverse.node(n) = lu.inverse();
  }
  return result;
}

double max_abs_diff(const MatrixField& a, const MatrixField& b) {
  require_same(a, b, "max_abs_diff");
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("max_abs_diff: shapes differ");
  double m = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace doa
