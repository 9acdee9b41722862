#pragma once

// Matrix-valued functions on a uniform midpoint grid over [0,1]^d and the
// partial averaging operator that integrates out the leading coordinates.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace doa {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

class FieldExpr;

/// Argument or shape mismatch in field or operator algebra.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A pointwise inverse hit a (numerically) singular node.
class SingularNodeError : public std::runtime_error {
 public:
  SingularNodeError(std::size_t node, double abs_det);
  std::size_t node() const noexcept { return node_; }
  double abs_det() const noexcept { return abs_det_; }

 private:
  std::size_t node_;
  double abs_det_;
};

/// Uniform grid on [0,1]^d. Coordinate i at index t sits at the midpoint
/// (t + 1/2) / n_i. Nodes are numbered row-major with coordinate 1 varying
/// fastest, so the first j axes of any node form a contiguous block.
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<std::size_t> points_per_dim);

  std::size_t dims() const noexcept { return points_.size(); }
  std::size_t points(std::size_t axis) const { return points_.at(axis); }
  const std::vector<std::size_t>& points_per_dim() const noexcept { return points_; }
  std::size_t node_count() const noexcept { return node_count_; }

  /// Number of nodes spanned by the first j axes (n_1 * ... * n_j).
  std::size_t leading_count(std::size_t j) const;
  /// Grid on the coordinates j+1..d.
  GridSpec trailing(std::size_t j) const;

  double coordinate(std::size_t axis, std::size_t index) const;
  std::vector<std::size_t> multi_index(std::size_t node) const;
  std::size_t linear_index(std::span<const std::size_t> multi) const;
  std::vector<double> node_coordinates(std::size_t node) const;

  bool operator==(const GridSpec& other) const { return points_ == other.points_; }

 private:
  std::vector<std::size_t> points_;
  std::size_t node_count_ = 1;
};

/// A rows x cols complex matrix stored at every node of a grid. Each node
/// matrix is kept column-major and contiguous so it can be mapped as an
/// Eigen matrix without copies.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(GridSpec spec, Index rows, Index cols);

  static MatrixField constant(const GridSpec& spec, const Matrix& value);
  static MatrixField identity(const GridSpec& spec, Index n);

  const GridSpec& spec() const noexcept { return spec_; }
  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::size_t node_count() const noexcept { return spec_.node_count(); }

  Eigen::Map<Matrix> node(std::size_t i) {
    return {data_.data() + i * stride(), rows_, cols_};
  }
  Eigen::Map<const Matrix> node(std::size_t i) const {
    return {data_.data() + i * stride(), rows_, cols_};
  }

  /// Scalar access for 1x1 fields.
  Complex value(std::size_t i) const { return data_[i * stride()]; }

  /// Largest spectral norm over all nodes.
  double max_norm() const;
  /// Largest entry modulus over all nodes.
  double max_abs() const;

  std::span<const Complex> raw() const noexcept { return data_; }

 private:
  std::size_t stride() const noexcept { return static_cast<std::size_t>(rows_ * cols_); }

  GridSpec spec_;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Complex> data_;
};

/// Evaluate a table of expressions (row-major, rows*cols entries) at every
/// node. `lambda` binds the free symbol of the same name, if present.
MatrixField sample(std::span<const FieldExpr> entries, const GridSpec& spec, Index rows,
                   Index cols, const Complex* lambda = nullptr);

/// Midpoint-rule mean over the first j coordinates; the result lives on
/// spec.trailing(j). Uses pairwise summation across each block.
MatrixField integrate_first(const MatrixField& field, std::size_t j);

/// Broadcast a field on trailing coordinates of `target` to all of `target`.
MatrixField lift(const MatrixField& field, const GridSpec& target);

MatrixField matmul(const MatrixField& a, const MatrixField& b);
MatrixField add(const MatrixField& a, const MatrixField& b);
MatrixField subtract(const MatrixField& a, const MatrixField& b);
MatrixField scale(Complex alpha, const MatrixField& a);
MatrixField adjoint(const MatrixField& a);
MatrixField hstack(const MatrixField& a, const MatrixField& b);
MatrixField vstack(const MatrixField& a, const MatrixField& b);

/// Per-node trace and determinant as 1x1 fields.
MatrixField trace(const MatrixField& a);
MatrixField determinant(const MatrixField& a);

struct PointwiseInverse {
  MatrixField inverse;
  std::size_t min_det_node = 0;
  double min_abs_det = 0.0;
};

/// Node-wise inverse by partial-pivot LU. Throws SingularNodeError when a
/// node's |det| falls below singular_tol * (max node norm)^n.
PointwiseInverse pointwise_inverse(const MatrixField& a, double singular_tol = 1e-12);

/// Largest entrywise modulus of a - b (shapes must agree).
double max_abs_diff(const MatrixField& a, const MatrixField& b);

}  // namespace doa
