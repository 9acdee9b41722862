#pragma once

// Operators in canonical form
//
//   (A u)(k) = A0(k) u(k) + sum_j Aj(k) < Bj u >_j (k),
//
// where < . >_j averages over the first j coordinates. Level j carries a
// pair (Aj: M x Mj, Bj: Mj x M); an absent level has inner width Mj = 0.

#include <cstddef>
#include <optional>
#include <vector>

#include "doa/grid.hpp"

namespace doa {

/// One summand Aj < Bj . >_j of a canonical form.
struct LevelTerm {
  MatrixField a;  // M x width
  MatrixField b;  // width x M
  Index width() const noexcept { return a.cols(); }
};

/// A vector field u in L^2([0,1]^N, C^M), stored as an M x 1 field.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(MatrixField values);
  StateVector(const GridSpec& spec, Index m);

  const GridSpec& spec() const noexcept { return values_.spec(); }
  Index m() const noexcept { return values_.rows(); }
  const MatrixField& values() const noexcept { return values_; }
  MatrixField& values() noexcept { return values_; }

  /// Quadrature inner product <this, other> = mean over nodes of this^* other.
  Complex dot(const StateVector& other) const;
  /// sqrt(dot(*this)).
  double norm() const;

 private:
  MatrixField values_;
};

class DefectOperator {
 public:
  DefectOperator() = default;
  /// terms[j-1] is level j; the vector must have exactly N = spec.dims() entries.
  DefectOperator(MatrixField a0, std::vector<std::optional<LevelTerm>> terms);

  static DefectOperator identity(const GridSpec& spec, Index m);
  static DefectOperator zero(const GridSpec& spec, Index m);
  /// I + a < b . >_level
  static DefectOperator elementary(const GridSpec& spec, std::size_t level, MatrixField a,
                                   MatrixField b);

  std::size_t levels() const noexcept { return terms_.size(); }
  Index m() const noexcept { return a0_.rows(); }
  const GridSpec& spec() const noexcept { return a0_.spec(); }
  const MatrixField& a0() const noexcept { return a0_; }

  /// Level j in 1..N.
  const std::optional<LevelTerm>& term(std::size_t j) const { return terms_.at(j - 1); }
  Index width(std::size_t j) const { return term(j) ? term(j)->width() : 0; }
  const std::vector<std::optional<LevelTerm>>& terms() const noexcept { return terms_; }

 private:
  MatrixField a0_;
  std::vector<std::optional<LevelTerm>> terms_;
};

StateVector apply(const DefectOperator& op, const StateVector& u);

/// Level-wise sum; inner widths add.
DefectOperator add(const DefectOperator& a, const DefectOperator& b);
DefectOperator subtract(const DefectOperator& a, const DefectOperator& b);
DefectOperator scale(Complex alpha, const DefectOperator& a);

/// a o b. Each pair of levels (j, r) lands at level max(j, r).
DefectOperator compose(const DefectOperator& a, const DefectOperator& b);

/// Hermitian adjoint with respect to the quadrature inner product.
DefectOperator adjoint(const DefectOperator& a);

/// lambda I - op.
DefectOperator shifted(const DefectOperator& op, Complex lambda);

/// Re-factor every level to the smallest inner width whose induced map stays
/// within `tol` of the original in operator norm. tol = 0 drops only
/// numerically exact rank deficiency.
DefectOperator compress(const DefectOperator& a, double tol);

/// Equality as maps: a0 fields agree to tol and each level kernel
/// Aj(k) Bj(k') agrees to tol on node pairs sharing their trailing
/// coordinates. Pairs are enumerated exhaustively up to `max_pairs` per level
/// and sampled (fixed seed) beyond that.
bool equal_as_map(const DefectOperator& a, const DefectOperator& b, double tol,
                  std::size_t max_pairs = 1u << 20);

/// Validates that two operators share N, M and grid.
void require_compatible(const DefectOperator& a, const DefectOperator& b, const char* what);

StateVector add(const StateVector& a, const StateVector& b);
StateVector scale(Complex alpha, const StateVector& a);

}  // namespace doa
