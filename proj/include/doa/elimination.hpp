#pragma once

// Level-by-level elimination for canonical-form operators: decides
// invertibility, produces the vector determinant (pi_0, ..., pi_N), the
// factorization into elementary factors and the inverse.

#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "doa/operator.hpp"

namespace doa {

/// Tuple of scalar (1x1) fields where component j lives on the trailing
/// N - j coordinates. Used for both determinants and traces.
struct FieldTuple {
  std::vector<MatrixField> components;

  std::size_t size() const noexcept { return components.size(); }
  const MatrixField& operator[](std::size_t j) const { return components.at(j); }
  MatrixField& operator[](std::size_t j) { return components.at(j); }
};

using VectorDeterminant = FieldTuple;
using VectorTrace = FieldTuple;

/// Component-wise, node-wise product.
FieldTuple multiply(const FieldTuple& a, const FieldTuple& b);
/// Largest node-wise |a_j - b_j| over all components.
double max_abs_diff(const FieldTuple& a, const FieldTuple& b);

struct StepDiagnostics {
  std::size_t step = 0;
  double min_abs_pi = 0.0;
  double max_abs_pi = 0.0;
  double scale = 0.0;       // reference magnitude for the zero test
  double condition = 1.0;   // worst 1-norm condition estimate of E_j over nodes
};

struct NonInvertible {
  std::size_t step = 0;
  std::vector<std::size_t> witness_node;  // multi-index on the step's trailing grid
  double min_abs_pi = 0.0;
};

struct EliminationStep {
  MatrixField a_prev;  // A_{j,j-1}: M x Mj on the full grid
  MatrixField b;       // B_j: Mj x M on the full grid
  MatrixField e_inv;   // E_j^{-1}: Mj x Mj on the trailing N - j coordinates
};

struct Factorization {
  VectorDeterminant pi;
  MatrixField a0;
  MatrixField a0_inv;
  std::vector<EliminationStep> steps;  // steps[j-1] is level j
};

struct EliminationOutcome {
  std::variant<NonInvertible, Factorization> result;
  std::vector<StepDiagnostics> diagnostics;  // one per step that was evaluated

  bool invertible() const noexcept { return std::holds_alternative<Factorization>(result); }
  const Factorization& factorization() const { return std::get<Factorization>(result); }
  const NonInvertible& failure() const { return std::get<NonInvertible>(result); }
};

/// Raised by determinant/inverse/factorize on a non-invertible operator.
class NotInvertibleError : public std::runtime_error {
 public:
  explicit NotInvertibleError(NonInvertible info);
  const NonInvertible& info() const noexcept { return info_; }

 private:
  NonInvertible info_;
};

inline constexpr double kDefaultZeroTol = 1e-10;

/// Step j fails when min over nodes |pi_j| <= max(zero_tol * scale_j, 1e-300).
/// scale_0 is the largest node value of ||A0||_2^M; for j >= 1 it is the
/// largest node value of (1 + ||<Bj A_{j,j-1}>_j||_2)^Mj. Both bound |pi_j|
/// from above, so a relative drop signals a (near-)zero.
EliminationOutcome eliminate(const DefectOperator& op, double zero_tol = kDefaultZeroTol);

VectorDeterminant determinant(const DefectOperator& op, double zero_tol = kDefaultZeroTol);

/// [A0., I + A_{1,0}<B1.>_1, ..., I + A_{N,N-1}<BN.>_N]; their composition
/// in this order reproduces op.
std::vector<DefectOperator> factorize(const DefectOperator& op, double zero_tol = kDefaultZeroTol);

/// (I - A_{N,N-1} E_N^{-1}<BN.>_N) o ... o (I - A_{1,0} E_1^{-1}<B1.>_1) o (A0^{-1}.)
DefectOperator inverse(const DefectOperator& op, double zero_tol = kDefaultZeroTol);

/// Same product built from an existing factorization.
DefectOperator inverse_from(const Factorization& f, std::size_t levels);

}  // namespace doa
