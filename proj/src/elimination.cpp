#include "doa/elimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace doa {

FieldTuple multiply(const FieldTuple& a, const FieldTuple& b) {
  if (a.size() != b.size()) throw ShapeError("multiply: tuple lengths differ");
  FieldTuple out;
  for (std::size_t j = 0; j < a.size(); ++j) out.components.push_back(matmul(a[j], b[j]));
  return out;
}

double max_abs_diff(const FieldTuple& a, const FieldTuple& b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_diff: tuple lengths differ");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, max_abs_diff(a[j], b[j]));
  return m;
}

NotInvertibleError::NotInvertibleError(NonInvertible info)
    : std::runtime_error("operator is not invertible: elimination fails at step " +
                         std::to_string(info.step) + " (min |pi| = " + std::to_string(info.min_abs_pi) + ")"),
      info_(std::move(info)) {}

namespace {

constexpr double kAbsoluteFloor = 1e-300;

double spectral_norm(const Eigen::Map<const Matrix>& a) {
  if (a.size() == 0) return 0.0;
  if (a.size() == 1) return std::abs(a(0, 0));
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

double one_norm(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

struct ZeroTest {
  StepDiagnostics diag;
  std::size_t argmin = 0;
  bool failed = false;
};

// pi: 1x1 field; norms: per-node reference magnitude already raised to the power.
ZeroTest zero_test(std::size_t step, const MatrixField& pi, const std::vector<double>& bounds,
                   double zero_tol) {
  ZeroTest z;
  z.diag.step = step;
  z.diag.min_abs_pi = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < pi.node_count(); ++n) {
    double v = std::abs(pi.value(n));
    if (v < z.diag.min_abs_pi) {
      z.diag.min_abs_pi = v;
      z.argmin = n;
    }
    z.diag.max_abs_pi = std::max(z.diag.max_abs_pi, v);
    z.diag.scale = std::max(z.diag.scale, bounds[n]);
  }
  z.diag.scale = std::max(z.diag.scale, z.diag.max_abs_pi);
  z.failed = !(z.diag.min_abs_pi > std::max(zero_tol * z.diag.scale, kAbsoluteFloor));
  return z;
}

MatrixField ones(const GridSpec& spec) { return MatrixField::constant(spec, Matrix::Ones(1, 1)); }

}  // namespace

EliminationOutcome eliminate(const DefectOperator& op, double zero_tol) {
  if (!(zero_tol > 0.0)) throw ShapeError("eliminate: zero_tol must be positive");
  const GridSpec& spec = op.spec();
  const std::size_t levels = op.levels();
  const Index m = op.m();
  EliminationOutcome outcome;

  // Step 0: multiplication part.
  MatrixField pi0 = determinant(op.a0());
  std::vector<double> bounds(spec.node_count());
  for (std::size_t n = 0; n < spec.node_count(); ++n)
    bounds[n] = std::pow(spectral_norm(op.a0().node(n)), static_cast<double>(m));
  ZeroTest z0 = zero_test(0, pi0, bounds, zero_tol);
  outcome.diagnostics.push_back(z0.diag);
  if (z0.failed) {
    outcome.result = NonInvertible{0, spec.multi_index(z0.argmin), z0.diag.min_abs_pi};
    return outcome;
  }

  Factorization f;
  f.a0 = op.a0();
  f.a0_inv = MatrixField(spec, m, m);
  for (std::size_t n = 0; n < spec.node_count(); ++n)
    f.a0_inv.node(n) = Eigen::PartialPivLU<Matrix>(op.a0().node(n)).inverse();
  f.pi.components.push_back(std::move(pi0));

  // current[r-1] holds A_{r,j} after step j.
  std::vector<MatrixField> current(levels);
  for (std::size_t r = 1; r <= levels; ++r)
    current[r - 1] = op.term(r) ? matmul(f.a0_inv, op.term(r)->a) : MatrixField(spec, m, 0);

  for (std::size_t j = 1; j <= levels; ++j) {
    const GridSpec tail = spec.trailing(j);
    const auto& term = op.term(j);
    if (!term) {
      f.pi.components.push_back(ones(tail));
      f.steps.push_back({MatrixField(spec, m, 0), MatrixField(spec, 0, m), MatrixField(tail, 0, 0)});
      outcome.diagnostics.push_back(StepDiagnostics{j, 1.0, 1.0, 1.0, 1.0});
      continue;
    }
    const Index width = term->width();
    MatrixField x = integrate_first(matmul(term->b, current[j - 1]), j);
    MatrixField e = add(MatrixField::identity(tail, width), x);
    MatrixField pi = determinant(e);
    std::vector<double> tail_bounds(tail.node_count());
    for (std::size_t n = 0; n < tail.node_count(); ++n)
      tail_bounds[n] = std::pow(1.0 + spectral_norm(std::as_const(x).node(n)), static_cast<double>(width));
    ZeroTest z = zero_test(j, pi, tail_bounds, zero_tol);
    if (z.failed) {
      outcome.diagnostics.push_back(z.diag);
      outcome.result = NonInvertible{j, tail.multi_index(z.argmin), z.diag.min_abs_pi};
      return outcome;
    }
    MatrixField e_inv(tail, width, width);
    double cond = 1.0;
    for (std::size_t n = 0; n < tail.node_count(); ++n) {
      Matrix en = e.node(n);
      Matrix inv = Eigen::PartialPivLU<Matrix>(en).inverse();
      cond = std::max(cond, one_norm(en) * one_norm(inv));
      e_inv.node(n) = inv;
    }
    z.diag.condition = cond;
    outcome.diagnostics.push_back(z.diag);

    for (std::size_t r = j + 1; r <= levels; ++r) {
      if (current[r - 1].cols() == 0) continue;
      MatrixField coupling = matmul(e_inv, integrate_first(matmul(term->b, current[r - 1]), j));
      current[r - 1] = subtract(current[r - 1], matmul(current[j - 1], lift(coupling, spec)));
    }
    f.pi.components.push_back(std::move(pi));
    f.steps.push_back({current[j - 1], term->b, std::move(e_inv)});
  }
  outcome.result = std::move(f);
  return outcome;
}

VectorDeterminant determinant(const DefectOperator& op, double zero_tol) {
  auto outcome = eliminate(op, zero_tol);
  if (!outcome.invertible()) throw NotInvertibleError(outcome.failure());
  return outcome.factorization().pi;
}

std::vector<DefectOperator> factorize(const DefectOperator& op, double zero_tol) {
  auto outcome = eliminate(op, zero_tol);
  if (!outcome.invertible()) throw NotInvertibleError(outcome.failure());
  const Factorization& f = outcome.factorization();
  const GridSpec& spec = op.spec();
  std::vector<DefectOperator> factors;
  factors.emplace_back(f.a0, std::vector<std::optional<LevelTerm>>(op.levels()));
  for (std::size_t j = 1; j <= op.levels(); ++j) {
    const auto& s = f.steps[j - 1];
    if (s.a_prev.cols() == 0) {
      factors.push_back(DefectOperator::identity(spec, op.m()));
    } else {
      factors.push_back(DefectOperator::elementary(spec, j, s.a_prev, s.b));
    }
  }
  return factors;
}

DefectOperator inverse_from(const Factorization& f, std::size_t levels) {
  const GridSpec& spec = f.a0.spec();
  DefectOperator acc(f.a0_inv, std::vector<std::optional<LevelTerm>>(levels));
  for (std::size_t j = 1; j <= levels; ++j) {
    const auto& s = f.steps.at(j - 1);
    if (s.a_prev.cols() == 0) continue;
    MatrixField c = scale(-1.0, matmul(s.a_prev, lift(s.e_inv, spec)));
    acc = compose(DefectOperator::elementary(spec, j, std::move(c), s.b), acc);
  }
  return acc;
}

DefectOperator inverse(const DefectOperator& op, double zero_tol) {
  auto outcome = eliminate(op, zero_tol);
  if (!outcome.invertible()) throw NotInvertibleError(outcome.failure());
  return inverse_from(outcome.factorization(), op.levels());
}

}  // namespace doa
