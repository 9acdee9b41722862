#pragma once

// Trace-type functionals: vector trace, power traces, trace norm, the
// log-determinant series, spectrum degree scans, isospectrality and the
// operator exponential.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doa/elimination.hpp"

namespace doa {

/// Inconsistent numerics detected (e.g. a clearly negative eigenvalue of a
/// product of positive semidefinite matrices).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the region where a series or formula is valid.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kPowerCompressTol = 1e-13;

/// (Tr A0, <Tr B1 A1>_1, ..., <Tr BN AN>_N).
VectorTrace trace(const DefectOperator& op);

/// Trace of op^n (n >= 1), compressing between products at compress_tol.
VectorTrace power_trace(const DefectOperator& op, int n, double compress_tol = kPowerCompressTol);
/// Traces of op^1 ... op^n_max, sharing the chain of powers.
std::vector<VectorTrace> power_traces(const DefectOperator& op, int n_max,
                                      double compress_tol = kPowerCompressTol);

/// Sum over levels of the largest per-node nuclear norm.
double trace_norm(const DefectOperator& op);

struct LogDetSeries {
  FieldTuple lhs;     // component-wise log of pi(lambda I - op)
  FieldTuple rhs;     // (ln lambda) tau(I) - sum_{n<=n_max} tau(op^n) / (n lambda^n)
  double tail_bound;  // bound on |lhs - rhs| from the truncated series
};

/// Requires |lambda| > trace_norm(op); throws DomainError otherwise.
LogDetSeries log_det_series(const DefectOperator& op, Complex lambda, int n_max,
                            double compress_tol = kPowerCompressTol);

/// Component-wise log of pi(lambda I - op) with pi_0 normalized by lambda^M
/// before the principal logarithm is taken.
FieldTuple log_determinant_shifted(const DefectOperator& op, Complex lambda,
                                   double zero_tol = kDefaultZeroTol);

struct SpectrumScan {
  std::vector<Complex> lambdas;
  std::vector<std::size_t> degrees;  // D(lambda) in 0..N+1
  /// min |pi_j| per sample per evaluated step (steps after a failure absent).
  std::vector<std::vector<double>> min_abs_pi;
};

/// Degree D(lambda): first failing elimination step of lambda I - op, or
/// N + 1 when every step passes. Samples run on `threads` workers (0 = auto);
/// results keep input order.
SpectrumScan spectrum_scan(const DefectOperator& op, const std::vector<Complex>& lambdas,
                           double zero_tol = kDefaultZeroTol, unsigned threads = 1);

std::size_t spectrum_degree(const DefectOperator& op, Complex lambda, double zero_tol = kDefaultZeroTol);

/// tau(a^n) == tau(b^n) to tol for n = 1..n_max.
bool iso_check(const DefectOperator& a, const DefectOperator& b, int n_max, double tol);

/// exp(op) by scaling and squaring with a Taylor core.
DefectOperator exponential(const DefectOperator& op, double compress_tol = 1e-15);

/// Component-wise exp of a tuple.
FieldTuple exp(const FieldTuple& t);

}  // namespace doa
