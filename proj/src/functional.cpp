#include "doa/functional.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace doa {

VectorTrace trace(const DefectOperator& op) {
  VectorTrace t;
  t.components.push_back(trace(op.a0()));
  for (std::size_t j = 1; j <= op.levels(); ++j) {
    const GridSpec tail = op.spec().trailing(j);
    if (!op.term(j)) {
      t.components.emplace_back(tail, 1, 1);
      continue;
    }
    t.components.push_back(integrate_first(trace(matmul(op.term(j)->b, op.term(j)->a)), j));
  }
  return t;
}

std::vector<VectorTrace> power_traces(const DefectOperator& op, int n_max, double compress_tol) {
  if (n_max < 1) throw DomainError("power_traces: n_max must be >= 1");
  std::vector<VectorTrace> out;
  DefectOperator power = compress(op, compress_tol);
  out.push_back(trace(power));
  for (int n = 2; n <= n_max; ++n) {
    power = compress(compose(power, op), compress_tol);
    out.push_back(trace(power));
  }
  return out;
}

VectorTrace power_trace(const DefectOperator& op, int n, double compress_tol) {
  if (n < 1) throw DomainError("power_trace: n must be >= 1");
  return power_traces(op, n, compress_tol).back();
}

namespace {

double nuclear_sum(const Matrix& c) {
  if (c.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<Matrix> es(c, false);
  const double norm = c.norm();
  double g = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    double re = es.eigenvalues()(i).real();
    if (re < -1e-8 * norm) throw NumericalError("trace_norm: negative eigenvalue in a PSD product");
    g += std::sqrt(std::max(re, 0.0));
  }
  return g;
}

}  // namespace

double trace_norm(const DefectOperator& op) {
  double g0 = 0.0;
  for (std::size_t n = 0; n < op.spec().node_count(); ++n) {
    Matrix a = op.a0().node(n);
    g0 = std::max(g0, nuclear_sum(a.adjoint() * a));
  }
  double total = g0;
  for (std::size_t j = 1; j <= op.levels(); ++j) {
    const auto& t = op.term(j);
    if (!t) continue;
    MatrixField bb = integrate_first(matmul(t->b, adjoint(t->b)), j);
    MatrixField aa = integrate_first(matmul(adjoint(t->a), t->a), j);
    double gj = 0.0;
    for (std::size_t n = 0; n < bb.node_count(); ++n) gj = std::max(gj, nuclear_sum(Matrix(bb.node(n) * aa.node(n))));
    total += gj;
  }
  return total;
}

FieldTuple log_determinant_shifted(const DefectOperator& op, Complex lambda, double zero_tol) {
  VectorDeterminant pi = determinant(shifted(op, lambda), zero_tol);
  const double m = static_cast<double>(op.m());
  const Complex log_lambda = std::log(lambda);
  const Complex lambda_m = std::pow(lambda, m);
  FieldTuple out;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    MatrixField c(pi[j].spec(), 1, 1);
    for (std::size_t n = 0; n < c.node_count(); ++n) {
      Complex v = pi[j].value(n);
      c.node(n)(0, 0) = j == 0 ? m * log_lambda + std::log(v / lambda_m) : std::log(v);
    }
    out.components.push_back(std::move(c));
  }
  return out;
}

LogDetSeries log_det_series(const DefectOperator& op, Complex lambda, int n_max, double compress_tol) {
  if (n_max < 1) throw DomainError("log_det_series: n_max must be >= 1");
  const double norm = trace_norm(op);
  const double rho = norm / std::abs(lambda);
  if (!(rho < 1.0)) throw DomainError("log_det_series: |lambda| must exceed the trace norm");

  LogDetSeries s;
  s.lhs = log_determinant_shifted(op, lambda);

  for (std::size_t j = 0; j <= op.levels(); ++j) s.rhs.components.emplace_back(op.spec().trailing(j), 1, 1);
  const Complex log_lambda = std::log(lambda);
  for (std::size_t n = 0; n < s.rhs[0].node_count(); ++n)
    s.rhs[0].node(n)(0, 0) = static_cast<double>(op.m()) * log_lambda;
  auto traces = power_traces(op, n_max, compress_tol);
  Complex lambda_pow = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    lambda_pow *= lambda;
    const Complex w = -1.0 / (static_cast<double>(n) * lambda_pow);
    for (std::size_t j = 0; j <= op.levels(); ++j) s.rhs[j] = add(s.rhs[j], scale(w, traces[n - 1][j]));
  }
  double total_width = static_cast<double>(op.m());
  for (std::size_t j = 1; j <= op.levels(); ++j) total_width += static_cast<double>(op.width(j));
  s.tail_bound = std::pow(rho, n_max + 1) / (1.0 - rho) * total_width;
  return s;
}

std::size_t spectrum_degree(const DefectOperator& op, Complex lambda, double zero_tol) {
  auto outcome = eliminate(shifted(op, lambda), zero_tol);
  return outcome.invertible() ? op.levels() + 1 : outcome.failure().step;
}

SpectrumScan spectrum_scan(const DefectOperator& op, const std::vector<Complex>& lambdas, double zero_tol,
                           unsigned threads) {
  SpectrumScan scan;
  scan.lambdas = lambdas;
  scan.degrees.assign(lambdas.size(), 0);
  scan.min_abs_pi.assign(lambdas.size(), {});
  auto run = [&](std::size_t i) {
    auto outcome = eliminate(shifted(op, lambdas[i]), zero_tol);
    scan.degrees[i] = outcome.invertible() ? op.levels() + 1 : outcome.failure().step;
    for (const auto& d : outcome.diagnostics) scan.min_abs_pi[i].push_back(d.min_abs_pi);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, lambdas.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) run(i);
    return scan;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < lambdas.size();) run(i);
    });
  for (auto& t : pool) t.join();
  return scan;
}

bool iso_check(const DefectOperator& a, const DefectOperator& b, int n_max, double tol) {
  require_compatible(a, b, "iso_check");
  auto ta = power_traces(a, n_max);
  auto tb = power_traces(b, n_max);
  for (int n = 0; n < n_max; ++n)
    if (max_abs_diff(ta[n], tb[n]) > tol) return false;
  return true;
}

DefectOperator exponential(const DefectOperator& op, double compress_tol) {
  const double norm = trace_norm(op);
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.125) ++squarings;
  const DefectOperator x = scale(std::ldexp(1.0, -squarings), op);
  const DefectOperator id = DefectOperator::identity(op.spec(), op.m());
  // ||x|| <= 1/8, so 18 Taylor terms are far below double precision.
  constexpr int kOrder = 18;
  DefectOperator series = id;
  for (int k = kOrder; k >= 1; --k)
    series = compress(add(id, scale(1.0 / k, compose(x, series))), compress_tol);
  for (int s = 0; s < squarings; ++s) series = compress(compose(series, series), compress_tol);
  return series;
}

FieldTuple exp(const FieldTuple& t) {
  FieldTuple out;
  for (const auto& c : t.components) {
    MatrixField e(c.spec(), 1, 1);
    for (std::size_t n = 0; n < c.node_count(); ++n) e.node(n)(0, 0) = std::exp(c.value(n));
    out.components.push_back(std::move(e));
  }
  return out;
}

}  // namespace doa
