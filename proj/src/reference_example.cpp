#include "doa/reference_example.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "doa/functional.hpp"
#include "doa/oracle.hpp"

namespace doa::example {

namespace {

MatrixField scalar_map(const MatrixField& src, auto&& fn) {
  MatrixField out(src.spec(), 1, 1);
  for (std::size_t n = 0; n < src.node_count(); ++n) out.node(n)(0, 0) = fn(src.value(n));
  return out;
}

MatrixField constant_scalar(const GridSpec& spec, Complex v) {
  return MatrixField::constant(spec, Matrix::Constant(1, 1, v));
}

}  // namespace

Profile sample_profile(const GridSpec& spec, const FieldExpr& f) {
  if (spec.dims() != 2) throw ShapeError("example: grid must have two coordinates");
  Profile p;
  p.f = sample(std::span(&f, 1), spec, 1, 1);
  p.mean_square = integrate_first(matmul(p.f, p.f), 1);
  return p;
}

DefectOperator build_operator(const GridSpec& spec, const FieldExpr& f) {
  Profile p = sample_profile(spec, f);
  MatrixField one = constant_scalar(spec, 1.0);
  std::vector<std::optional<LevelTerm>> terms(2);
  terms[0] = LevelTerm{scale(-1.0, hstack(one, p.f)), vstack(one, p.f)};
  terms[1] = LevelTerm{constant_scalar(spec, -1.0), one};
  return DefectOperator(MatrixField(spec, 1, 1), std::move(terms));
}

VectorDeterminant closed_form_determinant(const Profile& p, Complex lambda) {
  const GridSpec& spec = p.f.spec();
  VectorDeterminant d;
  d.components.push_back(constant_scalar(spec, lambda));
  d.components.push_back(
      scalar_map(p.mean_square, [&](Complex q) { return (lambda + 1.0) * (lambda + q) / (lambda * lambda); }));
  d.components.push_back(constant_scalar(spec.trailing(2), (lambda + 2.0) / (lambda + 1.0)));
  return d;
}

VectorTrace closed_form_trace(const Profile& p, Complex lambda) {
  const GridSpec& spec = p.f.spec();
  VectorTrace t;
  t.components.push_back(constant_scalar(spec, lambda));
  t.components.push_back(scalar_map(p.mean_square, [](Complex q) { return 1.0 + q; }));
  t.components.push_back(constant_scalar(spec.trailing(2), 1.0));
  return t;
}

double closed_form_trace_norm(const Profile& p, Complex lambda) {
  double q = 0.0;
  for (std::size_t n = 0; n < p.mean_square.node_count(); ++n) q = std::max(q, p.mean_square.value(n).real());
  return std::abs(lambda) + 2.0 + q;
}

VectorTrace closed_form_power_trace(const Profile& p, int n) {
  const GridSpec& spec = p.f.spec();
  const double sign = n % 2 == 0 ? 1.0 : -1.0;
  VectorTrace t;
  t.components.push_back(constant_scalar(spec, 0.0));
  t.components.push_back(scalar_map(p.mean_square, [&](Complex q) { return sign * (1.0 + std::pow(q, n)); }));
  t.components.push_back(constant_scalar(spec.trailing(2), sign * (std::ldexp(1.0, n) - 1.0)));
  return t;
}

DefectOperator closed_form_resolvent(const Profile& p, Complex lambda) {
  const GridSpec& spec = p.f.spec();
  MatrixField one = constant_scalar(spec, 1.0);
  MatrixField denom = lift(scalar_map(p.mean_square, [&](Complex q) { return -1.0 / (lambda + q); }), spec);
  std::vector<std::optional<LevelTerm>> t1(2);
  t1[0] = LevelTerm{hstack(constant_scalar(spec, -1.0 / (lambda + 1.0)), matmul(p.f, denom)), vstack(one, p.f)};
  DefectOperator inner(one, std::move(t1));
  DefectOperator outer = DefectOperator::elementary(spec, 2, constant_scalar(spec, -1.0 / (lambda + 2.0)), one);
  return scale(1.0 / lambda, compose(outer, inner));
}

std::vector<CheckResult> run_checks(std::size_t n) {
  const GridSpec spec({n, n});
  const FieldExpr f = parse(kDefaultProfile);
  const Profile p = sample_profile(spec, f);
  const DefectOperator op = build_operator(spec, f);
  std::vector<CheckResult> out;
  auto record = [&](std::string name, double dev, double tol) {
    out.push_back({std::move(name), dev <= tol, dev, tol});
  };

  for (Complex lambda : {Complex(3.0), Complex(10.0), Complex(-0.5, 2.0)}) {
    char label[64];
    std::snprintf(label, sizeof label, "determinant lambda=%g%+gi", lambda.real(), lambda.imag());
    double dev = max_abs_diff(determinant(shifted(op, lambda)), closed_form_determinant(p, lambda));
    record(label, dev, 1e-10);
  }

  const std::size_t expected_degree[] = {0, 1, 2, 3};
  const double degree_lambdas[] = {0.0, -1.0, -2.0, 5.0};
  for (int i = 0; i < 4; ++i) {
    std::size_t d = spectrum_degree(op, degree_lambdas[i]);
    char label[64];
    std::snprintf(label, sizeof label, "degree lambda=%g is %zu", degree_lambdas[i], expected_degree[i]);
    record(label, d == expected_degree[i] ? 0.0 : 1.0, 0.0);
  }

  record("trace lambda=1", max_abs_diff(trace(shifted(op, 1.0)), closed_form_trace(p, 1.0)), 1e-10);
  record("trace norm lambda=1", std::abs(trace_norm(shifted(op, 1.0)) - closed_form_trace_norm(p, 1.0)), 1e-10);

  auto powers = power_traces(op, 6);
  double power_dev = 0.0;
  for (int k = 1; k <= 6; ++k) power_dev = std::max(power_dev, max_abs_diff(powers[k - 1], closed_form_power_trace(p, k)));
  record("power traces n=1..6", power_dev, 1e-9);

  const DefectOperator inv = inverse(shifted(op, 1.0));
  const DefectOperator closed = closed_form_resolvent(p, 1.0);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  double rel = 0.0;
  for (int s = 0; s < 50; ++s) {
    StateVector u(spec, 1);
    for (std::size_t k = 0; k < spec.node_count(); ++k) u.values().node(k)(0, 0) = Complex(g(rng), g(rng));
    StateVector x = apply(inv, u);
    StateVector y = apply(closed, u);
    rel = std::max(rel, add(x, scale(-1.0, y)).norm() / y.norm());
  }
  record("resolvent lambda=1 vs closed form", rel, 1e-9);

  if (spec.node_count() <= kDenseCap) record("dense inverse residual lambda=1", dense_inverse_check(shifted(op, 1.0)), 1e-10);
  return out;
}

void print_checks(const std::vector<CheckResult>& checks, std::ostream& out) {
  for (const auto& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%s  %-40s deviation=%.3e tol=%.1e", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.deviation, c.tolerance);
    out << line << '\n';
  }
}

}  // namespace doa::example
