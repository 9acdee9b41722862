#pragma once

// The two-coordinate, scalar (N = 2, M = 1) self-adjoint example
//
//   A u = -<u>_1 - f <f u>_1 - <u>_2,   <f>_1 = 0,
//
// together with closed forms for its determinant, trace, trace norm,
// power traces and resolvent.

#include <iosfwd>
#include <string>
#include <vector>

#include "doa/elimination.hpp"
#include "doa/expr.hpp"

namespace doa::example {

inline constexpr const char* kDefaultProfile = "sqrt(2)*sin(2*pi*k1)";

/// f sampled on the grid and <f^2>_1 on the k2 axis.
struct Profile {
  MatrixField f;             // 1x1 on the full grid
  MatrixField mean_square;   // 1x1 on trailing(1)
};

Profile sample_profile(const GridSpec& spec, const FieldExpr& f);

DefectOperator build_operator(const GridSpec& spec, const FieldExpr& f);

/// (lambda, (lambda+1)(lambda+<f^2>_1)/lambda^2, (lambda+2)/(lambda+1)).
VectorDeterminant closed_form_determinant(const Profile& p, Complex lambda);
/// trace of lambda I - A: (lambda, 1 + <f^2>_1, 1).
VectorTrace closed_form_trace(const Profile& p, Complex lambda);
/// |lambda| + 2 + max <f^2>_1.
double closed_form_trace_norm(const Profile& p, Complex lambda);
/// tau(A^n) = (-1)^n (0, 1 + <f^2>_1^n, 2^n - 1).
VectorTrace closed_form_power_trace(const Profile& p, int n);
/// lambda^{-1} (I - <.>_2/(lambda+2)) o (I - <.>_1/(lambda+1) - f<f.>_1/(lambda+<f^2>_1)).
DefectOperator closed_form_resolvent(const Profile& p, Complex lambda);

struct CheckResult {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double tolerance = 0.0;
};

/// Runs determinant, degree, trace, trace norm, power trace and resolvent
/// checks on a grid of n x n points with the default profile.
std::vector<CheckResult> run_checks(std::size_t n);

void print_checks(const std::vector<CheckResult>& checks, std::ostream& out);

}  // namespace doa::example
