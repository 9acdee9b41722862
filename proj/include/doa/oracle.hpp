#pragma once

// Dense realization of a canonical-form operator on its grid. Row index of
// (node, component) is node * M + component, with nodes in grid order.
// Serves as an independent check of the structured algebra.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doa/operator.hpp"

namespace doa {

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kDenseCap = 4096;

struct DenseRealization {
  Matrix matrix;
  GridSpec spec;
  Index m = 0;

  std::size_t row_index(std::size_t node, Index component) const {
    return node * static_cast<std::size_t>(m) + static_cast<std::size_t>(component);
  }
};

DenseRealization assemble(const DefectOperator& op, std::size_t cap = kDenseCap);

Eigen::VectorXcd to_dense(const StateVector& u);
StateVector from_dense(const Eigen::VectorXcd& v, const GridSpec& spec, Index m);

std::vector<Complex> dense_spectrum(const DefectOperator& op, std::size_t cap = kDenseCap);

/// max |assemble(op) * assemble(inverse(op)) - I|.
double dense_inverse_check(const DefectOperator& op, double zero_tol = 1e-10, std::size_t cap = kDenseCap);

}  // namespace doa
