#include "doa/oracle.hpp"

#include "doa/elimination.hpp"

namespace doa {

DenseRealization assemble(const DefectOperator& op, std::size_t cap) {
  const GridSpec& spec = op.spec();
  const Index m = op.m();
  const std::size_t size = spec.node_count() * static_cast<std::size_t>(m);
  if (size > cap) throw CapacityError("assemble: dense size " + std::to_string(size) + " exceeds cap");
  DenseRealization d{Matrix::Zero(static_cast<Index>(size), static_cast<Index>(size)), spec, m};
  for (std::size_t n = 0; n < spec.node_count(); ++n)
    d.matrix.block(static_cast<Index>(n) * m, static_cast<Index>(n) * m, m, m) = op.a0().node(n);
  for (std::size_t j = 1; j <= op.levels(); ++j) {
    const auto& t = op.term(j);
    if (!t) continue;
    const std::size_t block = spec.leading_count(j);
    const double w = 1.0 / static_cast<double>(block);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
      const std::size_t base = (k / block) * block;
      for (std::size_t i = 0; i < block; ++i) {
        const std::size_t kp = base + i;
        d.matrix.block(static_cast<Index>(k) * m, static_cast<Index>(kp) * m, m, m) +=
            w * (t->a.node(k) * t->b.node(kp));
      }
    }
  }
  return d;
}

Eigen::VectorXcd to_dense(const StateVector& u) {
  auto raw = u.values().raw();
  return Eigen::Map<const Eigen::VectorXcd>(raw.data(), static_cast<Index>(raw.size()));
}

StateVector from_dense(const Eigen::VectorXcd& v, const GridSpec& spec, Index m) {
  StateVector u(spec, m);
  for (std::size_t n = 0; n < spec.node_count(); ++n)
    u.values().node(n) = v.segment(static_cast<Index>(n) * m, m);
  return u;
}

std::vector<Complex> dense_spectrum(const DefectOperator& op, std::size_t cap) {
  DenseRealization d = assemble(op, cap);
  Eigen::ComplexEigenSolver<Matrix> es(d.matrix, false);
  const auto& ev = es.eigenvalues();
  return std::vector<Complex>(ev.data(), ev.data() + ev.size());
}

double dense_inverse_check(const DefectOperator& op, double zero_tol, std::size_t cap) {
  DenseRealization a = assemble(op, cap);
  DenseRealization b = assemble(inverse(op, zero_tol), cap);
  Matrix r = a.matrix * b.matrix - Matrix::Identity(a.matrix.rows(), a.matrix.cols());
  return r.cwiseAbs().maxCoeff();
}

}  // namespace doa
