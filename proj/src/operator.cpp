#include "doa/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace doa {

StateVector::StateVector(MatrixField values) : values_(std::move(values)) {
  if (values_.cols() != 1) throw ShapeError("StateVector: field must have a single column");
}

StateVector::StateVector(const GridSpec& spec, Index m) : values_(spec, m, 1) {}

Complex StateVector::dot(const StateVector& other) const {
  if (!(spec() == other.spec()) || m() != other.m()) throw ShapeError("dot: shape mismatch");
  Complex s = 0.0;
  auto x = values_.raw();
  auto y = other.values_.raw();
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s / static_cast<double>(spec().node_count());
}

double StateVector::norm() const { return std::sqrt(std::max(0.0, dot(*this).real())); }

StateVector add(const StateVector& a, const StateVector& b) {
  return StateVector(add(a.values(), b.values()));
}

StateVector scale(Complex alpha, const StateVector& a) { return StateVector(scale(alpha, a.values())); }

DefectOperator::DefectOperator(MatrixField a0, std::vector<std::optional<LevelTerm>> terms)
    : a0_(std::move(a0)), terms_(std::move(terms)) {
  const GridSpec& spec = a0_.spec();
  if (spec.dims() < 1) throw ShapeError("DefectOperator: need at least one coordinate");
  if (a0_.rows() != a0_.cols() || a0_.rows() < 1) throw ShapeError("DefectOperator: a0 must be M x M, M >= 1");
  if (terms_.size() != spec.dims())
    throw ShapeError("DefectOperator: expected one term slot per coordinate");
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    auto& t = terms_[j];
    if (!t) continue;
    const std::string where = "DefectOperator level " + std::to_string(j + 1) + ": ";
    if (!(t->a.spec() == spec) || !(t->b.spec() == spec)) throw ShapeError(where + "grid mismatch");
    if (t->a.rows() != m() || t->b.cols() != m() || t->a.cols() != t->b.rows())
      throw ShapeError(where + "factor shapes do not match M x Mj and Mj x M");
    if (t->width() == 0) t.reset();
  }
}

DefectOperator DefectOperator::identity(const GridSpec& spec, Index m) {
  return DefectOperator(MatrixField::identity(spec, m),
                        std::vector<std::optional<LevelTerm>>(spec.dims()));
}

DefectOperator DefectOperator::zero(const GridSpec& spec, Index m) {
  return DefectOperator(MatrixField(spec, m, m), std::vector<std::optional<LevelTerm>>(spec.dims()));
}

DefectOperator DefectOperator::elementary(const GridSpec& spec, std::size_t level, MatrixField a,
                                          MatrixField b) {
  if (level < 1 || level > spec.dims()) throw ShapeError("elementary: level out of range");
  std::vector<std::optional<LevelTerm>> terms(spec.dims());
  Index m = a.rows();
  terms[level - 1] = LevelTerm{std::move(a), std::move(b)};
  return DefectOperator(MatrixField::identity(spec, m), std::move(terms));
}

void require_compatible(const DefectOperator& a, const DefectOperator& b, const char* what) {
  if (!(a.spec() == b.spec()) || a.m() != b.m())
    throw ShapeError(std::string(what) + ": operators differ in grid or M");
}

StateVector apply(const DefectOperator& op, const StateVector& u) {
  if (!(u.spec() == op.spec()) || u.m() != op.m()) throw ShapeError("apply: state shape mismatch");
  MatrixField out = matmul(op.a0(), u.values());
  for (std::size_t j = 1; j <= op.levels(); ++j) {
    const auto& t = op.term(j);
    if (!t) continue;
    MatrixField avg = lift(integrate_first(matmul(t->b, u.values()), j), op.spec());
    out = add(out, matmul(t->a, avg));
  }
  return StateVector(std::move(out));
}

namespace {

// Accumulates level contributions and concatenates them into canonical terms.
class TermAccumulator {
 public:
  explicit TermAccumulator(std::size_t levels) : pending_(levels) {}

  void push(std::size_t level, MatrixField a, MatrixField b) {
    if (a.cols() == 0) return;
    pending_.at(level - 1).push_back(LevelTerm{std::move(a), std::move(b)});
  }

  std::vector<std::optional<LevelTerm>> finish() {
    std::vector<std::optional<LevelTerm>> out(pending_.size());
    for (std::size_t j = 0; j < pending_.size(); ++j) {
      auto& list = pending_[j];
      if (list.empty()) continue;
      if (list.size() == 1) {
        out[j] = std::move(list.front());
        continue;
      }
      const GridSpec& spec = list.front().a.spec();
      Index m = list.front().a.rows();
      Index width = 0;
      for (const auto& t : list) width += t.width();
      MatrixField a(spec, m, width), b(spec, width, m);
      for (std::size_t n = 0; n < spec.node_count(); ++n) {
        auto an = a.node(n);
        auto bn = b.node(n);
        Index off = 0;
        for (const auto& t : list) {
          an.middleCols(off, t.width()) = t.a.node(n);
          bn.middleRows(off, t.width()) = t.b.node(n);
          off += t.width();
        }
      }
      out[j] = LevelTerm{std::move(a), std::move(b)};
    }
    return out;
  }

 private:
  std::vector<std::vector<LevelTerm>> pending_;
};

}  // namespace

DefectOperator add(const DefectOperator& a, const DefectOperator& b) {
  require_compatible(a, b, "add");
  TermAccumulator acc(a.levels());
  for (std::size_t j = 1; j <= a.levels(); ++j) {
    if (a.term(j)) acc.push(j, a.term(j)->a, a.term(j)->b);
    if (b.term(j)) acc.push(j, b.term(j)->a, b.term(j)->b);
  }
  return DefectOperator(add(a.a0(), b.a0()), acc.finish());
}

DefectOperator scale(Complex alpha, const DefectOperator& a) {
  std::vector<std::optional<LevelTerm>> terms(a.levels());
  for (std::size_t j = 1; j <= a.levels(); ++j)
    if (a.term(j)) terms[j - 1] = LevelTerm{scale(alpha, a.term(j)->a), a.term(j)->b};
  return DefectOperator(scale(alpha, a.a0()), std::move(terms));
}

DefectOperator subtract(const DefectOperator& a, const DefectOperator& b) {
  return add(a, scale(-1.0, b));
}

DefectOperator compose(const DefectOperator& a, const DefectOperator& b) {
  require_compatible(a, b, "compose");
  const GridSpec& spec = a.spec();
  const std::size_t n = a.levels();
  TermAccumulator acc(n);

  // a0 o b-terms and a-terms o b0.
  for (std::size_t r = 1; r <= n; ++r)
    if (b.term(r)) acc.push(r, matmul(a.a0(), b.term(r)->a), b.term(r)->b);
  for (std::size_t j = 1; j <= n; ++j)
    if (a.term(j)) acc.push(j, a.term(j)->a, matmul(a.term(j)->b, b.a0()));

  // Aj <Bj Ar' <Br' .>_r>_j
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& tj = a.term(j);
    if (!tj) continue;
    for (std::size_t r = 1; r <= n; ++r) {
      const auto& tr = b.term(r);
      if (!tr) continue;
      MatrixField inner = matmul(tj->b, tr->a);  // Mj x Mr
      if (j <= r) {
        acc.push(r, matmul(tj->a, lift(integrate_first(inner, j), spec)), tr->b);
      } else {
        acc.push(j, tj->a, matmul(lift(integrate_first(inner, r), spec), tr->b));
      }
    }
  }
  return DefectOperator(matmul(a.a0(), b.a0()), acc.finish());
}

DefectOperator adjoint(const DefectOperator& a) {
  std::vector<std::optional<LevelTerm>> terms(a.levels());
  for (std::size_t j = 1; j <= a.levels(); ++j)
    if (a.term(j)) terms[j - 1] = LevelTerm{adjoint(a.term(j)->b), adjoint(a.term(j)->a)};
  return DefectOperator(adjoint(a.a0()), std::move(terms));
}

DefectOperator shifted(const DefectOperator& op, Complex lambda) {
  return add(scale(lambda, DefectOperator::identity(op.spec(), op.m())), scale(-1.0, op));
}

namespace {

// Stack the node matrices of one trailing block: rows of A for every node in
// the block, columns of B likewise.
Matrix stack_a(const MatrixField& a, std::size_t first, std::size_t count) {
  Matrix s(a.rows() * static_cast<Index>(count), a.cols());
  for (std::size_t i = 0; i < count; ++i) s.middleRows(static_cast<Index>(i) * a.rows(), a.rows()) = a.node(first + i);
  return s;
}

Matrix stack_b(const MatrixField& b, std::size_t first, std::size_t count) {
  Matrix s(b.rows(), b.cols() * static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i) s.middleCols(static_cast<Index>(i) * b.cols(), b.cols()) = b.node(first + i);
  return s;
}

std::optional<LevelTerm> compress_level(const LevelTerm& t, std::size_t j, double tol) {
  const GridSpec& spec = t.a.spec();
  const std::size_t block = spec.leading_count(j);
  const std::size_t blocks = spec.node_count() / block;
  const double nb = static_cast<double>(block);
  const Index m = t.a.rows();
  const double eps = std::numeric_limits<double>::epsilon();

  struct BlockFactor {
    Matrix left;   // (m*block) x r
    Matrix right;  // r x (m*block)
  };
  std::vector<BlockFactor> factors(blocks);
  Index width = 0;
  for (std::size_t tb = 0; tb < blocks; ++tb) {
    Matrix sa = stack_a(t.a, tb * block, block);
    Matrix sb = stack_b(t.b, tb * block, block);
    // The block map is sa * sb / nb; its singular values are the operator's.
    Eigen::HouseholderQR<Matrix> qa(sa);
    Eigen::HouseholderQR<Matrix> qb(sb.adjoint());
    const Index pa = std::min(sa.rows(), sa.cols());
    const Index pb = std::min(sb.cols(), sb.rows());
    Matrix ra = qa.matrixQR().topRows(pa).triangularView<Eigen::Upper>();
    Matrix rb = qb.matrixQR().topRows(pb).triangularView<Eigen::Upper>();
    Matrix core = ra * rb.adjoint() / nb;
    Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double floor = 16.0 * eps * static_cast<double>(std::max(sa.rows(), sa.cols())) * sa.norm() * sb.norm() / nb;
    double threshold = std::max(tol, floor);
    Index r = 0;
    while (r < sv.size() && sv(r) > threshold) ++r;
    if (r == 0) continue;
    Matrix qa_thin = qa.householderQ() * Matrix::Identity(sa.rows(), pa);
    Matrix qb_thin = qb.householderQ() * Matrix::Identity(sb.cols(), pb);
    Eigen::VectorXd root = sv.head(r).cwiseSqrt() * std::sqrt(nb);
    factors[tb].left = qa_thin * svd.matrixU().leftCols(r) * root.asDiagonal();
    factors[tb].right = root.asDiagonal() * svd.matrixV().leftCols(r).adjoint() * qb_thin.adjoint();
    width = std::max(width, r);
  }
  if (width == 0) return std::nullopt;
  MatrixField a(spec, m, width), b(spec, width, m);
  for (std::size_t tb = 0; tb < blocks; ++tb) {
    const auto& f = factors[tb];
    const Index r = f.left.cols();
    for (std::size_t i = 0; i < block; ++i) {
      const std::size_t node = tb * block + i;
      if (r == 0) continue;
      a.node(node).leftCols(r) = f.left.middleRows(static_cast<Index>(i) * m, m);
      b.node(node).topRows(r) = f.right.middleCols(static_cast<Index>(i) * m, m);
    }
  }
  return LevelTerm{std::move(a), std::move(b)};
}

}  // namespace

DefectOperator compress(const DefectOperator& a, double tol) {
  if (tol < 0.0) throw ShapeError("compress: tol must be >= 0");
  std::vector<std::optional<LevelTerm>> terms(a.levels());
  for (std::size_t j = 1; j <= a.levels(); ++j)
    if (a.term(j)) terms[j - 1] = compress_level(*a.term(j), j, tol);
  return DefectOperator(a.a0(), std::move(terms));
}

bool equal_as_map(const DefectOperator& a, const DefectOperator& b, double tol, std::size_t max_pairs) {
  require_compatible(a, b, "equal_as_map");
  if (a.levels() != b.levels()) return false;
  if (max_abs_diff(a.a0(), b.a0()) > tol) return false;
  const GridSpec& spec = a.spec();
  const Index m = a.m();
  std::mt19937_64 rng(0x5eed);
  for (std::size_t j = 1; j <= a.levels(); ++j) {
    const auto& ta = a.term(j);
    const auto& tb = b.term(j);
    if (!ta && !tb) continue;
    const std::size_t block = spec.leading_count(j);
    const std::size_t blocks = spec.node_count() / block;
    auto kernel = [&](const std::optional<LevelTerm>& t, std::size_t k, std::size_t kp) -> Matrix {
      if (!t) return Matrix::Zero(m, m);
      return t->a.node(k) * t->b.node(kp);
    };
    if (spec.node_count() * block <= max_pairs) {
      for (std::size_t tb_i = 0; tb_i < blocks; ++tb_i) {
        Matrix ka = ta ? Matrix(stack_a(ta->a, tb_i * block, block) * stack_b(ta->b, tb_i * block, block))
                       : Matrix::Zero(m * static_cast<Index>(block), m * static_cast<Index>(block));
        Matrix kb = tb ? Matrix(stack_a(tb->a, tb_i * block, block) * stack_b(tb->b, tb_i * block, block))
                       : Matrix::Zero(m * static_cast<Index>(block), m * static_cast<Index>(block));
        if ((ka - kb).cwiseAbs().maxCoeff() > tol) return false;
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick_block(0, blocks - 1), pick_in(0, block - 1);
      for (std::size_t s = 0; s < max_pairs; ++s) {
        std::size_t base = pick_block(rng) * block;
        std::size_t k = base + pick_in(rng), kp = base + pick_in(rng);
        if ((kernel(ta, k, kp) - kernel(tb, k, kp)).cwiseAbs().maxCoeff() > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace doa
