#include <doctest.h>

#include <algorithm>
#include <random>

#include "doa/functional.hpp"
#include "doa/oracle.hpp"
#include "doa/reference_example.hpp"
#include "support/random_operators.hpp"

using namespace doa;
using namespace doa::testing;

namespace {

double dense_gap(const DefectOperator& a, const Matrix& expected) {
  return (assemble(a).matrix - expected).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("identity and averaging blocks") {
  GridSpec spec({2, 2});
  CHECK(dense_gap(DefectOperator::identity(spec, 2), Matrix::Identity(8, 8)) == 0.0);

  // <u>_1 on a 2x2 grid averages pairs of nodes sharing k2.
  MatrixField one = MatrixField::constant(spec, Matrix::Constant(1, 1, 1.0));
  DefectOperator avg1 = DefectOperator::elementary(spec, 1, one, one);
  avg1 = add(avg1, scale(-1.0, DefectOperator::identity(spec, 1)));
  Matrix expected = Matrix::Zero(4, 4);
  expected.block(0, 0, 2, 2).setConstant(0.5);
  expected.block(2, 2, 2, 2).setConstant(0.5);
  CHECK(dense_gap(avg1, expected) < 1e-15);

  DefectOperator avg2 = add(DefectOperator::elementary(spec, 2, one, one), scale(-1.0, DefectOperator::identity(spec, 1)));
  CHECK(dense_gap(avg2, Matrix::Constant(4, 4, 0.25)) < 1e-15);
}

TEST_CASE("dense realization is an algebra homomorphism") {
  std::mt19937_64 rng(41);
  for (auto dims : {std::vector<std::size_t>{3, 2}, std::vector<std::size_t>{5, 5}, std::vector<std::size_t>{2, 2, 2}}) {
    GridSpec spec(dims);
    for (int trial = 0; trial < 5; ++trial) {
      DefectOperator a = random_operator(rng, spec), b = random_operator(rng, spec);
      Matrix da = assemble(a).matrix, db = assemble(b).matrix;
      CHECK(dense_gap(add(a, b), da + db) < 1e-12);
      CHECK(dense_gap(compose(a, b), da * db) < 1e-12);
      CHECK(dense_gap(adjoint(a), da.adjoint()) < 1e-12);
      StateVector u = random_state(rng, spec, 2);
      CHECK((to_dense(apply(a, u)) - da * to_dense(u)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("dense round trip") {
  std::mt19937_64 rng(42);
  GridSpec spec({3, 2});
  StateVector u = random_state(rng, spec, 2);
  CHECK(max_abs_diff(from_dense(to_dense(u), spec, 2).values(), u.values()) == 0.0);
}

TEST_CASE("dense spectrum") {
  SUBCASE("worked example eigenvalues lie in {0, -1, -2}") {
    GridSpec spec({8, 8});
    auto ev = dense_spectrum(example::build_operator(spec, parse(example::kDefaultProfile)));
    CHECK(ev.size() == 64);
    std::size_t zeros = 0, ones = 0, twos = 0;
    for (Complex z : ev) {
      double d0 = std::abs(z), d1 = std::abs(z + 1.0), d2 = std::abs(z + 2.0);
      CHECK(std::min({d0, d1, d2}) < 1e-10);
      zeros += d0 < 1e-10;
      ones += d1 < 1e-10;
      twos += d2 < 1e-10;
    }
    // -2 once (constants), -1 on the k2 modes and the f(k1) g(k2) modes, 0 elsewhere.
    CHECK(twos == 1);
    CHECK(ones == 7 + 8);
    CHECK(zeros == 64 - 16);
  }
  SUBCASE("identity") {
    for (Complex z : dense_spectrum(DefectOperator::identity(GridSpec({3, 2}), 2))) CHECK(std::abs(z - 1.0) < 1e-14);
  }
  SUBCASE("diagonal multiplication operator") {
    GridSpec spec({4, 3});
    MatrixField d(spec, 1, 1);
    std::vector<double> samples;
    for (std::size_t n = 0; n < spec.node_count(); ++n) {
      samples.push_back(1.0 + static_cast<double>(n));
      d.node(n)(0, 0) = samples.back();
    }
    auto ev = dense_spectrum(DefectOperator(d, std::vector<std::optional<LevelTerm>>(2)));
    std::vector<double> re;
    for (Complex z : ev) re.push_back(z.real());
    std::sort(re.begin(), re.end());
    for (std::size_t i = 0; i < re.size(); ++i) CHECK(re[i] == doctest::Approx(samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("dense inverse check") {
  GridSpec spec({6, 6});
  auto ex = example::build_operator(spec, parse(example::kDefaultProfile));
  CHECK(dense_inverse_check(shifted(ex, 1.0)) < 1e-10);
  std::mt19937_64 rng(43);
  CHECK(dense_inverse_check(random_invertible(rng, GridSpec({5, 5}))) < 1e-9);
}

TEST_CASE("capacity guard") {
  GridSpec spec({40, 40});
  CHECK_THROWS_AS(assemble(DefectOperator::identity(spec, 3)), CapacityError);
  CHECK_NOTHROW(assemble(DefectOperator::identity(GridSpec({4, 4}), 1), 16));
}

TEST_CASE("elimination failure matches dense singularity") {
  GridSpec spec({6, 6});
  auto ex = example::build_operator(spec, parse(example::kDefaultProfile));
  for (Complex lambda : {Complex(0.0), Complex(-1.0), Complex(-2.0), Complex(0.7), Complex(-1.3, 0.2)}) {
    DefectOperator shifted_op = shifted(ex, lambda);
    Eigen::JacobiSVD<Matrix> svd(assemble(shifted_op).matrix);
    bool dense_singular = svd.singularValues().minCoeff() < 1e-10;
    CAPTURE(lambda);
    CHECK(dense_singular == (spectrum_degree(ex, lambda) <= 2));
  }
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    DefectOperator op = random_operator(rng, GridSpec({3, 3}));
    Complex lambda = random_complex(rng, 2.0);
    Eigen::JacobiSVD<Matrix> svd(assemble(shifted(op, lambda)).matrix);
    if (spectrum_degree(op, lambda) == 3) CHECK(svd.singularValues().minCoeff() > 1e-12);
  }
}
