#include <doctest.h>

#include <random>

#include "doa/oracle.hpp"
#include "doa/operator.hpp"
#include "doa/reference_example.hpp"
#include "support/random_operators.hpp"

using namespace doa;
using namespace doa::testing;

namespace {

MatrixField scalar_field(const GridSpec& spec, Complex v) { return MatrixField::constant(spec, Matrix::Constant(1, 1, v)); }

DefectOperator example_operator(std::size_t n) {
  return example::build_operator(GridSpec({n, n}), parse(example::kDefaultProfile));
}

}  // namespace

TEST_CASE("apply") {
  std::mt19937_64 rng(1);
  GridSpec spec({4, 3});
  SUBCASE("identity is exact") {
    StateVector u = random_state(rng, spec, 2);
    StateVector v = apply(DefectOperator::identity(spec, 2), u);
    CHECK(max_abs_diff(u.values(), v.values()) == 0.0);
  }
  SUBCASE("example operator on a constant state") {
    GridSpec g({8, 8});
    StateVector u = StateVector(scalar_field(g, Complex(1.5, -0.5)));
    StateVector v = apply(example_operator(8), u);
    // <u>_1 = c, <f u>_1 = 0, <u>_2 = c, so A u = -2c.
    CHECK(max_abs_diff(v.values(), scalar_field(g, Complex(-3.0, 1.0))) < 1e-14);
  }
  SUBCASE("level-1 average of a zero-mean state vanishes") {
    GridSpec g({4, 2});
    DefectOperator op = DefectOperator::zero(g, 1);
    std::vector<std::optional<LevelTerm>> terms(2);
    terms[0] = LevelTerm{random_field(rng, g, 1, 1, 1.0), scalar_field(g, 1.0)};
    op = DefectOperator(MatrixField(g, 1, 1), std::move(terms));
    StateVector u(g, 1);
    for (std::size_t n = 0; n < g.node_count(); ++n) u.values().node(n)(0, 0) = (n % 4 < 2) ? 1.0 : -1.0;
    CHECK(apply(op, u).values().max_abs() < 1e-15);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(apply(DefectOperator::identity(spec, 2), StateVector(spec, 1)), ShapeError);
  }
}

TEST_CASE("add and scale") {
  std::mt19937_64 rng(2);
  GridSpec spec({3, 3});
  DefectOperator a = random_operator(rng, spec, {.all_levels = true});
  DefectOperator b = random_operator(rng, spec, {.all_levels = true});
  StateVector u = random_state(rng, spec, 2);

  DefectOperator sum = add(a, b);
  for (std::size_t j = 1; j <= 2; ++j) CHECK(sum.width(j) == a.width(j) + b.width(j));
  CHECK(map_distance(sum, DefectOperator::zero(spec, 2), u) ==
        doctest::Approx(add(apply(a, u), apply(b, u)).norm()));
  CHECK(add(apply(sum, u), scale(-1.0, add(apply(a, u), apply(b, u)))).norm() < 1e-13);

  DefectOperator with_zero = add(a, DefectOperator::zero(spec, 2));
  for (std::size_t j = 1; j <= 2; ++j) CHECK(with_zero.width(j) == a.width(j));

  DefectOperator cancel = add(a, scale(-1.0, a));
  CHECK(apply(cancel, u).norm() < 1e-13);
  for (std::size_t j = 1; j <= 2; ++j) CHECK(cancel.width(j) == 2 * a.width(j));

  GridSpec g({2, 2});
  DefectOperator one = DefectOperator::elementary(g, 1, scalar_field(g, 1.0), scalar_field(g, 2.0));
  CHECK(add(one, one).width(1) == 2);
}

TEST_CASE("compose") {
  std::mt19937_64 rng(3);
  GridSpec spec({3, 4});
  SUBCASE("identity is neutral") {
    DefectOperator op = random_operator(rng, spec);
    CHECK(equal_as_map(compose(DefectOperator::identity(spec, 2), op), op, 1e-14));
    CHECK(equal_as_map(compose(op, DefectOperator::identity(spec, 2)), op, 1e-14));
  }
  SUBCASE("zero-mean coupling kills the product term") {
    GridSpec g({4, 2});
    FieldExpr f = parse("cos(2*pi*k1)");
    MatrixField zero_mean = sample(std::span(&f, 1), g, 1, 1);
    std::vector<std::optional<LevelTerm>> ta(2), tb(2);
    ta[0] = LevelTerm{scalar_field(g, 1.0), zero_mean};
    tb[0] = LevelTerm{scalar_field(g, 1.0), scalar_field(g, 1.0)};
    DefectOperator a(MatrixField(g, 1, 1), std::move(ta));
    DefectOperator b(MatrixField(g, 1, 1), std::move(tb));
    StateVector u = random_state(rng, g, 1);
    CHECK(apply(compose(a, b), u).norm() < 1e-15);
  }
  SUBCASE("level pair (1, 2) lands at level 2 with C = A1 <B1 A2'>_1") {
    std::vector<std::optional<LevelTerm>> ta(2), tb(2);
    ta[0] = LevelTerm{random_field(rng, spec, 2, 1, 1.0), random_field(rng, spec, 1, 2, 1.0)};
    tb[1] = LevelTerm{random_field(rng, spec, 2, 1, 1.0), random_field(rng, spec, 1, 2, 1.0)};
    DefectOperator ab = compose(DefectOperator(MatrixField(spec, 2, 2), ta), DefectOperator(MatrixField(spec, 2, 2), tb));
    MatrixField c = matmul(ta[0]->a, lift(integrate_first(matmul(ta[0]->b, tb[1]->a), 1), spec));
    DefectOperator expected(MatrixField(spec, 2, 2), {std::nullopt, LevelTerm{c, tb[1]->b}});
    CHECK(equal_as_map(ab, expected, 1e-15));
  }
  SUBCASE("level pair (2, 1) lands at level 2 with D = <B2 A1'>_1 B1'") {
    std::vector<std::optional<LevelTerm>> ta(2), tb(2);
    ta[1] = LevelTerm{random_field(rng, spec, 2, 1, 1.0), random_field(rng, spec, 1, 2, 1.0)};
    tb[0] = LevelTerm{random_field(rng, spec, 2, 1, 1.0), random_field(rng, spec, 1, 2, 1.0)};
    DefectOperator ab = compose(DefectOperator(MatrixField(spec, 2, 2), ta), DefectOperator(MatrixField(spec, 2, 2), tb));
    MatrixField d = matmul(lift(integrate_first(matmul(ta[1]->b, tb[0]->a), 1), spec), tb[0]->b);
    DefectOperator expected(MatrixField(spec, 2, 2), {std::nullopt, LevelTerm{ta[1]->a, d}});
    CHECK(equal_as_map(ab, expected, 1e-15));
  }
}

TEST_CASE("compose properties") {
  std::mt19937_64 rng(4);
  GridSpec spec({6, 6});
  for (int trial = 0; trial < 10; ++trial) {
    DefectOperator a = random_operator(rng, spec), b = random_operator(rng, spec), c = random_operator(rng, spec);
    StateVector u = random_state(rng, spec, 2);
    double scale_ref = std::max(1.0, apply(a, apply(b, apply(c, u))).norm());
    CHECK(map_distance(compose(a, compose(b, c)), compose(compose(a, b), c), u) < 1e-12 * scale_ref);
    StateVector direct = apply(a, apply(b, u));
    CHECK(add(apply(compose(a, b), u), scale(-1.0, direct)).norm() < 1e-12 * std::max(1.0, direct.norm()));
    CHECK(equal_as_map(adjoint(compose(a, b)), compose(adjoint(b), adjoint(a)), 1e-12));
  }
}

TEST_CASE("adjoint") {
  std::mt19937_64 rng(5);
  GridSpec spec({3, 4});
  CHECK(equal_as_map(adjoint(DefectOperator::identity(spec, 2)), DefectOperator::identity(spec, 2), 0.0));
  DefectOperator op = random_operator(rng, spec, {.all_levels = true});
  DefectOperator twice = adjoint(adjoint(op));
  CHECK(max_abs_diff(twice.a0(), op.a0()) == 0.0);
  for (std::size_t j = 1; j <= 2; ++j) {
    CHECK(max_abs_diff(twice.term(j)->a, op.term(j)->a) == 0.0);
    CHECK(max_abs_diff(twice.term(j)->b, op.term(j)->b) == 0.0);
  }
  for (int trial = 0; trial < 5; ++trial) {
    StateVector u = random_state(rng, spec, 2), v = random_state(rng, spec, 2);
    Complex lhs = v.dot(apply(op, u));
    Complex rhs = apply(adjoint(op), v).dot(u);
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
  DefectOperator ex = example_operator(8);
  CHECK(equal_as_map(adjoint(ex), ex, 1e-15));
}

TEST_CASE("compress") {
  std::mt19937_64 rng(6);
  GridSpec spec({4, 3});
  SUBCASE("exact cancellation removes every level") {
    DefectOperator op = random_operator(rng, spec, {.all_levels = true});
    DefectOperator c = compress(add(op, scale(-1.0, op)), 0.0);
    CHECK(c.width(1) == 0);
    CHECK(c.width(2) == 0);
  }
  SUBCASE("duplicated rows collapse to rank one") {
    MatrixField b1 = random_field(rng, spec, 1, 2, 1.0);
    MatrixField a = random_field(rng, spec, 2, 2, 1.0);
    DefectOperator op = DefectOperator::elementary(spec, 1, a, vstack(b1, b1));
    CHECK(op.width(1) == 2);
    DefectOperator c = compress(op, 0.0);
    CHECK(c.width(1) == 1);
    CHECK(equal_as_map(c, op, 1e-13));
  }
  SUBCASE("truncation error stays below tol") {
    RandomOptions o;
    o.max_width = 6;
    o.all_levels = true;
    DefectOperator op = random_operator(rng, spec, o);
    for (double tol : {1e-1, 0.5, 1.0}) {
      DefectOperator c = compress(op, tol);
      for (int s = 0; s < 100; ++s) {
        StateVector u = random_state(rng, spec, 2);
        CHECK(map_distance(c, op, u) <= tol * u.norm() * (1 + 1e-12));
      }
    }
  }
  SUBCASE("dense realization is preserved at tol 0") {
    DefectOperator op = random_operator(rng, spec, {.max_width = 4, .all_levels = true});
    DefectOperator grown = add(op, op);
    DefectOperator c = compress(grown, 0.0);
    CHECK(c.width(1) <= op.width(1));
    CHECK((assemble(c).matrix - assemble(grown).matrix).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("equal_as_map") {
  std::mt19937_64 rng(8);
  GridSpec spec({3, 3});
  DefectOperator op = random_operator(rng, spec, {.all_levels = true});
  CHECK(equal_as_map(op, op, 0.0));

  std::vector<std::optional<LevelTerm>> terms = op.terms();
  terms[0] = LevelTerm{scale(2.0, terms[0]->a), scale(0.5, terms[0]->b)};
  CHECK(equal_as_map(op, DefectOperator(op.a0(), terms), 1e-14));

  const double tol = 1e-8;
  MatrixField a0 = op.a0();
  a0.node(3)(1, 0) += 10 * tol;
  CHECK_FALSE(equal_as_map(op, DefectOperator(a0, op.terms()), tol));

  // Sampling path for large kernels.
  CHECK(equal_as_map(op, DefectOperator(op.a0(), terms), 1e-14, 10));
}

TEST_CASE("operator validation") {
  GridSpec spec({2, 2});
  std::vector<std::optional<LevelTerm>> terms(2);
  terms[0] = LevelTerm{MatrixField(spec, 2, 1), MatrixField(spec, 2, 2)};
  CHECK_THROWS_AS(DefectOperator(MatrixField(spec, 2, 2), terms), ShapeError);
  CHECK_THROWS_AS(DefectOperator(MatrixField(spec, 2, 2), std::vector<std::optional<LevelTerm>>(1)), ShapeError);
  CHECK_THROWS_AS(add(DefectOperator::identity(spec, 2), DefectOperator::identity(spec, 1)), ShapeError);
}
