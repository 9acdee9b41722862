#pragma once

// Random operators and states for property tests. Node values are drawn
// independently; on a finite grid every node table is a "continuous"
// function, so nothing smoother is needed.

#include <random>

#include "doa/operator.hpp"

namespace doa::testing {

struct RandomOptions {
  Index m = 2;
  Index max_width = 2;
  double a0_shift = 0.0;     // A0 = shift * I + noise
  double a0_noise = 1.0;     // entries uniform in the complex square of this half-width
  double term_scale = 1.0;   // entries of Aj, Bj likewise
  bool all_levels = false;   // force every level present
};

inline Complex random_complex(std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  return {u(rng), u(rng)};
}

inline MatrixField random_field(std::mt19937_64& rng, const GridSpec& spec, Index rows, Index cols,
                                double half_width) {
  MatrixField f(spec, rows, cols);
  for (std::size_t n = 0; n < spec.node_count(); ++n)
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) f.node(n)(r, c) = random_complex(rng, half_width);
  return f;
}

inline DefectOperator random_operator(std::mt19937_64& rng, const GridSpec& spec, const RandomOptions& o = {}) {
  MatrixField a0 = random_field(rng, spec, o.m, o.m, o.a0_noise);
  if (o.a0_shift != 0.0) a0 = add(a0, scale(o.a0_shift, MatrixField::identity(spec, o.m)));
  std::uniform_int_distribution<Index> width(o.all_levels ? 1 : 0, o.max_width);
  std::vector<std::optional<LevelTerm>> terms(spec.dims());
  for (auto& t : terms) {
    Index w = width(rng);
    if (w == 0) continue;
    t = LevelTerm{random_field(rng, spec, o.m, w, o.term_scale), random_field(rng, spec, w, o.m, o.term_scale)};
  }
  return DefectOperator(std::move(a0), std::move(terms));
}

/// Diagonally dominant A0 and small level terms: elimination always passes.
inline DefectOperator random_invertible(std::mt19937_64& rng, const GridSpec& spec, Index m = 2) {
  RandomOptions o;
  o.m = m;
  o.a0_shift = 2.0;
  o.a0_noise = 0.35;
  o.term_scale = 0.3;
  o.all_levels = true;
  return random_operator(rng, spec, o);
}

inline StateVector random_state(std::mt19937_64& rng, const GridSpec& spec, Index m) {
  return StateVector(random_field(rng, spec, m, 1, 1.0));
}

inline double map_distance(const DefectOperator& a, const DefectOperator& b, const StateVector& u) {
  return add(apply(a, u), scale(-1.0, apply(b, u))).norm();
}

}  // namespace doa::testing
