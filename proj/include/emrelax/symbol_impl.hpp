#pragma once

#include <cmath>
#include <random>

namespace emrelax {

template <class Rng>
Vec10c random_compatible_state(const ModelParams& params, const MatXc& basis, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VecXc a(basis.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cplx(normal(rng), normal(rng));
  Vec10c u = basis * a;
  return u / std::sqrt(weighted_norm(params, u));
}

}  // namespace emrelax
