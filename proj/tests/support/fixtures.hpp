#pragma once

#include "cggm/random.hpp"
#include "cggm/types.hpp"

#include <vector>

namespace fixture {

using cggm::ClassParams;
using cggm::Index;
using cggm::Matrix;

/// Well-conditioned random SPD matrix: B B^T / p + I.
inline Matrix random_spd(Index p, cggm::Rng& rng) {
  const Matrix b = cggm::standard_normal(p, p, rng);
  const Matrix s = b * b.transpose() / static_cast<double>(p) + Matrix::Identity(p, p);
  return 0.5 * (s + s.transpose());
}

inline ClassParams random_class(Index p, Index q, cggm::Rng& rng, double theta_scale = 0.5) {
  return ClassParams::make(random_spd(p, rng), theta_scale * cggm::standard_normal(q, p, rng));
}

inline std::vector<ClassParams> random_classes(int k, Index p, Index q, cggm::Rng& rng) {
  std::vector<ClassParams> out;
  for (int i = 0; i < k; ++i) out.push_back(random_class(p, q, rng));
  return out;
}

/// Row-stochastic matrix with entries bounded away from zero.
inline Matrix random_resp(Index n, int k, cggm::Rng& rng) {
  Matrix r = cggm::standard_normal(n, k, rng).array().abs() + 0.1;
  for (Index i = 0; i < n; ++i) r.row(i) /= r.row(i).sum();
  return r;
}

}  // namespace fixture
