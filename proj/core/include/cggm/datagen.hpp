#pragma once

#include "cggm/random.hpp"
#include "cggm/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace cggm {

struct SyntheticData {
  Dataset data;
  std::vector<int> labels;  // true 0-based classes
  MixtureParams truth;
};

struct MagnitudeRange {
  double lo = 0.2;
  double hi = 0.6;
};

/// Two classes in the plane driven by one Rademacher co-feature:
/// Y = beta_z X + eps_z, eps_z ~ N(0, lambda_z^{-1}), P(z = 1) = P(z = 2) = 1/2.
struct ToyConfig {
  int n = 500;
  Eigen::Vector2d beta1 = Eigen::Vector2d(1.7677669529663687, 1.7677669529663687);
  Eigen::Vector2d beta2 = Eigen::Vector2d(-1.7677669529663687, -1.7677669529663687);
  Eigen::Matrix2d lambda1 = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  Eigen::Matrix2d lambda2 = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  std::uint64_t seed = 0;

  void validate() const;
};

/// Three balanced classes, p = 10 features, q = 5 co-features (four Rademacher
/// columns and a constant). Sparse precisions and transitions with the given
/// support sizes; every transition has nonzero (i, i) entries for i < 4.
struct HighDimConfig {
  int n = 100;
  int p = 10;
  int q = 5;
  int k = 3;
  std::uint64_t seed = 0;
  std::vector<int> lambda_offdiag_counts{7, 16, 2};
  std::vector<int> theta_counts{11, 14, 4};
  MagnitudeRange lambda_magnitude{0.2, 0.6};
  MagnitudeRange theta_magnitude{0.5, 1.5};
  /// Whether extra transition entries may fall on the constant co-feature row.
  bool intercept_effects = true;

  void validate() const;
};

/// Symmetric precision with exactly `offdiag_pairs` nonzero pairs above the
/// diagonal (uniformly chosen, magnitudes uniform on the range with a random
/// sign) and diagonal 1.1 + row-wise absolute off-diagonal sum.
Matrix gen_sparse_spd_precision(Index p, int offdiag_pairs, MagnitudeRange range, Rng& rng);
Matrix gen_sparse_spd_precision(Index p, int offdiag_pairs, MagnitudeRange range,
                                std::uint64_t seed);

SyntheticData gen_toy_2d(const ToyConfig& cfg);

SyntheticData gen_highdim(const HighDimConfig& cfg);

}  // namespace cggm
