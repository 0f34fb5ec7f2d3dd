#pragma once

#include "cggm/types.hpp"

#include <cstdint>
#include <vector>

namespace cggm {

inline constexpr double kLog2Pi = 1.8378770664093454836;

/// The M-step minimises g + pen where g is twice the responsibility-weighted
/// negative log-likelihood. The observed objective that EM decreases is
/// therefore NLL + pen / 2, and every observed-scale objective applies this
/// factor to the group graphical lasso penalty.
inline constexpr double kObservedPenaltyScale = 0.5;

/// Factorised class density for repeated evaluation.
///
/// With lambda = L L^T the quadratic form of the conditional density is
/// |L^T y + L^{-1} theta^T x|^2, so every evaluation needs only products with
/// the Cholesky factor and the cached p x q matrix L^{-1} theta^T.
class ClassDensity {
 public:
  explicit ClassDensity(const ClassParams& params);

  double log_density(const Vector& y, const Vector& x) const;
  /// Log-density of every row of the dataset under this class.
  Vector log_density_rows(const Matrix& y, const Matrix& x) const;

  Vector conditional_mean(const Vector& x) const;
  /// Row i is the conditional mean for xs.row(i).
  Matrix conditional_means(const Matrix& xs) const;

  Index p() const { return p_; }
  Index q() const { return q_; }

 private:
  Index p_;
  Index q_;
  Eigen::LLT<Matrix> llt_;
  Matrix whitened_shift_;  // L^{-1} theta^T, p x q
  Matrix theta_t_;         // theta^T, p x q
  double log_norm_;        // ln det(lambda) / 2 - p ln(2 pi) / 2
};

double log_density_cggm(const Vector& y, const Vector& x, const ClassParams& params);

/// -lambda^{-1} theta^T x, via a Cholesky solve.
Vector conditional_mean(const Vector& x, const ClassParams& params);

/// n x K matrix of per-class log densities l_{ik}.
Matrix class_log_densities(const Dataset& data, const MixtureParams& params);

/// ln sum_k exp(v_k), skipping -inf entries; -inf if all are.
double log_sum_exp(const Eigen::Ref<const Vector>& v);

/// Per-row ln sum_k pi_k p_k(y_i | x_i).
Vector mixture_log_likelihood_rows(const Dataset& data, const MixtureParams& params);

/// -(1/n) sum_i ln sum_k pi_k p_k(y_i | x_i) + kObservedPenaltyScale * pen(theta).
double penalised_observed_neg_loglik(const Dataset& data, const MixtureParams& params,
                                     const PenaltyConfig& pen);

struct MixtureSample {
  Matrix y;                 // m x p
  std::vector<int> labels;  // 0-based class of each row
};

/// Draws z ~ Categorical(weights) then Y ~ N(mean(x, z), lambda_z^{-1}) for every
/// row of xs. Deterministic for a fixed seed.
MixtureSample sample_mixture(const MixtureParams& params, const Matrix& xs, std::uint64_t seed);

void check_dimensions(const Dataset& data, const MixtureParams& params);

}  // namespace cggm
