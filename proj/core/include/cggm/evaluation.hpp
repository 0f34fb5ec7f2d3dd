#pragma once

#include "cggm/em.hpp"
#include "cggm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cggm {

/// permutation[j] is the true class matched to predicted class j.
struct LabelMatching {
  std::vector<int> permutation;
  double soft_error = 0.0;
  double hard_error = 0.0;
};

/// Label-matched misclassification. Exhaustive search over the K! relabelings
/// (K <= 10) for the one minimising the hard error (ties broken by soft error,
/// then lexicographically); both errors are reported under that permutation.
///   soft = (1/2n) sum_{i,k} |1{z_i = k} - P(z_i = k)|
///   hard = (1/2n) sum_{i,k} |1{z_i = k} - 1{argmax_i = k}|
LabelMatching misclassification(const std::vector<int>& true_labels, const Responsibilities& resp);

/// KL(N(0, lam_true^{-1}) || N(0, lam_est^{-1})).
double kl_gaussian_precision(const Matrix& lam_true, const Matrix& lam_est);

/// Squared Frobenius norm of a - b.
double frobenius_error(const Matrix& a, const Matrix& b);

/// Generative fit: draws m synthetic (x, y) pairs from the fitted mixture with
/// x resampled from the observed co-features, and returns each synthetic y's
/// Euclidean distance to its nearest observed y.
std::vector<double> abc_like_metric(const Dataset& real, const MixtureParams& fitted, Index m,
                                    std::uint64_t seed);

/// The m synthetic feature vectors abc_like_metric scores.
Matrix abc_synthetic_draws(const Dataset& real, const MixtureParams& fitted, Index m,
                           std::uint64_t seed);

/// Euclidean distance from each synthetic row to its nearest row of real_y
/// (exhaustive search).
std::vector<double> nearest_neighbour_distances(const Matrix& synthetic, const Matrix& real_y);

/// K (p(p+1)/2 + q p).
std::int64_t degrees_of_freedom(std::int64_t k, std::int64_t p, std::int64_t q);

enum class Criterion { aic, bic, aicc };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

/// df for AIC, df ln(n) / 2 for BIC, df + df (df + 1) / (n - df - 1) for AICc.
double criterion_penalty(Criterion c, std::int64_t df, Index n);

/// -sum_i ln sum_k pi_k p_k(y_i | x_i) + n * kObservedPenaltyScale * pen + crit(df, n).
double selection_loss(const Dataset& data, const MixtureParams& params, const PenaltyConfig& pen,
                      Criterion criterion);
double selection_loss(const Dataset& data, const FitResult& fit, const PenaltyConfig& pen,
                      Criterion criterion);

struct SelectKRow {
  int k = 0;
  double loss = 0.0;
  double objective = 0.0;  // best penalised observed objective over restarts
  int best_restart = 0;
  bool degenerate = false;
};

struct SelectKResult {
  int chosen_k = 0;
  std::vector<SelectKRow> table;
};

/// Fits every K in the grid (best of `restarts` runs by final objective, each
/// with its own derived seed) and returns the minimiser of selection_loss.
SelectKResult select_k(const Dataset& data, const std::vector<int>& k_grid, const EMConfig& cfg,
                       Criterion criterion, int restarts = 1);

}  // namespace cggm
