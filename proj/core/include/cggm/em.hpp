#pragma once

#include "cggm/m_step.hpp"
#include "cggm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cggm {

/// n x K posterior class probabilities; rows sum to one.
struct Responsibilities {
  Matrix probs;

  Index n() const { return probs.rows(); }
  Index k() const { return probs.cols(); }
  /// argmax per row, ties toward the lowest class index.
  std::vector<int> hard_labels() const;
};

enum class InitMode { random, kmeans, labels };

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& s);

struct EMConfig {
  int max_iters = 300;
  double rel_tol = 1e-6;
  double min_resp_floor = 1e-10;
  ProxConfig prox;
  PenaltyConfig pen;
  std::uint64_t seed = 0;
  InitMode init = InitMode::random;

  void validate() const;
};

struct FitResult {
  MixtureParams params;
  MixtureParams initial;
  Responsibilities resp;
  std::vector<double> objective_trace;  // penalised observed objective, one entry per iterate
  std::vector<double> elapsed_s;        // seconds since the fit started, aligned with the trace
  int n_iters = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  bool degenerate_class = false;  // some weight below 1e-6 for 3 iterations, or at convergence

  double final_objective() const { return objective_trace.back(); }
};

Responsibilities e_step(const Dataset& data, const MixtureParams& params);

SufficientStats sufficient_stats(const Dataset& data, const Responsibilities& resp);

/// pi_k = n_k / n.
Vector update_weights(const SufficientStats& stats);

/// Lloyd's algorithm with k-means++ seeding: at most 100 iterations per run,
/// best within-cluster sum of squares over 10 runs; runs that leave a cluster
/// empty are discarded and redrawn.
std::vector<int> kmeans_init(const Matrix& y, int k, std::uint64_t seed);

/// Theta entries i.i.d. N(0, 0.1^2); lambda = I + A A^T / p with A entries
/// N(0, 0.1^2); uniform weights. Precisions are drawn before transitions, so
/// two calls that differ only in q share their precision stack.
MixtureParams random_init_params(Index p, Index q, int k, std::uint64_t seed);

/// One unpenalised M-step from one-hot responsibilities (floored at
/// `resp_floor`). Throws InvalidArgument when a class has fewer than two members.
MixtureParams label_init_params(const Dataset& data, const std::vector<int>& labels, int k,
                                double resp_floor, const ProxConfig& prox = {});

/// Unpenalised conditional maximum likelihood for one class:
/// lambda^{-1} = Syy - Syx Sxx^{-1} Syx^T, theta = -Sxx^{-1} Syx^T lambda on
/// the class-averaged moments. Empty when those moments are singular.
std::optional<ClassParams> conditional_mle(const ClassStats& stats, double n);

/// Builds the initial parameters selected by cfg.init. `labels` is required
/// for InitMode::labels.
MixtureParams init_params(const Dataset& data, int k, const EMConfig& cfg,
                          const std::vector<int>* labels = nullptr);

/// Penalised EM for the mixture of conditional Gaussian graphical models.
FitResult em_fit(const Dataset& data, int k, const EMConfig& cfg,
                 const std::vector<int>* labels = nullptr);

/// EM from explicit initial parameters.
FitResult em_fit_from(const Dataset& data, const MixtureParams& init, const EMConfig& cfg);

}  // namespace cggm
