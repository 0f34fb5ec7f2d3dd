#pragma once

#include "cggm/types.hpp"

#include <span>
#include <vector>

namespace cggm {

/// Responsibility-weighted moments of one class. The moment matrices carry the
/// 1/n normalisation; n_k does not.
struct ClassStats {
  double n_k = 0.0;
  Matrix s_yy;  // p x p
  Matrix s_yx;  // p x q
  Matrix s_xx;  // q x q
};

struct SufficientStats {
  double n = 0.0;
  std::vector<ClassStats> classes;

  Index k() const { return static_cast<Index>(classes.size()); }
  void validate(Index p, Index q) const;
};

struct ProxConfig {
  double alpha0 = 1.0;
  double beta = 0.5;
  int max_iters = 500;
  double grad_tol = 1e-6;
  double obj_tol = 1e-10;
  int max_backtracks = 60;

  void validate() const;
};

/// g(theta) = sum_k [ -(n_k/n) ln det L_k + <L_k, S_YY> + 2 tr(T_k S_YX)
///                     + tr(T_k L_k^{-1} T_k^T S_XX) ]
/// with L_k the precision and T_k the transition of class k. Returns +inf when
/// any precision is not positive definite.
double smooth_objective(std::span<const ClassParams> params, const SufficientStats& stats);

struct ClassGradient {
  Matrix grad_lambda;  // p x p, symmetric
  Matrix grad_theta;   // q x p
};

std::vector<ClassGradient> smooth_gradient(std::span<const ClassParams> params,
                                           const SufficientStats& stats);

/// smooth_objective + ggl_penalty.
double m_step_objective(std::span<const ClassParams> params, const SufficientStats& stats,
                        const PenaltyConfig& pen);

struct MStepResult {
  std::vector<ClassParams> classes;
  std::vector<double> objective_trace;  // f at the start and after every accepted step
  int iterations = 0;
  bool converged = false;
};

/// Proximal gradient descent on g + pen with backtracking line search.
///
/// Each iteration restarts at alpha0 and shrinks by beta until the candidate
/// prox step keeps every precision positive definite and satisfies the
/// sufficient-decrease condition on g. The prox acts on precision
/// off-diagonals and on every transition entry; precision diagonals take a
/// plain gradient step. Throws NumericalFailure when no backtracking step
/// yields positive definite precisions.
MStepResult solve_m_step(std::span<const ClassParams> init, const SufficientStats& stats,
                         const PenaltyConfig& pen, const ProxConfig& cfg);

}  // namespace cggm
