#include "cggm/m_step.hpp"

#include "cggm/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cggm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sizes(std::span<const ClassParams> params, const SufficientStats& stats) {
  if (params.empty()) throw InvalidArgument("M-step needs at least one class");
  if (static_cast<Index>(params.size()) != stats.k()) {
    throw DimensionError("parameter and statistics class counts differ");
  }
  const Index p = params.front().p();
  const Index q = params.front().q();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& c = params[k];
    const auto& s = stats.classes[k];
    if (c.p() != p || c.q() != q || c.theta.cols() != p) {
      throw DimensionError("classes disagree on (p, q)");
    }
    if (s.s_yy.rows() != p || s.s_yy.cols() != p || s.s_yx.rows() != p || s.s_yx.cols() != q ||
        s.s_xx.rows() != q || s.s_xx.cols() != q) {
      throw DimensionError("sufficient statistics do not match parameter shapes");
    }
  }
}

// Terms of g for one class, given its Cholesky factor.
double class_objective(const ClassParams& c, const ClassStats& s, double n,
                       const Eigen::LLT<Matrix>& llt) {
  const Matrix whitened = llt.matrixL().solve(c.theta.transpose());  // L^{-1} theta^T
  const double log_det = log_det_from_cholesky(llt);
  const double quad_yy = c.lambda.cwiseProduct(s.s_yy).sum();
  const double cross = c.theta.cwiseProduct(s.s_yx.transpose()).sum();
  const double quad_xx = (whitened * s.s_xx).cwiseProduct(whitened).sum();
  return -(s.n_k / n) * log_det + quad_yy + 2.0 * cross + quad_xx;
}

double dot(std::span<const ClassParams> a, std::span<const ClassGradient> g,
           std::span<const ClassParams> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    total += g[k].grad_lambda.cwiseProduct(b[k].lambda - a[k].lambda).sum();
    total += g[k].grad_theta.cwiseProduct(b[k].theta - a[k].theta).sum();
  }
  return total;
}

double squared_distance(std::span<const ClassParams> a, std::span<const ClassParams> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    total += (b[k].lambda - a[k].lambda).squaredNorm();
    total += (b[k].theta - a[k].theta).squaredNorm();
  }
  return total;
}

}  // namespace

void SufficientStats::validate(Index p, Index q) const {
  if (!(n > 0.0)) throw InvalidArgument("sufficient statistics need n > 0");
  double total = 0.0;
  for (const auto& c : classes) {
    if (c.n_k < 0.0) throw InvalidArgument("negative class count");
    if (c.s_yy.rows() != p || c.s_yy.cols() != p || c.s_yx.rows() != p || c.s_yx.cols() != q ||
        c.s_xx.rows() != q || c.s_xx.cols() != q) {
      throw DimensionError("sufficient statistics have wrong shapes");
    }
    total += c.n_k;
  }
  if (std::abs(total - n) > 1e-8 * std::max(1.0, n)) {
    throw InvalidArgument("class counts do not sum to n");
  }
}

void ProxConfig::validate() const {
  if (!(alpha0 > 0.0)) throw InvalidArgument("alpha0 must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (!(grad_tol > 0.0) || !(obj_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (max_backtracks < 1) throw InvalidArgument("max_backtracks must be positive");
}

double smooth_objective(std::span<const ClassParams> params, const SufficientStats& stats) {
  check_sizes(params, stats);
  double total = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto llt = try_cholesky(params[k].lambda);
    if (!llt) return kInf;
    total += class_objective(params[k], stats.classes[k], stats.n, *llt);
  }
  return std::isfinite(total) ? total : kInf;
}

std::vector<ClassGradient> smooth_gradient(std::span<const ClassParams> params,
                                           const SufficientStats& stats) {
  check_sizes(params, stats);
  std::vector<ClassGradient> out;
  out.reserve(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& c = params[k];
    const auto& s = stats.classes[k];
    const Index p = c.p();
    const auto llt = cholesky_or_throw(c.lambda, "lambda");
    const Matrix inv = llt.solve(Matrix::Identity(p, p));
    const Matrix b = c.theta * inv;  // theta lambda^{-1}, q x p
    Matrix g_lambda = -(s.n_k / stats.n) * inv + s.s_yy - b.transpose() * s.s_xx * b;
    g_lambda = 0.5 * (g_lambda + g_lambda.transpose()).eval();
    Matrix g_theta = 2.0 * s.s_yx.transpose() + 2.0 * s.s_xx * b;
    out.push_back({std::move(g_lambda), std::move(g_theta)});
  }
  return out;
}

double m_step_objective(std::span<const ClassParams> params, const SufficientStats& stats,
                        const PenaltyConfig& pen) {
  const double g = smooth_objective(params, stats);
  if (!std::isfinite(g)) return g;
  return g + ggl_penalty(params, pen);
}

MStepResult solve_m_step(std::span<const ClassParams> init, const SufficientStats& stats,
                         const PenaltyConfig& pen, const ProxConfig& cfg) {
  cfg.validate();
  pen.validate();
  check_sizes(init, stats);
  stats.validate(init.front().p(), init.front().q());

  MStepResult result;
  result.classes.assign(init.begin(), init.end());
  for (auto& c : result.classes) c.lambda = 0.5 * (c.lambda + c.lambda.transpose()).eval();

  double g_cur = smooth_objective(result.classes, stats);
  if (!std::isfinite(g_cur)) throw NotPositiveDefinite("M-step initial precision is not PD");
  double f_cur = g_cur + ggl_penalty(result.classes, pen);
  result.objective_trace.push_back(f_cur);

  const std::size_t kk = result.classes.size();
  std::vector<ClassParams> cand(result.classes);
  std::vector<Matrix> lambdas(kk);
  std::vector<Matrix> thetas(kk);

  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto grads = smooth_gradient(result.classes, stats);

    double alpha = cfg.alpha0;
    bool accepted = false;
    bool any_pd = false;
    double g_cand = kInf;
    double step_sq = 0.0;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt, alpha *= cfg.beta) {
      for (std::size_t k = 0; k < kk; ++k) {
        lambdas[k] = result.classes[k].lambda - alpha * grads[k].grad_lambda;
        thetas[k] = result.classes[k].theta - alpha * grads[k].grad_theta;
      }
      prox_ggl_in_place(lambdas, alpha, pen.lambda1_prec, pen.lambda2_prec,
                        ProxSupport::off_diagonal);
      prox_ggl_in_place(thetas, alpha, pen.lambda1_trans, pen.lambda2_trans);
      for (std::size_t k = 0; k < kk; ++k) {
        cand[k].lambda = 0.5 * (lambdas[k] + lambdas[k].transpose());
        cand[k].theta = thetas[k];
      }
      g_cand = smooth_objective(cand, stats);
      if (!std::isfinite(g_cand)) continue;
      any_pd = true;
      step_sq = squared_distance(result.classes, cand);
      const double model = g_cur + dot(result.classes, grads, cand) + step_sq / (2.0 * alpha);
      if (g_cand <= model) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_pd) {
        throw NumericalFailure("M-step: no positive definite step after " +
                               std::to_string(cfg.max_backtracks) + " backtracking steps");
      }
      // Sufficient decrease is unattainable at round-off level: stationary.
      result.converged = true;
      break;
    }

    const double f_new = g_cand + ggl_penalty(cand, pen);
    if (f_new > f_cur) {
      result.converged = true;
      break;
    }
    result.classes.swap(cand);
    result.iterations = it + 1;
    result.objective_trace.push_back(f_new);
    const double decrease = f_cur - f_new;
    g_cur = g_cand;
    f_cur = f_new;
    const double gen_grad_norm = std::sqrt(step_sq) / alpha;
    if (gen_grad_norm <= cfg.grad_tol || decrease <= cfg.obj_tol * std::max(1.0, std::abs(f_cur))) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace cggm
