#include "cggm/penalty.hpp"

#include <cmath>

namespace cggm {

double soft_threshold(double x, double lam) {
  const double mag = std::abs(x) - lam;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

namespace {

void check_stack(std::span<const Matrix> stack) {
  for (const auto& m : stack) {
    if (m.rows() != stack.front().rows() || m.cols() != stack.front().cols()) {
      throw DimensionError("prox_ggl: stack matrices differ in shape");
    }
  }
}

// sum over positions of lam1 * sum_k |a_k| + lam2 * sqrt(sum_k a_k^2)
template <typename Get>
double group_penalty(Index rows, Index cols, std::size_t k, bool skip_diagonal, double lam1,
                     double lam2, Get get) {
  if (lam1 == 0.0 && lam2 == 0.0) return 0.0;
  double total = 0.0;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (skip_diagonal && i == j) continue;
      double abs_sum = 0.0;
      double sq_sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double v = get(c, i, j);
        abs_sum += std::abs(v);
        sq_sum += v * v;
      }
      total += lam1 * abs_sum + lam2 * std::sqrt(sq_sum);
    }
  }
  return total;
}

}  // namespace

double ggl_penalty(std::span<const ClassParams> classes, const PenaltyConfig& pen) {
  if (classes.empty()) return 0.0;
  const Index p = classes.front().p();
  const Index q = classes.front().q();
  for (const auto& c : classes) {
    if (c.p() != p || c.q() != q || c.theta.cols() != p) {
      throw DimensionError("ggl_penalty: classes disagree on (p, q)");
    }
  }
  const double prec = group_penalty(p, p, classes.size(), true, pen.lambda1_prec, pen.lambda2_prec,
                                    [&](std::size_t c, Index i, Index j) {
                                      return classes[c].lambda(i, j);
                                    });
  const double trans = group_penalty(q, p, classes.size(), false, pen.lambda1_trans,
                                     pen.lambda2_trans, [&](std::size_t c, Index i, Index j) {
                                       return classes[c].theta(i, j);
                                     });
  return prec + trans;
}

void prox_ggl_in_place(std::span<Matrix> stack, double alpha, double lam1, double lam2,
                       ProxSupport support) {
  if (!(alpha > 0.0)) throw InvalidArgument("prox_ggl: alpha must be positive");
  if (lam1 < 0.0 || lam2 < 0.0) throw InvalidArgument("prox_ggl: negative penalty weight");
  if (stack.empty()) return;
  check_stack(stack);
  if (lam1 == 0.0 && lam2 == 0.0) return;

  const double t1 = lam1 * alpha;
  const double t2 = lam2 * alpha;
  const Index rows = stack.front().rows();
  const Index cols = stack.front().cols();
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (support == ProxSupport::off_diagonal && i == j) continue;
      double norm_sq = 0.0;
      for (auto& m : stack) {
        m(i, j) = soft_threshold(m(i, j), t1);
        norm_sq += m(i, j) * m(i, j);
      }
      const double norm = std::sqrt(norm_sq);
      // The whole group vanishes when its norm is at most t2 (0/0 included).
      const double shrink = norm <= t2 ? 0.0 : 1.0 - t2 / norm;
      for (auto& m : stack) m(i, j) *= shrink;
    }
  }
}

std::vector<Matrix> prox_ggl(std::span<const Matrix> d_tilde, double alpha, double lam1,
                             double lam2, ProxSupport support) {
  std::vector<Matrix> out(d_tilde.begin(), d_tilde.end());
  prox_ggl_in_place(out, alpha, lam1, lam2, support);
  return out;
}

}  // namespace cggm
