#include "cggm/evaluation.hpp"

#include "cggm/model.hpp"
#include "cggm/penalty.hpp"
#include "cggm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cggm {

LabelMatching misclassification(const std::vector<int>& true_labels, const Responsibilities& resp) {
  const Index n = resp.n();
  const int k = static_cast<int>(resp.k());
  if (static_cast<Index>(true_labels.size()) != n) {
    throw DimensionError("misclassification: label count differs from responsibilities");
  }
  if (k < 1 || k > 10) throw InvalidArgument("misclassification supports 1 <= K <= 10");
  if (n == 0) throw InvalidArgument("misclassification needs samples");

  const auto predicted = resp.hard_labels();
  // confusion(j, c): predicted j with truth c. soft_cost(j, c): sum_i |1{z_i = c} - P_ij|.
  Matrix confusion = Matrix::Zero(k, k);
  Matrix soft_cost = Matrix::Zero(k, k);
  for (Index i = 0; i < n; ++i) {
    const int z = true_labels[static_cast<std::size_t>(i)];
    if (z < 0 || z >= k) throw InvalidArgument("true label out of range");
    confusion(predicted[static_cast<std::size_t>(i)], z) += 1.0;
    for (int j = 0; j < k; ++j) {
      for (int c = 0; c < k; ++c) soft_cost(j, c) += std::abs((z == c ? 1.0 : 0.0) - resp.probs(i, j));
    }
  }

  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  LabelMatching best;
  double best_correct = -1.0;
  double best_soft = std::numeric_limits<double>::infinity();
  do {
    double correct = 0.0;
    double soft = 0.0;
    for (int j = 0; j < k; ++j) {
      correct += confusion(j, perm[static_cast<std::size_t>(j)]);
      soft += soft_cost(j, perm[static_cast<std::size_t>(j)]);
    }
    if (correct > best_correct || (correct == best_correct && soft < best_soft)) {
      best_correct = correct;
      best_soft = soft;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double nn = static_cast<double>(n);
  best.hard_error = (nn - best_correct) / nn;
  best.soft_error = best_soft / (2.0 * nn);
  return best;
}

double kl_gaussian_precision(const Matrix& lam_true, const Matrix& lam_est) {
  if (lam_true.rows() != lam_est.rows() || lam_true.cols() != lam_est.cols()) {
    throw DimensionError("kl_gaussian_precision: shapes differ");
  }
  const auto llt_true = cholesky_or_throw(lam_true, "true precision");
  const auto llt_est = cholesky_or_throw(lam_est, "estimated precision");
  const Index p = lam_true.rows();
  const double trace = (lam_est * llt_true.solve(Matrix::Identity(p, p))).trace();
  const double kl = 0.5 * (trace - static_cast<double>(p) + log_det_from_cholesky(llt_true) -
                           log_det_from_cholesky(llt_est));
  return std::max(0.0, kl);
}

double frobenius_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("frobenius_error: shapes differ");
  }
  return (a - b).squaredNorm();
}

Matrix abc_synthetic_draws(const Dataset& real, const MixtureParams& fitted, Index m,
                           std::uint64_t seed) {
  if (real.n() == 0) throw InvalidArgument("abc_like_metric: empty real data");
  if (m < 1) throw InvalidArgument("abc_like_metric: m must be positive");
  check_dimensions(real, fitted);

  Rng rng(seed);
  std::uniform_int_distribution<Index> row(0, real.n() - 1);
  Matrix xs(m, real.q());
  for (Index i = 0; i < m; ++i) xs.row(i) = real.x.row(row(rng));
  return sample_mixture(fitted, xs, rng()).y;
}

std::vector<double> nearest_neighbour_distances(const Matrix& synthetic, const Matrix& real_y) {
  if (real_y.rows() == 0) throw InvalidArgument("nearest_neighbour_distances: empty real data");
  if (synthetic.cols() != real_y.cols()) throw DimensionError("nearest_neighbour_distances: widths differ");
  std::vector<double> out(static_cast<std::size_t>(synthetic.rows()));
  for (Index i = 0; i < synthetic.rows(); ++i) {
    const double d2 = (real_y.rowwise() - synthetic.row(i)).rowwise().squaredNorm().minCoeff();
    out[static_cast<std::size_t>(i)] = std::sqrt(d2);
  }
  return out;
}

std::vector<double> abc_like_metric(const Dataset& real, const MixtureParams& fitted, Index m,
                                    std::uint64_t seed) {
  return nearest_neighbour_distances(abc_synthetic_draws(real, fitted, m, seed), real.y);
}

std::int64_t degrees_of_freedom(std::int64_t k, std::int64_t p, std::int64_t q) {
  if (k < 1 || p < 1 || q < 1) throw InvalidArgument("degrees_of_freedom needs positive inputs");
  return k * (p * (p + 1) / 2 + q * p);
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::aic: return "AIC";
    case Criterion::bic: return "BIC";
    case Criterion::aicc: return "AICc";
  }
  return "BIC";
}

Criterion criterion_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "aic") return Criterion::aic;
  if (lower == "bic") return Criterion::bic;
  if (lower == "aicc") return Criterion::aicc;
  throw InvalidArgument("unknown criterion '" + s + "'");
}

double criterion_penalty(Criterion c, std::int64_t df, Index n) {
  const double d = static_cast<double>(df);
  const double nn = static_cast<double>(n);
  switch (c) {
    case Criterion::aic: return d;
    case Criterion::bic: return d * std::log(nn) / 2.0;
    case Criterion::aicc:
      if (nn <= d + 1.0) throw InvalidArgument("AICc needs n > df + 1");
      return d + d * (d + 1.0) / (nn - d - 1.0);
  }
  return d;
}

double selection_loss(const Dataset& data, const MixtureParams& params, const PenaltyConfig& pen,
                      Criterion criterion) {
  const auto df = degrees_of_freedom(params.k(), params.p(), params.q());
  const double penalty = criterion_penalty(criterion, df, data.n());
  const double nll = -mixture_log_likelihood_rows(data, params).sum();
  const double n = static_cast<double>(data.n());
  return nll + n * kObservedPenaltyScale * ggl_penalty(params.classes, pen) + penalty;
}

double selection_loss(const Dataset& data, const FitResult& fit, const PenaltyConfig& pen,
                      Criterion criterion) {
  return selection_loss(data, fit.params, pen, criterion);
}

SelectKResult select_k(const Dataset& data, const std::vector<int>& k_grid, const EMConfig& cfg,
                       Criterion criterion, int restarts) {
  if (k_grid.empty()) throw InvalidArgument("select_k needs a nonempty grid");
  if (restarts < 1) throw InvalidArgument("select_k needs at least one restart");
  SelectKResult out;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int k : k_grid) {
    SelectKRow row;
    row.k = k;
    row.objective = std::numeric_limits<double>::infinity();
    FitResult best_fit;
    for (int r = 0; r < restarts; ++r) {
      EMConfig run = cfg;
      run.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)});
      auto fit = em_fit(data, k, run);
      if (fit.final_objective() < row.objective) {
        row.objective = fit.final_objective();
        row.best_restart = r;
        best_fit = std::move(fit);
      }
    }
    row.degenerate = best_fit.degenerate_class;
    row.loss = selection_loss(data, best_fit, cfg.pen, criterion);
    if (row.loss < best_loss) {
      best_loss = row.loss;
      out.chosen_k = k;
    }
    out.table.push_back(row);
  }
  return out;
}

}  // namespace cggm
