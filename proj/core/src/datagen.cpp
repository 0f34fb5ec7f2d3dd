#include "cggm/datagen.hpp"

#include "cggm/model.hpp"

#include <algorithm>
#include <random>
#include <utility>

namespace cggm {

namespace {

double draw_magnitude(MagnitudeRange range, Rng& rng) {
  std::uniform_real_distribution<double> mag(range.lo, range.hi);
  std::bernoulli_distribution sign(0.5);
  const double v = mag(rng);
  return sign(rng) ? v : -v;
}

void check_range(MagnitudeRange r) {
  if (!(r.lo > 0.0) || !(r.hi >= r.lo)) throw InvalidArgument("magnitude range must satisfy 0 < lo <= hi");
}

}  // namespace

void ToyConfig::validate() const {
  if (n < 1) throw InvalidArgument("toy n must be positive");
  if (beta1 == beta2) throw InvalidArgument("toy scenario needs beta1 != beta2");
  ClassParams::make(Matrix(lambda1), Matrix::Zero(1, 2));
  ClassParams::make(Matrix(lambda2), Matrix::Zero(1, 2));
}

void HighDimConfig::validate() const {
  if (n < 1 || p < 1 || q < 2 || k < 1) throw InvalidArgument("highdim needs n, p, k >= 1 and q >= 2");
  if (static_cast<int>(lambda_offdiag_counts.size()) != k ||
      static_cast<int>(theta_counts.size()) != k) {
    throw InvalidArgument("highdim needs one sparsity count per class");
  }
  const int forced = std::min(p, q - 1);
  for (int c : lambda_offdiag_counts) {
    if (c < 0 || c > p * (p - 1) / 2) throw InvalidArgument("infeasible precision support size");
  }
  const int free_rows = intercept_effects ? q : q - 1;
  for (int c : theta_counts) {
    if (c < forced || c > p * free_rows) throw InvalidArgument("infeasible transition support size");
  }
  check_range(lambda_magnitude);
  check_range(theta_magnitude);
}

Matrix gen_sparse_spd_precision(Index p, int offdiag_pairs, MagnitudeRange range, Rng& rng) {
  if (p < 1) throw InvalidArgument("p must be positive");
  if (offdiag_pairs < 0 || offdiag_pairs > p * (p - 1) / 2) {
    throw InvalidArgument("requested off-diagonal support does not fit in p x p");
  }
  check_range(range);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  std::shuffle(pairs.begin(), pairs.end(), rng);

  Matrix lambda = Matrix::Zero(p, p);
  for (int s = 0; s < offdiag_pairs; ++s) {
    const auto [i, j] = pairs[static_cast<std::size_t>(s)];
    const double v = draw_magnitude(range, rng);
    lambda(i, j) = v;
    lambda(j, i) = v;
  }
  for (Index i = 0; i < p; ++i) lambda(i, i) = 1.1 + lambda.row(i).cwiseAbs().sum();
  return lambda;
}

Matrix gen_sparse_spd_precision(Index p, int offdiag_pairs, MagnitudeRange range,
                                std::uint64_t seed) {
  Rng rng(seed);
  return gen_sparse_spd_precision(p, offdiag_pairs, range, rng);
}

SyntheticData gen_toy_2d(const ToyConfig& cfg) {
  cfg.validate();
  const std::array<Eigen::Vector2d, 2> betas{cfg.beta1, cfg.beta2};
  const std::array<Matrix, 2> lambdas{Matrix(cfg.lambda1), Matrix(cfg.lambda2)};

  std::vector<ClassParams> classes;
  std::array<Matrix, 2> noise_factor;
  for (int k = 0; k < 2; ++k) {
    // -lambda^{-1} theta^T x = beta x  <=>  theta = -(lambda beta)^T.
    Matrix theta = -(lambdas[k] * betas[k]).transpose();
    classes.push_back(ClassParams::make(lambdas[k], std::move(theta)));
    const Matrix cov = lambdas[k].inverse();
    noise_factor[k] = cholesky_or_throw(0.5 * (cov + cov.transpose()), "toy covariance").matrixL();
  }

  Rng rng(cfg.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix y(cfg.n, 2);
  Matrix x(cfg.n, 1);
  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    const double xi = coin(rng) ? 1.0 : -1.0;
    const int z = coin(rng) ? 1 : 0;
    const Eigen::Vector2d eps(normal(rng), normal(rng));
    x(i, 0) = xi;
    labels[static_cast<std::size_t>(i)] = z;
    y.row(i) = (betas[z] * xi + noise_factor[z] * eps).transpose();
  }
  return SyntheticData{Dataset::make(std::move(y), std::move(x)), std::move(labels),
                       MixtureParams::make(std::move(classes), Vector::Constant(2, 0.5))};
}

SyntheticData gen_highdim(const HighDimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int forced = std::min(cfg.p, cfg.q - 1);

  std::vector<ClassParams> classes;
  for (int k = 0; k < cfg.k; ++k) {
    Matrix lambda = gen_sparse_spd_precision(cfg.p, cfg.lambda_offdiag_counts[static_cast<std::size_t>(k)], cfg.lambda_magnitude, rng);
    Matrix theta = Matrix::Zero(cfg.q, cfg.p);
    std::vector<std::pair<Index, Index>> free;
    for (Index i = 0; i < cfg.q; ++i) {
      for (Index j = 0; j < cfg.p; ++j) {
        if (!cfg.intercept_effects && i == cfg.q - 1) continue;
        if (i == j && i < forced) {
          theta(i, j) = draw_magnitude(cfg.theta_magnitude, rng);
        } else {
          free.emplace_back(i, j);
        }
      }
    }
    std::shuffle(free.begin(), free.end(), rng);
    const int extra = cfg.theta_counts[static_cast<std::size_t>(k)] - forced;
    for (int s = 0; s < extra; ++s) {
      const auto [i, j] = free[static_cast<std::size_t>(s)];
      theta(i, j) = draw_magnitude(cfg.theta_magnitude, rng);
    }
    classes.push_back(ClassParams::make(std::move(lambda), std::move(theta)));
  }
  auto truth = MixtureParams::make(std::move(classes), Vector::Constant(cfg.k, 1.0 / cfg.k));

  Matrix x(cfg.n, cfg.q);
  x.leftCols(cfg.q - 1) = rademacher(cfg.n, cfg.q - 1, rng);
  x.col(cfg.q - 1).setOnes();
  auto sample = sample_mixture(truth, x, rng());
  return SyntheticData{Dataset::make(std::move(sample.y), std::move(x)), std::move(sample.labels),
                       std::move(truth)};
}

}  // namespace cggm
