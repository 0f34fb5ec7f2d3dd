#include "cggm/model.hpp"

#include "cggm/penalty.hpp"
#include "cggm/random.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace cggm {

ClassDensity::ClassDensity(const ClassParams& params)
    : p_(params.p()),
      q_(params.q()),
      llt_(cholesky_or_throw(params.lambda, "lambda")),
      theta_t_(params.theta.transpose()) {
  if (params.theta.cols() != p_) throw DimensionError("theta must have p columns");
  whitened_shift_ = llt_.matrixL().solve(theta_t_);
  log_norm_ = 0.5 * log_det_from_cholesky(llt_) - 0.5 * static_cast<double>(p_) * kLog2Pi;
}

double ClassDensity::log_density(const Vector& y, const Vector& x) const {
  if (y.size() != p_ || x.size() != q_) throw DimensionError("log_density: y or x has wrong size");
  const Vector w = llt_.matrixU() * y + whitened_shift_ * x;
  return log_norm_ - 0.5 * w.squaredNorm();
}

Vector ClassDensity::log_density_rows(const Matrix& y, const Matrix& x) const {
  if (y.cols() != p_ || x.cols() != q_ || y.rows() != x.rows()) {
    throw DimensionError("log_density_rows: data does not match class dimensions");
  }
  Matrix w = y * llt_.matrixL();
  w.noalias() += x * whitened_shift_.transpose();
  return (log_norm_ - 0.5 * w.rowwise().squaredNorm().array()).matrix();
}

Vector ClassDensity::conditional_mean(const Vector& x) const {
  if (x.size() != q_) throw DimensionError("conditional_mean: x has wrong size");
  return -llt_.solve(theta_t_ * x);
}

Matrix ClassDensity::conditional_means(const Matrix& xs) const {
  if (xs.cols() != q_) throw DimensionError("conditional_means: xs has wrong width");
  Matrix rhs = theta_t_ * xs.transpose();
  return -llt_.solve(rhs).transpose();
}

double log_density_cggm(const Vector& y, const Vector& x, const ClassParams& params) {
  return ClassDensity(params).log_density(y, x);
}

Vector conditional_mean(const Vector& x, const ClassParams& params) {
  return ClassDensity(params).conditional_mean(x);
}

void check_dimensions(const Dataset& data, const MixtureParams& params) {
  if (data.p() != params.p() || data.q() != params.q()) {
    throw DimensionError("dataset is " + std::to_string(data.p()) + "/" +
                         std::to_string(data.q()) + " (p/q) but parameters are " +
                         std::to_string(params.p()) + "/" + std::to_string(params.q()));
  }
  if (params.weights.size() != params.k()) throw DimensionError("weights size != K");
}

Matrix class_log_densities(const Dataset& data, const MixtureParams& params) {
  check_dimensions(data, params);
  Matrix out(data.n(), params.k());
  for (Index k = 0; k < params.k(); ++k) {
    out.col(k) = ClassDensity(params.classes[k]).log_density_rows(data.y, data.x);
  }
  return out;
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double m = v.size() == 0 ? -std::numeric_limits<double>::infinity() : v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Vector mixture_log_likelihood_rows(const Dataset& data, const MixtureParams& params) {
  Matrix joint = class_log_densities(data, params);
  for (Index k = 0; k < params.k(); ++k) {
    const double w = params.weights[k];
    // Zero-weight classes drop out of the sum.
    const double lw = w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
    joint.col(k).array() += lw;
  }
  Vector out(data.n());
  for (Index i = 0; i < data.n(); ++i) out[i] = log_sum_exp(joint.row(i).transpose());
  return out;
}

double penalised_observed_neg_loglik(const Dataset& data, const MixtureParams& params,
                                     const PenaltyConfig& pen) {
  const Vector ll = mixture_log_likelihood_rows(data, params);
  double value = -ll.mean();
  if (!pen.is_zero()) value += kObservedPenaltyScale * ggl_penalty(params.classes, pen);
  return value;
}

MixtureSample sample_mixture(const MixtureParams& params, const Matrix& xs, std::uint64_t seed) {
  params.validate();
  if (xs.cols() != params.q()) throw DimensionError("sample_mixture: xs has wrong width");
  const Index p = params.p();
  const Index kk = params.k();

  std::vector<ClassDensity> densities;
  std::vector<Matrix> cov_factors;
  densities.reserve(kk);
  cov_factors.reserve(kk);
  for (const auto& c : params.classes) {
    densities.emplace_back(c);
    const Matrix cov = cholesky_or_throw(c.lambda, "lambda").solve(Matrix::Identity(p, p));
    const Matrix sym = 0.5 * (cov + cov.transpose());
    cov_factors.emplace_back(cholesky_or_throw(sym, "covariance").matrixL());
  }

  Rng rng(seed);
  std::discrete_distribution<int> pick(params.weights.data(), params.weights.data() + kk);
  std::normal_distribution<double> normal(0.0, 1.0);

  MixtureSample out{Matrix(xs.rows(), p), std::vector<int>(static_cast<size_t>(xs.rows()))};
  Vector eps(p);
  for (Index i = 0; i < xs.rows(); ++i) {
    const int z = pick(rng);
    for (Index j = 0; j < p; ++j) eps[j] = normal(rng);
    out.labels[static_cast<size_t>(i)] = z;
    out.y.row(i) = (densities[z].conditional_mean(xs.row(i).transpose()) + cov_factors[z] * eps)
                       .transpose();
  }
  return out;
}

}  // namespace cggm
