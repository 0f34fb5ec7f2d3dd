#include "cggm/types.hpp"

#include <cmath>
#include <sstream>

namespace cggm {

namespace {

constexpr double kAsymmetryTolerance = 1e-8;
constexpr double kWeightSumTolerance = 1e-12;

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

bool all_finite(const Matrix& a) { return a.allFinite(); }

std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0 || !a.allFinite()) return std::nullopt;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  // LLT does not flag tiny or non-finite pivots on its own.
  const auto diag = llt.matrixLLT().diagonal();
  if (!diag.allFinite() || (diag.array() <= 0.0).any()) return std::nullopt;
  return llt;
}

Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& a, const std::string& what) {
  auto llt = try_cholesky(a);
  if (!llt) throw NotPositiveDefinite(what + ": matrix is not positive definite");
  return std::move(*llt);
}

double log_det_from_cholesky(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Dataset Dataset::make(Matrix y, Matrix x) {
  if (y.rows() != x.rows()) {
    throw DimensionError("Y has " + std::to_string(y.rows()) + " rows but X has " +
                         std::to_string(x.rows()));
  }
  if (y.rows() == 0 || y.cols() == 0) throw DimensionError("Y must be non-empty");
  if (x.cols() == 0) throw DimensionError("X needs at least one column");
  if (!y.allFinite() || !x.allFinite()) throw InvalidArgument("dataset has non-finite entries");
  return Dataset{std::move(y), std::move(x)};
}

ClassParams ClassParams::make(Matrix lambda, Matrix theta) {
  if (lambda.rows() != lambda.cols() || lambda.rows() == 0) {
    throw DimensionError("lambda must be square and non-empty, got " + shape(lambda));
  }
  if (theta.cols() != lambda.rows() || theta.rows() == 0) {
    throw DimensionError("theta must be q x " + std::to_string(lambda.rows()) + ", got " +
                         shape(theta));
  }
  if (!lambda.allFinite() || !theta.allFinite()) {
    throw InvalidArgument("class parameters have non-finite entries");
  }
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const double asym = (lambda - lambda.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTolerance * scale) {
    throw InvalidArgument("lambda is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  Matrix sym = 0.5 * (lambda + lambda.transpose());
  cholesky_or_throw(sym, "lambda");
  return ClassParams{std::move(sym), std::move(theta)};
}

MixtureParams MixtureParams::make(std::vector<ClassParams> classes, Vector weights) {
  MixtureParams m{std::move(classes), std::move(weights)};
  m.validate();
  return m;
}

void MixtureParams::validate() const {
  if (classes.empty()) throw InvalidArgument("mixture needs at least one class");
  if (weights.size() != k()) {
    throw DimensionError("weights has " + std::to_string(weights.size()) + " entries for " +
                         std::to_string(k()) + " classes");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw InvalidArgument("weights must be finite and nonnegative");
  }
  if (std::abs(weights.sum() - 1.0) > kWeightSumTolerance * std::max<double>(1.0, k())) {
    throw InvalidArgument("weights must sum to one");
  }
  const Index p0 = p();
  const Index q0 = q();
  for (const auto& c : classes) {
    if (c.p() != p0 || c.q() != q0 || c.lambda.cols() != p0 || c.theta.cols() != p0) {
      throw DimensionError("classes disagree on (p, q)");
    }
    if (!c.lambda.allFinite() || !c.theta.allFinite()) {
      throw InvalidArgument("class parameters have non-finite entries");
    }
    const double scale = std::max(1.0, c.lambda.cwiseAbs().maxCoeff());
    if ((c.lambda - c.lambda.transpose()).cwiseAbs().maxCoeff() > kAsymmetryTolerance * scale) {
      throw InvalidArgument("lambda is not symmetric");
    }
    cholesky_or_throw(c.lambda, "lambda");
  }
}

void PenaltyConfig::validate() const {
  for (double v : {lambda1_prec, lambda2_prec, lambda1_trans, lambda2_trans}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("penalty weights must be finite and nonnegative");
    }
  }
}

}  // namespace cggm
