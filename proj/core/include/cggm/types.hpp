#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cggm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Paired observations: features Y (n x p) and co-features X (n x q).
/// A constant all-ones column in X models an intercept.
struct Dataset {
  Matrix y;
  Matrix x;

  Index n() const { return y.rows(); }
  Index p() const { return y.cols(); }
  Index q() const { return x.cols(); }

  /// Validates row agreement, q >= 1 and finiteness.
  static Dataset make(Matrix y, Matrix x);
};

/// One component of a conditional Gaussian graphical model:
/// Y | X ~ N(-lambda^{-1} theta^T X, lambda^{-1}).
struct ClassParams {
  Matrix lambda;  // p x p precision
  Matrix theta;   // q x p transition

  Index p() const { return lambda.rows(); }
  Index q() const { return theta.rows(); }

  /// Symmetrises lambda (rejecting relative asymmetry above 1e-8) and checks
  /// positive definiteness through a Cholesky factorisation.
  static ClassParams make(Matrix lambda, Matrix theta);
};

struct MixtureParams {
  std::vector<ClassParams> classes;
  Vector weights;

  Index k() const { return static_cast<Index>(classes.size()); }
  Index p() const { return classes.empty() ? 0 : classes.front().p(); }
  Index q() const { return classes.empty() ? 0 : classes.front().q(); }

  static MixtureParams make(std::vector<ClassParams> classes, Vector weights);
  void validate() const;
};

/// Group graphical lasso weights: l1 and group-l2 terms for the precision
/// off-diagonals and for the transition matrices.
struct PenaltyConfig {
  double lambda1_prec = 0.0;
  double lambda2_prec = 0.0;
  double lambda1_trans = 0.0;
  double lambda2_trans = 0.0;

  void validate() const;
  bool is_zero() const {
    return lambda1_prec == 0.0 && lambda2_prec == 0.0 && lambda1_trans == 0.0 &&
           lambda2_trans == 0.0;
  }
};

/// Returns the factorisation, or nullopt when the matrix is not numerically PD.
std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& a);

/// Throws NotPositiveDefinite with `what` in the message on failure.
Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& a, const std::string& what);

/// Sum of log of the Cholesky diagonal, times two: ln det A.
double log_det_from_cholesky(const Eigen::LLT<Matrix>& llt);

bool all_finite(const Matrix& a);

}  // namespace cggm
