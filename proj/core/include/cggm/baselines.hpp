#pragma once

#include "cggm/em.hpp"
#include "cggm/types.hpp"

namespace cggm {

/// Ordinary least squares of Y on X over the whole dataset.
struct OlsFit {
  Matrix beta_hat;   // q x p
  Matrix residuals;  // n x p, Y - X beta_hat
};

/// Column-pivoted QR solve. Throws InvalidArgument when X is rank deficient.
OlsFit ols_fit(const Matrix& x, const Matrix& y);

/// (Y, column of ones): the plain Gaussian mixture as a conditional model whose
/// class means are -lambda_k^{-1} theta_k^T.
Dataset intercept_only(const Matrix& y);

/// Gaussian mixture EM on Y alone. Means live in theta and are never
/// penalised; the precision penalty applies as configured.
FitResult ggm_mixture_fit(const Matrix& y, int k, const EMConfig& cfg);

struct ResidualFit {
  FitResult fit;  // mixture on the OLS residuals, intercept-only co-features
  OlsFit ols;
};

/// OLS of Y on X, then the Gaussian mixture EM on the residuals.
ResidualFit residual_ggm_mixture_fit(const Dataset& data, int k, const EMConfig& cfg);

/// X with a trailing column of ones.
Matrix append_ones(const Matrix& x);

/// The residual model Y | X, k ~ N(beta_hat^T x + mu_k, lambda_k^{-1}) written
/// as a conditional mixture over the co-features append_ones(X).
MixtureParams residual_model_as_conditional(const ResidualFit& fit);

}  // namespace cggm
