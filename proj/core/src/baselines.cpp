#include "cggm/baselines.hpp"

#include <Eigen/QR>

namespace cggm {

OlsFit ols_fit(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw DimensionError("ols_fit: X and Y row counts differ");
  if (x.rows() < x.cols()) throw InvalidArgument("ols_fit: fewer rows than regressors");
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < x.cols()) throw InvalidArgument("ols_fit: X is rank deficient");
  OlsFit out;
  out.beta_hat = qr.solve(y);
  out.residuals = y - x * out.beta_hat;
  return out;
}

Dataset intercept_only(const Matrix& y) {
  return Dataset::make(y, Matrix::Ones(y.rows(), 1));
}

FitResult ggm_mixture_fit(const Matrix& y, int k, const EMConfig& cfg) {
  EMConfig ggm = cfg;
  ggm.pen.lambda1_trans = 0.0;
  ggm.pen.lambda2_trans = 0.0;
  return em_fit(intercept_only(y), k, ggm);
}

ResidualFit residual_ggm_mixture_fit(const Dataset& data, int k, const EMConfig& cfg) {
  ResidualFit out;
  out.ols = ols_fit(data.x, data.y);
  out.fit = ggm_mixture_fit(out.ols.residuals, k, cfg);
  return out;
}

Matrix append_ones(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out << x, Matrix::Ones(x.rows(), 1);
  return out;
}

MixtureParams residual_model_as_conditional(const ResidualFit& fit) {
  const auto& params = fit.fit.params;
  const Index q = fit.ols.beta_hat.rows();
  const Index p = fit.ols.beta_hat.cols();
  std::vector<ClassParams> classes;
  classes.reserve(params.classes.size());
  for (const auto& c : params.classes) {
    // Intercept-only class: theta^T 1 = -lambda mu, so the shifted mean
    // beta^T x + mu maps to theta' = -[beta; mu^T] lambda.
    Matrix stacked(q + 1, p);
    stacked.topRows(q) = -fit.ols.beta_hat * c.lambda;
    stacked.row(q) = c.theta.row(0);
    classes.push_back(ClassParams{c.lambda, std::move(stacked)});
  }
  return MixtureParams{std::move(classes), params.weights};
}

}  // namespace cggm
