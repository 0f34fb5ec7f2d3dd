#include "cggm/datagen.hpp"
#include "cggm/evaluation.hpp"
#include "cggm/model.hpp"
#include "cggm/random.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace cggm;

namespace {

Matrix one_hot(const std::vector<int>& labels, int k) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Index>(i), labels[i]) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("misclassification") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2, 0, 1};
  SUBCASE("perfect responsibilities") {
    const auto m = misclassification(truth, {one_hot(truth, 3)});
    CHECK(m.hard_error == 0.0);
    CHECK(m.soft_error == 0.0);
  }
  SUBCASE("uniform responsibilities on two balanced classes") {
    const std::vector<int> two{0, 1, 0, 1};
    CHECK(misclassification(two, {Matrix::Constant(4, 2, 0.5)}).soft_error == doctest::Approx(0.5));
  }
  SUBCASE("swapped labels are matched") {
    std::vector<int> swapped(truth);
    for (auto& z : swapped) z = (z + 1) % 3;
    const auto m = misclassification(truth, {one_hot(swapped, 3)});
    CHECK(m.hard_error == 0.0);
    CHECK(m.soft_error == 0.0);
    CHECK(m.permutation == std::vector<int>{2, 0, 1});
  }
  SUBCASE("invariant to permuting predicted classes") {
    Rng rng(81);
    const Matrix resp = fixture::random_resp(8, 3, rng);
    const auto a = misclassification(truth, {resp});
    Matrix permuted(8, 3);
    permuted << resp.col(2), resp.col(0), resp.col(1);
    const auto b = misclassification(truth, {permuted});
    CHECK(a.hard_error == b.hard_error);
    CHECK(a.soft_error == doctest::Approx(b.soft_error).epsilon(1e-15));
  }
  SUBCASE("hand-computed example") {
    // Predicted argmax: 0, 1, 1, 1, 2, 0, 0, 1 -> two mistakes of eight.
    const std::vector<int> pred{0, 1, 1, 1, 2, 0, 0, 1};
    CHECK(misclassification(truth, {one_hot(pred, 3)}).hard_error == doctest::Approx(0.25));
  }
  SUBCASE("too many classes") {
    std::vector<int> labels(11);
    std::iota(labels.begin(), labels.end(), 0);
    CHECK_THROWS_AS(misclassification(labels, {one_hot(labels, 11)}), InvalidArgument);
  }
}

TEST_CASE("Gaussian KL divergence") {
  Rng rng(82);
  const Matrix a = fixture::random_spd(4, rng);
  CHECK(kl_gaussian_precision(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(kl_gaussian_precision(a, a)) < 1e-10);
  CHECK(kl_gaussian_precision(Matrix::Ones(1, 1), Matrix::Constant(1, 1, std::numbers::e)) ==
        doctest::Approx((std::numbers::e - 2.0) / 2.0).epsilon(1e-14));
  for (int rep = 0; rep < 20; ++rep) {
    CHECK(kl_gaussian_precision(fixture::random_spd(3, rng), fixture::random_spd(3, rng)) >= 0.0);
  }
  SUBCASE("agrees with a Monte Carlo estimate") {
    const Matrix t = fixture::random_spd(4, rng);
    const Matrix e = fixture::random_spd(4, rng);
    // Ten independent batches of 1e5 give both the estimate and its spread.
    const double kl = kl_gaussian_precision(t, e);
    std::vector<double> batches;
    for (std::uint64_t b = 0; b < 10; ++b) batches.push_back(oracle::monte_carlo_kl(t, e, 100000, 500 + b));
    const double mean = std::accumulate(batches.begin(), batches.end(), 0.0) / 10.0;
    double var = 0.0;
    for (double v : batches) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / 9.0 / 10.0);
    CHECK(std::abs(mean - kl) < 3.0 * se + 1e-12);
  }
  CHECK_THROWS_AS(kl_gaussian_precision(Matrix::Identity(2, 2), -Matrix::Identity(2, 2)), NotPositiveDefinite);
}

TEST_CASE("squared Frobenius error") {
  Rng rng(83);
  const Matrix a = standard_normal(3, 4, rng);
  const Matrix b = standard_normal(3, 4, rng);
  CHECK(frobenius_error(a, a) == 0.0);
  CHECK(frobenius_error(Matrix::Identity(3, 3), Matrix::Zero(3, 3)) == 3.0);
  double loop = 0.0;
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 4; ++j) loop += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  }
  CHECK(frobenius_error(a, b) == doctest::Approx(loop).epsilon(1e-14));
  CHECK_THROWS_AS(frobenius_error(a, b.transpose()), DimensionError);
}

TEST_CASE("ABC-like metric") {
  SUBCASE("point mass on a real point") {
    Rng rng(84);
    Matrix y = standard_normal(20, 2, rng);
    y.row(7) << 1.5, -2.0;
    Matrix theta(1, 2);
    theta << -1.5e8, 2.0e8;  // mean = -lambda^{-1} theta^T = (1.5, -2)
    const auto c = ClassParams::make(1e8 * Matrix::Identity(2, 2), theta);
    const auto d = abc_like_metric(Dataset::make(y, Matrix::Ones(20, 1)),
                                   MixtureParams::make({c}, Vector::Ones(1)), 50, 3);
    for (double v : d) CHECK(v < 1e-3);
  }
  SUBCASE("single real point at the origin") {
    Matrix theta(1, 2);
    theta << -3e12, -4e12;  // mean (3, 4)
    const auto c = ClassParams::make(1e12 * Matrix::Identity(2, 2), theta);
    const auto d = abc_like_metric(Dataset::make(Matrix::Zero(1, 2), Matrix::Ones(1, 1)),
                                   MixtureParams::make({c}, Vector::Ones(1)), 10, 4);
    for (double v : d) CHECK(v == doctest::Approx(5.0).epsilon(1e-5));
  }
  SUBCASE("nearest-neighbour search matches a double loop") {
    HighDimConfig cfg;
    const auto s = gen_highdim(cfg);
    const Matrix syn = abc_synthetic_draws(s.data, s.truth, 100, 8);
    const auto d = nearest_neighbour_distances(syn, s.data.y);
    const auto direct = abc_like_metric(s.data, s.truth, 100, 8);
    for (Index i = 0; i < syn.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < s.data.n(); ++j) {
        double acc = 0.0;
        for (Index c = 0; c < syn.cols(); ++c) acc += std::pow(syn(i, c) - s.data.y(j, c), 2);
        best = std::min(best, std::sqrt(acc));
      }
      CHECK(d[i] == doctest::Approx(best).epsilon(1e-12));
      CHECK(direct[i] == d[i]);
      CHECK(d[i] >= 0.0);
    }
  }
  SUBCASE("invariant under a joint rotation") {
    HighDimConfig cfg;
    const auto s = gen_highdim(cfg);
    Rng rng(85);
    const Matrix r = Eigen::HouseholderQR<Matrix>(standard_normal(10, 10, rng)).householderQ();
    const Matrix syn = abc_synthetic_draws(s.data, s.truth, 60, 9);
    const auto a = nearest_neighbour_distances(syn, s.data.y);
    const auto b = nearest_neighbour_distances(syn * r.transpose(), s.data.y * r.transpose());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
  }
}

TEST_CASE("degrees of freedom") {
  CHECK(degrees_of_freedom(3, 10, 5) == 315);
  CHECK(degrees_of_freedom(1, 1, 1) == 2);
  CHECK(degrees_of_freedom(2, 3, 2) == 24);
  for (int k = 1; k < 5; ++k) {
    for (int p = 1; p < 5; ++p) {
      for (int q = 1; q < 5; ++q) {
        const auto d = degrees_of_freedom(k, p, q);
        CHECK(degrees_of_freedom(k + 1, p, q) > d);
        CHECK(degrees_of_freedom(k, p + 1, q) > d);
        CHECK(degrees_of_freedom(k, p, q + 1) > d);
      }
    }
  }
}

TEST_CASE("selection loss") {
  Rng rng(86);
  const Dataset data = Dataset::make(standard_normal(100, 1, rng), Matrix::Ones(100, 1));
  const auto fit = em_fit(data, 1, {});
  const double aic = selection_loss(data, fit, {}, Criterion::aic);
  const double bic = selection_loss(data, fit, {}, Criterion::bic);
  const auto df = degrees_of_freedom(1, 1, 1);
  CHECK(aic - bic == doctest::Approx(df * (1.0 - std::log(100.0) / 2.0)).epsilon(1e-12));

  // Direct evaluation: the fitted normal has the sample mean and biased variance.
  const double mean = data.y.mean();
  const double var = (data.y.array() - mean).square().mean();
  const double nll = 100.0 * (0.5 * std::log(2.0 * std::numbers::pi * var) + 0.5);
  CHECK(bic == doctest::Approx(nll + df * std::log(100.0) / 2.0).epsilon(1e-6));
  const double aicc = selection_loss(data, fit, {}, Criterion::aicc);
  CHECK(aicc - aic == doctest::Approx(df * (df + 1.0) / (100.0 - df - 1.0)).epsilon(1e-12));

  const Dataset small = Dataset::make(standard_normal(3, 1, rng), Matrix::Ones(3, 1));
  CHECK_THROWS_AS(selection_loss(small, fit.params, {}, Criterion::aicc), InvalidArgument);
  CHECK(criterion_from_string("bic") == Criterion::bic);
  CHECK(criterion_from_string("AICc") == Criterion::aicc);
}

TEST_CASE("select K") {
  Rng rng(87);
  Matrix y = standard_normal(150, 2, rng);
  y.middleRows(50, 50).array() += 12.0;
  y.bottomRows(50).col(0).array() -= 12.0;
  const Dataset data = Dataset::make(y, Matrix::Ones(150, 1));
  EMConfig cfg;
  cfg.init = InitMode::kmeans;
  CHECK(select_k(data, {2}, cfg, Criterion::bic).chosen_k == 2);
  const auto sel = select_k(data, {1, 2, 3, 4}, cfg, Criterion::bic, 2);
  CHECK(sel.chosen_k == 3);
  CHECK(sel.table.size() == 4);
  CHECK_THROWS_AS(select_k(data, {}, cfg, Criterion::bic), InvalidArgument);
}
