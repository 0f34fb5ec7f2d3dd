#include "cggm/em.hpp"

#include "cggm/model.hpp"
#include "cggm/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cggm {

namespace {

constexpr int kKmeansRestarts = 10;
constexpr int kKmeansMaxIters = 100;
constexpr int kKmeansMaxAttempts = 1000;
constexpr double kInitScale = 0.1;
constexpr double kDegenerateFraction = 1e-6;
constexpr int kDegenerateStreak = 3;

Responsibilities floored(const Responsibilities& resp, double floor) {
  if (floor <= 0.0) return resp;
  Matrix probs = resp.probs.cwiseMax(floor);
  const Vector sums = probs.rowwise().sum();
  probs.array().colwise() /= sums.array();
  return Responsibilities{std::move(probs)};
}

Responsibilities one_hot(const std::vector<int>& labels, int k) {
  Matrix probs = Matrix::Zero(static_cast<Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw InvalidArgument("label out of range");
    probs(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return Responsibilities{std::move(probs)};
}

}  // namespace

std::vector<int> Responsibilities::hard_labels() const {
  std::vector<int> out(static_cast<std::size_t>(n()));
  for (Index i = 0; i < n(); ++i) {
    Index best = 0;
    for (Index k = 1; k < this->k(); ++k) {
      if (probs(i, k) > probs(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::random: return "random";
    case InitMode::kmeans: return "kmeans";
    case InitMode::labels: return "labels";
  }
  return "random";
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "random") return InitMode::random;
  if (s == "kmeans") return InitMode::kmeans;
  if (s == "labels" || s == "labels-provided") return InitMode::labels;
  throw InvalidArgument("unknown init mode '" + s + "'");
}

void EMConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("EM max_iters must be positive");
  if (!(rel_tol > 0.0)) throw InvalidArgument("EM rel_tol must be positive");
  if (!(min_resp_floor >= 0.0) || min_resp_floor > 1e-3) {
    throw InvalidArgument("min_resp_floor must lie in [0, 1e-3]");
  }
  prox.validate();
  pen.validate();
}

Responsibilities e_step(const Dataset& data, const MixtureParams& params) {
  Matrix log_joint = class_log_densities(data, params);
  for (Index k = 0; k < params.k(); ++k) {
    const double w = params.weights[k];
    log_joint.col(k).array() +=
        w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
  }
  Matrix probs(data.n(), params.k());
  for (Index i = 0; i < data.n(); ++i) {
    const double norm = log_sum_exp(log_joint.row(i).transpose());
    probs.row(i) = (log_joint.row(i).array() - norm).exp();
    probs.row(i) /= probs.row(i).sum();
  }
  return Responsibilities{std::move(probs)};
}

SufficientStats sufficient_stats(const Dataset& data, const Responsibilities& resp) {
  if (resp.n() != data.n()) throw DimensionError("responsibilities and data row counts differ");
  const double n = static_cast<double>(data.n());
  SufficientStats out;
  out.n = n;
  out.classes.reserve(static_cast<std::size_t>(resp.k()));
  for (Index k = 0; k < resp.k(); ++k) {
    const auto w = resp.probs.col(k).array();
    const Matrix wy = data.y.array().colwise() * w;
    const Matrix wx = data.x.array().colwise() * w;
    ClassStats s;
    s.n_k = resp.probs.col(k).sum();
    s.s_yy = wy.transpose() * data.y / n;
    s.s_yy = 0.5 * (s.s_yy + s.s_yy.transpose()).eval();
    s.s_yx = wy.transpose() * data.x / n;
    s.s_xx = wx.transpose() * data.x / n;
    s.s_xx = 0.5 * (s.s_xx + s.s_xx.transpose()).eval();
    out.classes.push_back(std::move(s));
  }
  return out;
}

Vector update_weights(const SufficientStats& stats) {
  if (!(stats.n > 0.0)) throw InvalidArgument("update_weights needs n > 0");
  Vector w(stats.k());
  for (Index k = 0; k < stats.k(); ++k) w[k] = stats.classes[k].n_k / stats.n;
  const double total = w.sum();
  if (total > 0.0) w /= total;
  return w;
}

std::vector<int> kmeans_init(const Matrix& y, int k, std::uint64_t seed) {
  const Index n = y.rows();
  if (k < 1) throw InvalidArgument("kmeans needs K >= 1");
  if (n < k) throw InvalidArgument("kmeans needs at least K points");

  Rng rng(seed);
  std::vector<int> best_labels;
  double best_sse = std::numeric_limits<double>::infinity();
  int successes = 0;

  for (int attempt = 0; attempt < kKmeansMaxAttempts && successes < kKmeansRestarts; ++attempt) {
    // k-means++ seeding.
    Matrix centres(k, y.cols());
    std::uniform_int_distribution<Index> first(0, n - 1);
    centres.row(0) = y.row(first(rng));
    Vector d2 = (y.rowwise() - centres.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      Index pick = 0;
      const double total = d2.sum();
      if (total > 0.0) {
        std::discrete_distribution<Index> dist(d2.data(), d2.data() + n);
        pick = dist(rng);
      } else {
        pick = first(rng);
      }
      centres.row(c) = y.row(pick);
      d2 = d2.cwiseMin((y.rowwise() - centres.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    bool empty = false;
    for (int iter = 0; iter < kKmeansMaxIters; ++iter) {
      bool changed = false;
      for (Index i = 0; i < n; ++i) {
        Index best = 0;
        (centres.rowwise() - y.row(i)).rowwise().squaredNorm().minCoeff(&best);
        if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
          labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
          changed = true;
        }
      }
      Matrix sums = Matrix::Zero(k, y.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        sums.row(l) += y.row(i);
        ++counts[static_cast<std::size_t>(l)];
      }
      empty = std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
      if (empty) break;
      for (int c = 0; c < k; ++c) centres.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      if (!changed) break;
    }
    if (empty) continue;

    double sse = 0.0;
    for (Index i = 0; i < n; ++i) {
      sse += (y.row(i) - centres.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    ++successes;
    if (sse < best_sse) {
      best_sse = sse;
      best_labels = std::move(labels);
    }
  }
  if (best_labels.empty()) throw NumericalFailure("kmeans could not produce K nonempty clusters");
  return best_labels;
}

MixtureParams random_init_params(Index p, Index q, int k, std::uint64_t seed) {
  if (p < 1 || q < 1 || k < 1) throw InvalidArgument("random_init_params needs p, q, K >= 1");
  Rng rng(seed);
  std::vector<ClassParams> classes(static_cast<std::size_t>(k));
  for (auto& c : classes) {
    const Matrix a = kInitScale * standard_normal(p, p, rng);
    c.lambda = Matrix::Identity(p, p) + a * a.transpose() / static_cast<double>(p);
    c.lambda = 0.5 * (c.lambda + c.lambda.transpose()).eval();
  }
  for (auto& c : classes) c.theta = kInitScale * standard_normal(q, p, rng);
  return MixtureParams::make(std::move(classes), Vector::Constant(k, 1.0 / k));
}

std::optional<ClassParams> conditional_mle(const ClassStats& stats, double n) {
  if (!(stats.n_k > 0.0)) return std::nullopt;
  const double scale = n / stats.n_k;
  const Matrix syy = scale * stats.s_yy;
  const Matrix syx = scale * stats.s_yx;
  const Matrix sxx = scale * stats.s_xx;
  const auto sxx_llt = try_cholesky(sxx);
  if (!sxx_llt) return std::nullopt;
  Matrix cov = syy - syx * sxx_llt->solve(syx.transpose());
  cov = 0.5 * (cov + cov.transpose()).eval();
  const auto cov_llt = try_cholesky(cov);
  if (!cov_llt) return std::nullopt;
  const Index p = cov.rows();
  Matrix lambda = cov_llt->solve(Matrix::Identity(p, p));
  lambda = 0.5 * (lambda + lambda.transpose()).eval();
  if (!try_cholesky(lambda) || !lambda.allFinite()) return std::nullopt;
  Matrix theta = -sxx_llt->solve(syx.transpose()) * lambda;
  return ClassParams{std::move(lambda), std::move(theta)};
}

MixtureParams label_init_params(const Dataset& data, const std::vector<int>& labels, int k,
                                double resp_floor, const ProxConfig& prox) {
  if (static_cast<Index>(labels.size()) != data.n()) {
    throw DimensionError("label count differs from sample count");
  }
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0 || l >= k) throw InvalidArgument("label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c : counts) {
    if (c < 2) throw InvalidArgument("degenerate labels: a class has fewer than two members");
  }
  const auto resp = floored(one_hot(labels, k), resp_floor);
  const auto stats = sufficient_stats(data, resp);
  const Vector weights = update_weights(stats);

  std::vector<ClassParams> classes;
  classes.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    auto closed = conditional_mle(stats.classes[static_cast<std::size_t>(c)], stats.n);
    if (closed) {
      classes.push_back(std::move(*closed));
      continue;
    }
    // Singular class moments: run the solver from (I, 0) instead.
    SufficientStats single{stats.n, {stats.classes[static_cast<std::size_t>(c)]}};
    single.n = single.classes.front().n_k;  // counts must add up within this subproblem
    single.classes.front().s_yy *= stats.n / single.n;
    single.classes.front().s_yx *= stats.n / single.n;
    single.classes.front().s_xx *= stats.n / single.n;
    const ClassParams start{Matrix::Identity(data.p(), data.p()), Matrix::Zero(data.q(), data.p())};
    const std::vector<ClassParams> init{start};
    auto solved = solve_m_step(init, single, PenaltyConfig{}, prox);
    classes.push_back(std::move(solved.classes.front()));
  }
  return MixtureParams::make(std::move(classes), weights);
}

MixtureParams init_params(const Dataset& data, int k, const EMConfig& cfg,
                          const std::vector<int>* labels) {
  switch (cfg.init) {
    case InitMode::random:
      return random_init_params(data.p(), data.q(), k, cfg.seed);
    case InitMode::kmeans: {
      const auto km = kmeans_init(data.y, k, cfg.seed);
      return label_init_params(data, km, k, cfg.min_resp_floor, cfg.prox);
    }
    case InitMode::labels:
      if (labels == nullptr) throw InvalidArgument("init mode 'labels' needs labels");
      return label_init_params(data, *labels, k, cfg.min_resp_floor, cfg.prox);
  }
  throw InvalidArgument("unknown init mode");
}

FitResult em_fit(const Dataset& data, int k, const EMConfig& cfg, const std::vector<int>* labels) {
  cfg.validate();
  if (k < 1) throw InvalidArgument("K must be at least 1");
  if (data.n() <= k) throw InvalidArgument("EM needs more samples than classes");
  return em_fit_from(data, init_params(data, k, cfg, labels), cfg);
}

FitResult em_fit_from(const Dataset& data, const MixtureParams& init, const EMConfig& cfg) {
  cfg.validate();
  init.validate();
  check_dimensions(data, init);
  const auto start = std::chrono::steady_clock::now();

  FitResult result;
  result.initial = init;
  result.params = init;
  double objective = penalised_observed_neg_loglik(data, result.params, cfg.pen);
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  result.objective_trace.push_back(objective);
  result.elapsed_s.push_back(elapsed());

  int streak = 0;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const auto resp = floored(e_step(data, result.params), cfg.min_resp_floor);
    const auto stats = sufficient_stats(data, resp);
    Vector weights = update_weights(stats);
    auto m = solve_m_step(result.params.classes, stats, cfg.pen, cfg.prox);
    result.params.classes = std::move(m.classes);
    result.params.weights = std::move(weights);

    const double next = penalised_observed_neg_loglik(data, result.params, cfg.pen);
    result.objective_trace.push_back(next);
    result.elapsed_s.push_back(elapsed());
    result.n_iters = t;

    const bool tiny = (result.params.weights.array() < kDegenerateFraction).any();
    streak = tiny ? streak + 1 : 0;
    if (streak >= kDegenerateStreak) result.degenerate_class = true;

    const double decrease = objective - next;
    objective = next;
    if (decrease <= cfg.rel_tol * std::abs(objective)) {
      result.converged = true;
      // A collapsed class at a stationary point would stay collapsed.
      if (streak > 0) result.degenerate_class = true;
      break;
    }
  }
  result.resp = e_step(data, result.params);
  result.wall_time_s = elapsed();
  return result;
}

}  // namespace cggm
