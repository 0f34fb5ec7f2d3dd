// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "commands.hpp"
#include "run_config.hpp"

#include "cggm/datagen.hpp"
#include "cggm/em.hpp"
#include "cggm/evaluation.hpp"
#include "cggm/m_step.hpp"
#include "cggm/model.hpp"
#include "cggm/penalty.hpp"
#include "cggm/random.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

using namespace cggm;
using namespace cggm::cli;
namespace fs = std::filesystem;

namespace {

// Tolerances and bands.
constexpr double kToyCemMax = 0.15;
constexpr double kToyBaselineMin = 0.35;
constexpr double kToyGap = 0.20;
constexpr double kToyRuntimeS = 600.0;
constexpr double kHighCemMax = 0.25;
constexpr double kHighBaselineMin = 0.40;
constexpr double kMleTol = 1e-4;
constexpr double kMleRuntimeS = 30.0;
constexpr double kKktTol = 1e-8;
constexpr double kProxNumTol = 1e-6;
constexpr double kGradRelTol = 1e-5;
constexpr double kMonotoneSlack = 1e-8;
constexpr double kGroupLimitScale = 1e3;
constexpr int kSelectReplications = 10;
constexpr int kSelectHitsNeeded = 8;
constexpr int kSelectRestarts = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

int jobs_from_env() {
  const char* env = std::getenv("CGGM_MIX_JOBS");
  return env ? std::max(1, std::atoi(env)) : 1;
}

RunConfig config(std::vector<std::string> sets) {
  return RunConfig::from_json(resolve_config(std::nullopt, sets));
}

// Mean of a whole-model or per-class metric from the reproduce summary.
double summary_mean(const std::vector<SummaryRow>& rows, Method m, const std::string& metric,
                    int cls = 0) {
  for (const auto& r : rows) {
    if (r.method == to_string(m) && r.metric == metric && r.cls == cls) return r.mean;
  }
  throw std::runtime_error("no summary row for " + to_string(m) + "/" + metric);
}

int failed_runs(const ReproduceResult& r) {
  int n = 0;
  for (const auto& run : r.runs) n += run.status != "ok";
  return n;
}

// Runs of criteria 1-3 and 7 are shared.
struct Study {
  ReproduceResult result;
  std::vector<SummaryRow> summary;
  double seconds = 0.0;
};

std::optional<Study> toy_study;
std::optional<Study> high_study;

const Study& toy() {
  if (!toy_study) {
    const auto t0 = std::chrono::steady_clock::now();
    Study s;
    s.result = run_reproduce(config({"scenario=toy2d"}), jobs_from_env());
    s.seconds = seconds_since(t0);
    s.summary = summarise(s.result);
    toy_study = std::move(s);
  }
  return *toy_study;
}

const Study& high() {
  if (!high_study) {
    const auto t0 = std::chrono::steady_clock::now();
    Study s;
    s.result = run_reproduce(config({"scenario=highdim"}), jobs_from_env());
    s.seconds = seconds_since(t0);
    s.summary = summarise(s.result);
    high_study = std::move(s);
  }
  return *high_study;
}

Outcome criterion_1() {
  const auto& s = toy();
  const double cem = summary_mean(s.summary, Method::cggm, "hard_error");
  const double ggm = summary_mean(s.summary, Method::ggm, "hard_error");
  const double res = summary_mean(s.summary, Method::residual_ggm, "hard_error");
  const bool ok = failed_runs(s.result) == 0 && cem <= kToyCemMax && ggm >= kToyBaselineMin &&
                  res >= kToyBaselineMin && std::min(ggm, res) - cem >= kToyGap &&
                  s.seconds <= kToyRuntimeS;
  return {ok, "hard error cggm " + fmt(cem) + ", ggm " + fmt(ggm) + ", residual-ggm " + fmt(res) +
                  "; " + std::to_string(s.result.runs.size()) + " runs in " + fmt(s.seconds) + " s"};
}

Outcome criterion_2() {
  const auto& s = high();
  const double cem = summary_mean(s.summary, Method::cggm, "hard_error");
  const double ggm = summary_mean(s.summary, Method::ggm, "hard_error");
  const double res = summary_mean(s.summary, Method::residual_ggm, "hard_error");
  const double abc_c = summary_mean(s.summary, Method::cggm, "abc");
  const double abc_g = summary_mean(s.summary, Method::ggm, "abc");
  const double abc_r = summary_mean(s.summary, Method::residual_ggm, "abc");
  const bool ok = failed_runs(s.result) == 0 && cem <= kHighCemMax && ggm >= kHighBaselineMin &&
                  res >= kHighBaselineMin && abc_c < abc_g && abc_c < abc_r;
  return {ok, "hard error cggm " + fmt(cem) + ", ggm " + fmt(ggm) + ", residual-ggm " + fmt(res) +
                  "; abc " + fmt(abc_c) + " / " + fmt(abc_g) + " / " + fmt(abc_r) + "; " +
                  fmt(s.seconds) + " s"};
}

Outcome criterion_3() {
  const auto& s = high();
  bool ok = failed_runs(s.result) == 0;
  std::string detail;
  for (const char* metric : {"kl", "frobenius"}) {
    for (int cls = 1; cls <= 3; ++cls) {
      const double c = summary_mean(s.summary, Method::cggm, metric, cls);
      const double g = summary_mean(s.summary, Method::ggm, metric, cls);
      const double r = summary_mean(s.summary, Method::residual_ggm, metric, cls);
      ok = ok && c < g && c < r;
      detail += std::string(metric) + "[" + std::to_string(cls) + "] " + fmt(c) + "/" + fmt(g) +
                "/" + fmt(r) + " ";
    }
  }
  return {ok, detail + "(cggm/ggm/residual-ggm)"};
}

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::uniform_int_distribution<int> dim_p(1, 5);
  std::uniform_int_distribution<int> dim_q(1, 3);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(404, {seed}));
    const Index p = dim_p(rng);
    const Index q = dim_q(rng);
    const Index n = 200;
    const auto truth = fixture::random_class(p, q, rng);
    const Matrix x = standard_normal(n, q, rng);
    const auto sample = sample_mixture(MixtureParams::make({truth}, Vector::Ones(1)), x, seed);
    const auto stats = oracle::moments(sample.y, x, Matrix::Ones(n, 1));
    const std::vector<ClassParams> init{ClassParams::make(Matrix::Identity(p, p), Matrix::Zero(q, p))};
    ProxConfig prox;
    prox.max_iters = 20000;
    prox.grad_tol = 1e-10;
    prox.obj_tol = 1e-15;
    const auto fit = solve_m_step(init, stats, {}, prox);
    const auto mle = oracle::conditional_mle(stats.classes[0], stats.n);
    worst = std::max({worst, (fit.classes[0].lambda - mle.lambda).norm(),
                      (fit.classes[0].theta - mle.theta).norm()});
  }
  const double secs = seconds_since(t0);
  return {worst <= kMleTol && secs <= kMleRuntimeS,
          "max Frobenius gap " + fmt(worst) + " over 100 seeds in " + fmt(secs) + " s"};
}

Outcome criterion_5() {
  Rng rng(505);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_kkt = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int k = 1 + rep % 5;
    std::vector<Matrix> d;
    for (int c = 0; c < k; ++c) d.push_back(2.0 * standard_normal(1, 1, rng));
    const double alpha = 0.1 + 2.0 * unif(rng);
    const double l1 = unif(rng);
    const double l2 = unif(rng);
    const auto out = prox_ggl(d, alpha, l1, l2);
    Vector dv(k);
    Vector av(k);
    for (int c = 0; c < k; ++c) {
      dv[c] = d[c](0, 0);
      av[c] = out[c](0, 0);
    }
    worst_kkt = std::max(worst_kkt, oracle::prox_kkt_residual(dv, av, alpha, l1, l2));
  }
  double worst_num = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Vector dv = 2.0 * standard_normal(2, 1, rng);
    const double alpha = 0.1 + 2.0 * unif(rng);
    const double l1 = unif(rng);
    const double l2 = unif(rng);
    const std::vector<Matrix> d{Matrix::Constant(1, 1, dv[0]), Matrix::Constant(1, 1, dv[1])};
    const auto out = prox_ggl(d, alpha, l1, l2);
    const Vector num = oracle::numeric_prox_2(dv, alpha, l1, l2);
    worst_num = std::max({worst_num, std::abs(out[0](0, 0) - num[0]), std::abs(out[1](0, 0) - num[1])});
  }
  return {worst_kkt <= kKktTol && worst_num <= kProxNumTol,
          "max KKT residual " + fmt(worst_kkt) + ", max gap to numeric minimiser " + fmt(worst_num)};
}

Outcome criterion_6() {
  Rng rng(606);
  const Index p = 3;
  const Index q = 2;
  const double h = 1e-5;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix y = standard_normal(40, p, rng);
    const Matrix x = standard_normal(40, q, rng);
    const auto s = oracle::moments(y, x, fixture::random_resp(40, 2, rng));
    const auto c = fixture::random_classes(2, p, q, rng);
    const auto grads = smooth_gradient(c, s);
    auto fd = [&](const std::function<void(std::vector<ClassParams>&, double)>& bump) {
      auto plus = c;
      auto minus = c;
      bump(plus, h);
      bump(minus, -h);
      return (smooth_objective(plus, s) - smooth_objective(minus, s)) / (2.0 * h);
    };
    auto rel = [](double num, double ana) { return std::abs(num - ana) / std::max(1.0, std::abs(ana)); };
    for (std::size_t k = 0; k < 2; ++k) {
      for (Index i = 0; i < p; ++i) {
        for (Index j = i; j < p; ++j) {
          // A symmetric perturbation moves both (i, j) and (j, i).
          const double num = fd([&](auto& cs, double e) {
            cs[k].lambda(i, j) += e;
            if (i != j) cs[k].lambda(j, i) += e;
          });
          worst = std::max(worst, rel(num, grads[k].grad_lambda(i, j) * (i == j ? 1.0 : 2.0)));
        }
      }
      for (Index i = 0; i < q; ++i) {
        for (Index j = 0; j < p; ++j) {
          const double num = fd([&](auto& cs, double e) { cs[k].theta(i, j) += e; });
          worst = std::max(worst, rel(num, grads[k].grad_theta(i, j)));
        }
      }
    }
  }
  return {worst <= kGradRelTol, "max relative error " + fmt(worst) + " over 50 instances"};
}

Outcome criterion_7() {
  int runs = 0;
  int violations = 0;
  double worst = 0.0;
  for (const Study* s : {&toy(), &high()}) {
    for (const auto& run : s->result.runs) {
      if (run.status != "ok") {
        ++violations;
        continue;
      }
      ++runs;
      for (std::size_t t = 1; t < run.trace.size(); ++t) {
        const double rise = run.trace[t] - run.trace[t - 1];
        worst = std::max(worst, rise);
        violations += rise > kMonotoneSlack;
      }
    }
  }
  return {violations == 0, std::to_string(runs) + " traces, " + std::to_string(violations) +
                               " violations, largest increase " + fmt(worst)};
}

Outcome criterion_8() {
  HighDimConfig hd;
  hd.theta_magnitude = {1.25, 2.5};
  hd.intercept_effects = false;
  bool ok = true;
  int fits = 0;
  for (std::uint64_t r = 0; r < 3; ++r) {
    hd.seed = derive_seed(808, {r});
    const auto s = gen_highdim(hd);
    const double syy_max = (s.data.y.transpose() * s.data.y / static_cast<double>(s.data.n()))
                               .cwiseAbs()
                               .maxCoeff();
    EMConfig base;
    base.seed = derive_seed(808, {r, 1});
    base.pen = {0.02, 0.02, 0.05, 0.05};

    EMConfig prec = base;
    prec.pen.lambda2_prec = kGroupLimitScale * syy_max;
    const auto fp = em_fit(s.data, 3, prec);
    for (const auto& c : fp.params.classes) {
      const Matrix off = c.lambda - Matrix(c.lambda.diagonal().asDiagonal());
      ok = ok && off.cwiseAbs().maxCoeff() == 0.0;
    }

    EMConfig trans = base;
    trans.pen.lambda2_trans = kGroupLimitScale * syy_max;
    const auto ft = em_fit(s.data, 3, trans);
    for (const auto& c : ft.params.classes) {
      ok = ok && c.theta.cwiseAbs().maxCoeff() == 0.0;
      ok = ok && ClassDensity(c).conditional_means(s.data.x).cwiseAbs().maxCoeff() == 0.0;
    }
    fits += 2;
  }
  return {ok, std::to_string(fits) + " fits: precisions diagonal and transitions zero"};
}

Outcome criterion_9() {
  int hits = 0;
  std::string chosen;
  for (int r = 0; r < kSelectReplications; ++r) {
    HighDimConfig hd;
    hd.n = 500;
    hd.theta_magnitude = {1.25, 2.5};
    hd.intercept_effects = false;
    hd.seed = derive_seed(909, {kDataStream, static_cast<std::uint64_t>(r)});
    const auto s = gen_highdim(hd);
    EMConfig cfg;
    cfg.seed = derive_seed(909, {kInitStream, static_cast<std::uint64_t>(r)});
    const auto sel = select_k(s.data, {1, 2, 3, 4, 5}, cfg, Criterion::bic, kSelectRestarts);
    hits += sel.chosen_k == 3;
    chosen += std::to_string(sel.chosen_k);
  }
  const auto df = degrees_of_freedom(3, 10, 5);
  return {hits >= kSelectHitsNeeded && df == 315,
          "K=3 chosen in " + std::to_string(hits) + "/" + std::to_string(kSelectReplications) +
              " (" + chosen + "); df(3,10,5) = " + std::to_string(df)};
}

Outcome criterion_10() {
  const fs::path root = fs::temp_directory_path() / "cggm_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> base{"scenario=toy2d", "replications=4", "restarts=3"};
  auto with_dir = [&](const std::string& d) {
    auto sets = base;
    sets.push_back("output_dir=" + (root / d).string());
    return config(sets);
  };
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int a = cmd_reproduce(with_dir("a"), jobs_from_env());
  const int b = cmd_reproduce(with_dir("b"), 1);
  std::cout.rdbuf(old);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string ma = slurp(root / "a" / "metrics.json");
  const std::string mb = slurp(root / "b" / "metrics.json");
  const bool same = !ma.empty() && ma == mb;
  return {a == kExitOk && b == kExitOk && same,
          std::string("metrics.json ") + (same ? "byte-identical" : "differs") + " (" +
              std::to_string(ma.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"toy 2-D ordering", criterion_1}},
      {2, {"high-dimensional ordering", criterion_2}},
      {3, {"parameter reconstruction ordering", criterion_3}},
      {4, {"M-step matches the closed-form MLE", criterion_4}},
      {5, {"prox correctness", criterion_5}},
      {6, {"gradient check", criterion_6}},
      {7, {"EM monotonicity", criterion_7}},
      {8, {"group-sparsity limit", criterion_8}},
      {9, {"model selection", criterion_9}},
      {10, {"determinism", criterion_10}},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << entry.first << ": " << o.detail
              << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
