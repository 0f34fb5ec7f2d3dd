#pragma once

#include "run_config.hpp"

#include "cggm/baselines.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cggm::cli {

/// A dataset plus whatever ground truth accompanies it.
struct LoadedData {
  Dataset data;
  std::optional<std::vector<int>> labels;
  std::optional<MixtureParams> truth;
};

/// Replication r of the configured scenario: read from data_dir when set,
/// otherwise generated with the replication's derived seed.
LoadedData load_data(const RunConfig& rc, int replication = 0);

/// One fitted method: the model as a conditional mixture over the co-features
/// of `model_data`, which is what the ABC metric and the objective are
/// evaluated on.
struct MethodFit {
  Method method = Method::cggm;
  FitResult fit;
  std::optional<OlsFit> ols;
};

MethodFit fit_method(Method method, const Dataset& data, int k, const EMConfig& cfg);

/// (Y, X), (Y, 1) or (Y, [X, 1]) depending on the method.
Dataset model_data(Method method, const Dataset& data);
MixtureParams model_params(const MethodFit& fit);

struct Metric {
  std::string name;
  int cls = 0;  // 1-based true class, 0 for whole-model metrics
  double value = 0.0;
};

/// Misclassification (when labels are known), ABC-like distances, final
/// objective, and per-class KL / Frobenius errors (when the truth is known and
/// has the same number of classes).
std::vector<Metric> evaluate_fit(const LoadedData& d, const MethodFit& fit, Index abc_samples,
                                 std::uint64_t abc_seed);

struct RunRecord {
  int replication = 0;
  int restart = 0;
  Method method = Method::cggm;
  std::string status = "ok";
  bool converged = false;
  bool degenerate = false;
  int n_iters = 0;
  double wall_time_s = 0.0;
  std::vector<double> trace;
  std::vector<Matrix> initial_lambdas;
  std::vector<Metric> metrics;
};

struct ReproduceResult {
  int k = 0;
  std::vector<RunRecord> runs;  // ordered by (replication, restart, method)
};

/// Every replication x restart runs all three methods from the same seed, so
/// random initialisations share their precision stacks.
ReproduceResult run_reproduce(const RunConfig& rc, int jobs);

/// metrics.json, summary.csv, runs.csv, traces.csv, runtimes.csv, initial_lambdas.json.
void write_reproduce_outputs(const RunConfig& rc, const ReproduceResult& result);

struct SummaryRow {
  std::string method;
  std::string metric;
  int cls = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  double median = 0.0;
  int count = 0;
};

std::vector<SummaryRow> summarise(const ReproduceResult& result);

// Command entry points; each returns the process exit code.
int cmd_generate(const RunConfig& rc);
int cmd_fit(const RunConfig& rc);
int cmd_evaluate(const RunConfig& rc);
int cmd_select_k(const RunConfig& rc);
int cmd_reproduce(const RunConfig& rc, int jobs);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNumerical = 4;

}  // namespace cggm::cli
