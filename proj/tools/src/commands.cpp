#include "commands.hpp"

#include "parallel.hpp"

#include "cggm/io.hpp"
#include "cggm/model.hpp"
#include "cggm/random.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <tuple>

namespace cggm::cli {

namespace fs = std::filesystem;

namespace {

json manifest(const RunConfig& rc, const std::string& command) {
  return {{"command", command},
          {"config_hash", rc.hash},
          {"seed", rc.seed},
          {"config", rc.doc}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::vector<int> to_one_based(std::vector<int> labels) {
  for (auto& l : labels) ++l;
  return labels;
}

std::vector<int> to_zero_based(std::vector<int> labels) {
  for (auto& l : labels) {
    if (l < 1) throw InvalidArgument("labels.csv holds 1-based class labels");
    --l;
  }
  return labels;
}

std::string hash_of(const fs::path& file) {
  const json j = read_json(file);
  if (!j.contains("config_hash")) throw IoError("'" + file.string() + "' has no config_hash");
  return j.at("config_hash").get<std::string>();
}

std::string class_cell(int cls) { return cls == 0 ? "" : std::to_string(cls); }

json metrics_json(const std::vector<Metric>& metrics) {
  auto arr = json::array();
  for (const auto& m : metrics) {
    json rec = {{"metric", m.name}, {"value", m.value}};
    rec["class"] = m.cls == 0 ? json(nullptr) : json(m.cls);
    arr.push_back(std::move(rec));
  }
  return arr;
}

LoadedData subsample(const LoadedData& d, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return d;
  const Index n = d.data.n();
  const auto m = std::max<Index>(2, static_cast<Index>(std::floor(fraction * static_cast<double>(n))));
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  Matrix y(m, d.data.p());
  Matrix x(m, d.data.q());
  std::vector<int> labels;
  for (Index i = 0; i < m; ++i) {
    const auto src = idx[static_cast<std::size_t>(i)];
    y.row(i) = d.data.y.row(src);
    x.row(i) = d.data.x.row(src);
    if (d.labels) labels.push_back((*d.labels)[static_cast<std::size_t>(src)]);
  }
  LoadedData out{Dataset::make(std::move(y), std::move(x)), std::nullopt, d.truth};
  if (d.labels) out.labels = std::move(labels);
  return out;
}

}  // namespace

LoadedData load_data(const RunConfig& rc, int replication) {
  if (!rc.data_dir.empty()) {
    const auto y = read_csv(rc.data_dir / "Y.csv");
    const auto x = read_csv(rc.data_dir / "X.csv");
    if (y.values.rows() != x.values.rows()) {
      throw DimensionError("Y.csv has " + std::to_string(y.values.rows()) + " rows but X.csv has " +
                           std::to_string(x.values.rows()));
    }
    LoadedData d{Dataset::make(y.values, x.values), std::nullopt, std::nullopt};
    if (fs::exists(rc.data_dir / "labels.csv")) {
      auto labels = to_zero_based(read_labels_csv(rc.data_dir / "labels.csv"));
      if (static_cast<Index>(labels.size()) != d.data.n()) {
        throw DimensionError("labels.csv row count differs from Y.csv");
      }
      d.labels = std::move(labels);
    }
    if (fs::exists(rc.data_dir / "truth.json")) {
      d.truth = mixture_from_json(read_json(rc.data_dir / "truth.json").at("params"));
    }
    return d;
  }
  const auto seed = derive_seed(rc.seed, {kDataStream, static_cast<std::uint64_t>(replication)});
  SyntheticData s;
  if (rc.scenario == "toy2d") {
    ToyConfig cfg = rc.toy;
    cfg.seed = seed;
    s = gen_toy_2d(cfg);
  } else if (rc.scenario == "highdim") {
    HighDimConfig cfg = rc.highdim;
    cfg.seed = seed;
    s = gen_highdim(cfg);
  } else {
    throw ConfigError("scenario 'csv' needs data_dir");
  }
  return {std::move(s.data), std::move(s.labels), std::move(s.truth)};
}

Dataset model_data(Method method, const Dataset& data) {
  switch (method) {
    case Method::cggm: return data;
    case Method::ggm: return intercept_only(data.y);
    case Method::residual_ggm: return Dataset::make(data.y, append_ones(data.x));
  }
  throw InvalidArgument("unknown method");
}

MethodFit fit_method(Method method, const Dataset& data, int k, const EMConfig& cfg) {
  switch (method) {
    case Method::cggm: return {method, em_fit(data, k, cfg), std::nullopt};
    case Method::ggm: return {method, ggm_mixture_fit(data.y, k, cfg), std::nullopt};
    case Method::residual_ggm: {
      auto r = residual_ggm_mixture_fit(data, k, cfg);
      return {method, std::move(r.fit), std::move(r.ols)};
    }
  }
  throw InvalidArgument("unknown method");
}

MixtureParams model_params(const MethodFit& fit) {
  if (fit.method != Method::residual_ggm) return fit.fit.params;
  return residual_model_as_conditional(ResidualFit{fit.fit, *fit.ols});
}

std::vector<Metric> evaluate_fit(const LoadedData& d, const MethodFit& fit, Index abc_samples,
                                 std::uint64_t abc_seed) {
  std::vector<Metric> out;
  std::optional<LabelMatching> matching;
  if (d.labels) {
    matching = misclassification(*d.labels, fit.fit.resp);
    out.push_back({"hard_error", 0, matching->hard_error});
    out.push_back({"soft_error", 0, matching->soft_error});
  }
  const Index m = abc_samples > 0 ? abc_samples : d.data.n();
  const auto dist = abc_like_metric(model_data(fit.method, d.data), model_params(fit), m, abc_seed);
  out.push_back({"abc", 0, std::accumulate(dist.begin(), dist.end(), 0.0) /
                               static_cast<double>(dist.size())});
  out.push_back({"objective", 0, fit.fit.final_objective()});
  if (matching && d.truth && d.truth->k() == fit.fit.params.k() && d.truth->p() == fit.fit.params.p()) {
    const auto kk = static_cast<std::size_t>(d.truth->k());
    std::vector<double> kl(kk);
    std::vector<double> fro(kk);
    for (std::size_t j = 0; j < kk; ++j) {
      const auto t = static_cast<std::size_t>(matching->permutation[j]);
      const auto& truth = d.truth->classes[t].lambda;
      const auto& est = fit.fit.params.classes[j].lambda;
      kl[t] = kl_gaussian_precision(truth, est);
      fro[t] = frobenius_error(truth, est);
    }
    for (std::size_t t = 0; t < kk; ++t) out.push_back({"kl", static_cast<int>(t) + 1, kl[t]});
    for (std::size_t t = 0; t < kk; ++t) {
      out.push_back({"frobenius", static_cast<int>(t) + 1, fro[t]});
    }
  }
  return out;
}

ReproduceResult run_reproduce(const RunConfig& rc, int jobs) {
  const auto reps = static_cast<std::size_t>(rc.replications);
  const auto restarts = static_cast<std::size_t>(rc.restarts);

  std::vector<LoadedData> datasets;
  datasets.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto d = load_data(rc, static_cast<int>(r));
    datasets.push_back(subsample(d, rc.bootstrap_fraction,
                                 derive_seed(rc.seed, {kBootStream, static_cast<std::uint64_t>(r)})));
  }

  ReproduceResult result;
  result.k = rc.k;
  constexpr std::size_t kMethods = std::size(kAllMethods);
  result.runs.resize(reps * restarts * kMethods);

  parallel_for(reps * restarts, jobs, [&](std::size_t task) {
    const std::size_t r = task / restarts;
    const std::size_t s = task % restarts;
    const auto& d = datasets[r];
    EMConfig cfg = rc.em;
    cfg.seed = derive_seed(rc.seed, {kInitStream, r, s});
    const auto abc_seed = derive_seed(rc.seed, {kAbcStream, r, s});
    for (std::size_t m = 0; m < kMethods; ++m) {
      auto& rec = result.runs[task * kMethods + m];
      rec.replication = static_cast<int>(r);
      rec.restart = static_cast<int>(s);
      rec.method = kAllMethods[m];
      try {
        const auto fit = fit_method(rec.method, d.data, rc.k, cfg);
        rec.converged = fit.fit.converged;
        rec.degenerate = fit.fit.degenerate_class;
        rec.n_iters = fit.fit.n_iters;
        rec.wall_time_s = fit.fit.wall_time_s;
        rec.trace = fit.fit.objective_trace;
        for (const auto& c : fit.fit.initial.classes) rec.initial_lambdas.push_back(c.lambda);
        rec.metrics = evaluate_fit(d, fit, rc.abc_samples, abc_seed);
      } catch (const NumericalFailure& e) {
        rec.status = std::string("numerical_failure: ") + e.what();
      } catch (const Error& e) {
        rec.status = std::string("error: ") + e.what();
      }
    }
  });
  return result;
}

std::vector<SummaryRow> summarise(const ReproduceResult& result) {
  std::map<std::tuple<int, std::string, int>, std::vector<double>> groups;
  for (const auto& run : result.runs) {
    if (run.status != "ok") continue;
    for (const auto& m : run.metrics) {
      groups[{static_cast<int>(run.method), m.name, m.cls}].push_back(m.value);
    }
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, values] : groups) {
    SummaryRow row;
    row.method = to_string(static_cast<Method>(std::get<0>(key)));
    row.metric = std::get<1>(key);
    row.cls = std::get<2>(key);
    row.count = static_cast<int>(values.size());
    const double n = static_cast<double>(values.size());
    row.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t h = values.size() / 2;
    row.median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_reproduce_outputs(const RunConfig& rc, const ReproduceResult& result) {
  const auto& dir = rc.output_dir;
  ensure_dir(dir);

  json records = json::array();
  json inits = json::array();
  std::vector<std::vector<std::string>> run_rows;
  std::vector<std::vector<std::string>> trace_rows;
  std::vector<std::vector<std::string>> time_rows;
  for (const auto& run : result.runs) {
    const std::string method = to_string(run.method);
    const std::string rep = std::to_string(run.replication + 1);
    const std::string restart = std::to_string(run.restart + 1);
    for (const auto& m : run.metrics) {
      json rec = {{"replication", run.replication + 1},
                  {"restart", run.restart + 1},
                  {"method", method},
                  {"metric", m.name},
                  {"value", m.value}};
      rec["class"] = m.cls == 0 ? json(nullptr) : json(m.cls);
      records.push_back(std::move(rec));
    }
    json lambdas = json::array();
    for (const auto& l : run.initial_lambdas) lambdas.push_back(matrix_to_json(l));
    inits.push_back({{"replication", run.replication + 1},
                     {"restart", run.restart + 1},
                     {"method", method},
                     {"lambda", std::move(lambdas)}});
    run_rows.push_back({rep, restart, method, run.status, run.converged ? "1" : "0",
                        run.degenerate ? "1" : "0", std::to_string(run.n_iters)});
    for (std::size_t t = 0; t < run.trace.size(); ++t) {
      trace_rows.push_back({rep, restart, method, std::to_string(t), format_double(run.trace[t])});
    }
    time_rows.push_back({rep, restart, method, format_double(run.wall_time_s)});
  }

  write_json(dir / "metrics.json", {{"config_hash", rc.hash},
                                    {"experiment", rc.scenario},
                                    {"k", result.k},
                                    {"records", std::move(records)}});
  write_json(dir / "initial_lambdas.json", {{"config_hash", rc.hash}, {"runs", std::move(inits)}});
  write_csv_rows(dir / "runs.csv",
                 {"replication", "restart", "method", "status", "converged", "degenerate", "n_iters"},
                 run_rows);
  write_csv_rows(dir / "traces.csv", {"replication", "restart", "method", "iteration", "objective"},
                 trace_rows);
  write_csv_rows(dir / "runtimes.csv", {"replication", "restart", "method", "wall_time_s"},
                 time_rows);

  std::vector<std::vector<std::string>> summary_rows;
  for (const auto& row : summarise(result)) {
    summary_rows.push_back({row.method, row.metric, class_cell(row.cls), format_double(row.mean),
                            format_double(row.std), format_double(row.median),
                            std::to_string(row.count)});
  }
  write_csv_rows(dir / "summary.csv", {"method", "metric", "class", "mean", "std", "median", "count"},
                 summary_rows);
  write_json(dir / "manifest.json", manifest(rc, "reproduce"));
}

int cmd_generate(const RunConfig& rc) {
  if (rc.scenario == "csv") throw ConfigError("generate needs scenario toy2d or highdim");
  RunConfig gen = rc;
  gen.data_dir.clear();
  const auto d = load_data(gen, 0);
  const auto& dir = rc.output_dir;
  ensure_dir(dir);
  write_matrix_csv(dir / "Y.csv", d.data.y, "y");
  write_matrix_csv(dir / "X.csv", d.data.x, "x");
  write_labels_csv(dir / "labels.csv", to_one_based(*d.labels));
  write_json(dir / "truth.json", {{"config_hash", rc.hash}, {"params", mixture_to_json(*d.truth)}});
  auto man = manifest(rc, "generate");
  man["data_seed"] = derive_seed(rc.seed, {kDataStream, 0});
  man["n"] = d.data.n();
  man["p"] = d.data.p();
  man["q"] = d.data.q();
  write_json(dir / "manifest.json", man);
  std::cout << "wrote " << d.data.n() << " samples to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_fit(const RunConfig& rc) {
  const auto d = load_data(rc, 0);
  std::optional<MethodFit> best;
  int best_restart = 0;
  std::vector<std::vector<std::string>> restart_rows;
  for (int s = 0; s < rc.restarts; ++s) {
    EMConfig cfg = rc.em;
    cfg.seed = derive_seed(rc.seed, {kInitStream, 0, static_cast<std::uint64_t>(s)});
    auto fit = fit_method(rc.method, d.data, rc.k, cfg);
    restart_rows.push_back({std::to_string(s + 1), format_double(fit.fit.final_objective()),
                            std::to_string(fit.fit.n_iters), fit.fit.converged ? "1" : "0"});
    if (!best || fit.fit.final_objective() < best->fit.final_objective()) {
      best = std::move(fit);
      best_restart = s;
    }
  }

  const auto& dir = rc.output_dir;
  ensure_dir(dir);
  const auto& f = best->fit;
  json params = {{"config_hash", rc.hash},
                 {"method", to_string(rc.method)},
                 {"k", rc.k},
                 {"restart", best_restart + 1},
                 {"converged", f.converged},
                 {"degenerate", f.degenerate_class},
                 {"n_iters", f.n_iters},
                 {"final_objective", f.final_objective()},
                 {"params", mixture_to_json(f.params)}};
  if (best->ols) params["ols_beta_hat"] = matrix_to_json(best->ols->beta_hat);
  write_json(dir / "params.json", params);
  write_matrix_csv(dir / "responsibilities.csv", f.resp.probs, "p");
  Matrix trace(static_cast<Index>(f.objective_trace.size()), 3);
  for (Index t = 0; t < trace.rows(); ++t) {
    trace(t, 0) = static_cast<double>(t);
    trace(t, 1) = f.objective_trace[static_cast<std::size_t>(t)];
    trace(t, 2) = f.elapsed_s[static_cast<std::size_t>(t)];
  }
  write_csv(dir / "trace.csv", {"iteration", "objective", "wall_time"}, trace);
  write_csv_rows(dir / "restarts.csv", {"restart", "objective", "n_iters", "converged"},
                 restart_rows);
  write_json(dir / "manifest.json", manifest(rc, "fit"));

  std::cout << to_string(rc.method) << ": objective " << format_double(f.final_objective())
            << " after " << f.n_iters << " iterations (restart " << best_restart + 1 << ", "
            << (f.converged ? "converged" : "not converged") << ")\n";
  if (f.degenerate_class) {
    std::cerr << "warning: a class weight collapsed below 1e-6\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& rc) {
  if (rc.fit_dir.empty()) throw ConfigError("evaluate needs fit_dir");
  const fs::path params_file = rc.fit_dir / "params.json";
  const fs::path resp_file = rc.fit_dir / "responsibilities.csv";
  for (const auto& f : {params_file, resp_file}) {
    if (!fs::exists(f)) throw IoError("missing file '" + f.string() + "'");
  }
  const std::string fit_hash = hash_of(params_file);
  for (const auto& f : {rc.data_dir / "manifest.json", rc.data_dir / "truth.json"}) {
    if (rc.data_dir.empty() || !fs::exists(f)) continue;
    if (hash_of(f) != fit_hash) {
      throw ConfigError("config hash mismatch: '" + f.string() + "' vs '" + params_file.string() +
                        "' (use one config for generate, fit and evaluate; only the *_dir keys may differ)");
    }
  }

  const auto d = load_data(rc, 0);
  const json pj = read_json(params_file);
  MethodFit fit;
  fit.method = method_from_string(pj.at("method").get<std::string>());
  fit.fit.params = mixture_from_json(pj.at("params"));
  fit.fit.resp.probs = read_csv(resp_file).values;
  fit.fit.objective_trace = {pj.at("final_objective").get<double>()};
  if (pj.contains("ols_beta_hat")) {
    fit.ols = OlsFit{matrix_from_json(pj.at("ols_beta_hat")), Matrix()};
  }
  if (fit.fit.resp.n() != d.data.n() || fit.fit.resp.k() != fit.fit.params.k()) {
    throw DimensionError("responsibilities.csv does not match the data and parameters");
  }
  const auto metrics =
      evaluate_fit(d, fit, rc.abc_samples, derive_seed(rc.seed, {kAbcStream, 0, 0}));

  const auto& dir = rc.output_dir;
  ensure_dir(dir);
  write_json(dir / "metrics.json", {{"config_hash", fit_hash},
                                    {"method", to_string(fit.method)},
                                    {"records", metrics_json(metrics)}});
  ReproduceResult single;
  single.runs.push_back(RunRecord{});
  single.runs.back().method = fit.method;
  single.runs.back().metrics = metrics;
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : summarise(single)) {
    rows.push_back({row.metric, class_cell(row.cls), format_double(row.mean),
                    format_double(row.std), format_double(row.median), std::to_string(row.count)});
  }
  write_csv_rows(dir / "summary.csv", {"metric", "class", "mean", "std", "median", "count"}, rows);
  for (const auto& m : metrics) {
    std::cout << m.name << (m.cls ? "[" + std::to_string(m.cls) + "]" : "") << " = "
              << format_double(m.value) << "\n";
  }
  return kExitOk;
}

int cmd_select_k(const RunConfig& rc) {
  const auto d = load_data(rc, 0);
  EMConfig cfg = rc.em;
  cfg.seed = derive_seed(rc.seed, {kInitStream, 0});
  const auto sel = select_k(d.data, rc.k_grid, cfg, rc.criterion, rc.restarts);

  const auto& dir = rc.output_dir;
  ensure_dir(dir);
  json table = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : sel.table) {
    table.push_back({{"k", row.k},
                     {"loss", row.loss},
                     {"objective", row.objective},
                     {"best_restart", row.best_restart + 1},
                     {"degenerate", row.degenerate}});
    rows.push_back({std::to_string(row.k), format_double(row.loss), format_double(row.objective),
                    std::to_string(row.best_restart + 1), row.degenerate ? "1" : "0"});
  }
  write_json(dir / "selection.json", {{"config_hash", rc.hash},
                                      {"criterion", to_string(rc.criterion)},
                                      {"chosen_k", sel.chosen_k},
                                      {"table", std::move(table)}});
  write_csv_rows(dir / "selection.csv", {"k", "loss", "objective", "best_restart", "degenerate"},
                 rows);
  write_json(dir / "manifest.json", manifest(rc, "select-k"));
  std::cout << "chosen K = " << sel.chosen_k << " (" << to_string(rc.criterion) << ")\n";
  return kExitOk;
}

int cmd_reproduce(const RunConfig& rc, int jobs) {
  const auto result = run_reproduce(rc, jobs);
  write_reproduce_outputs(rc, result);
  int failed = 0;
  for (const auto& run : result.runs) failed += run.status != "ok";
  for (const auto& row : summarise(result)) {
    if (row.cls != 0) continue;
    std::cout << row.method << " " << row.metric << ": mean " << format_double(row.mean)
              << " median " << format_double(row.median) << "\n";
  }
  if (failed > 0) {
    std::cerr << failed << " of " << result.runs.size() << " runs failed; see runs.csv\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace cggm::cli
