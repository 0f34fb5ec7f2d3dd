#include "run_config.hpp"

#include "cggm/io.hpp"

#include <cstdio>

namespace cggm::cli {

namespace {

constexpr const char* kPathKeys[] = {"data_dir", "fit_dir", "output_dir"};

json magnitude_json(const MagnitudeRange& r) { return json::array({r.lo, r.hi}); }

MagnitudeRange magnitude_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(std::string(key) + " must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix2_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

Eigen::Matrix2d matrix2_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw ConfigError(std::string(key) + " must be a 2x2 nested array");
  }
  Eigen::Matrix2d m;
  m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>();
  return m;
}

Eigen::Vector2d vector2_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(key) + " must have 2 entries");
  return {j[0].get<double>(), j[1].get<double>()};
}

void reject_unknown(const json& defaults, const json& given, const std::string& prefix) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const auto& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + key + "' must be an object");
      reject_unknown(d, it.value(), key + ".");
    }
  }
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::cggm: return "cggm";
    case Method::ggm: return "ggm";
    case Method::residual_ggm: return "residual-ggm";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "cggm") return Method::cggm;
  if (s == "ggm") return Method::ggm;
  if (s == "residual-ggm") return Method::residual_ggm;
  throw ConfigError("unknown method '" + s + "' (cggm | ggm | residual-ggm)");
}

json default_config(const std::string& scenario) {
  const ToyConfig toy;
  HighDimConfig hd;
  hd.theta_magnitude = {1.25, 2.5};
  hd.intercept_effects = false;
  const EMConfig em;
  const bool high = scenario == "highdim";

  json doc;
  doc["scenario"] = scenario;
  doc["method"] = "cggm";
  doc["k"] = high ? hd.k : 2;
  doc["k_grid"] = {1, 2, 3, 4, 5};
  doc["criterion"] = "bic";
  doc["replications"] = high ? 20 : 50;
  doc["restarts"] = high ? 5 : 10;
  doc["bootstrap_fraction"] = 1.0;
  doc["seed"] = 20240601;
  doc["abc_samples"] = 0;
  doc["data_dir"] = "";
  doc["fit_dir"] = "";
  doc["output_dir"] = "cggm_out";
  doc["em"] = {{"max_iters", em.max_iters},
               {"rel_tol", em.rel_tol},
               {"min_resp_floor", em.min_resp_floor},
               {"init", to_string(em.init)}};
  doc["prox"] = {{"alpha0", em.prox.alpha0},     {"beta", em.prox.beta},
                 {"max_iters", em.prox.max_iters}, {"grad_tol", em.prox.grad_tol},
                 {"obj_tol", em.prox.obj_tol},   {"max_backtracks", em.prox.max_backtracks}};
  const double prec = high ? 0.02 : 0.0;
  const double trans = high ? 0.05 : 0.0;
  doc["penalty"] = {{"lambda1_prec", prec},
                    {"lambda2_prec", prec},
                    {"lambda1_trans", trans},
                    {"lambda2_trans", trans}};
  doc["toy"] = {{"n", toy.n},
                {"beta1", {toy.beta1[0], toy.beta1[1]}},
                {"beta2", {toy.beta2[0], toy.beta2[1]}},
                {"lambda1", matrix2_json(toy.lambda1)},
                {"lambda2", matrix2_json(toy.lambda2)}};
  doc["highdim"] = {{"n", hd.n},
                    {"p", hd.p},
                    {"q", hd.q},
                    {"k", hd.k},
                    {"lambda_offdiag_counts", hd.lambda_offdiag_counts},
                    {"theta_counts", hd.theta_counts},
                    {"lambda_magnitude", magnitude_json(hd.lambda_magnitude)},
                    {"theta_magnitude", magnitude_json(hd.theta_magnitude)},
                    {"intercept_effects", hd.intercept_effects}};
  return doc;
}

void apply_set(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("malformed key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (!node->is_object()) *node = json::object();
    start = dot + 1;
  }
}

json resolve_config(const std::optional<std::filesystem::path>& file,
                    const std::vector<std::string>& overrides) {
  json given = json::object();
  if (file) {
    try {
      given = read_json(*file);
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    } catch (const json::exception& e) {
      throw ConfigError("config '" + file->string() + "': " + e.what());
    }
    if (!given.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  for (const auto& s : overrides) apply_set(given, s);

  const std::string scenario = given.value("scenario", std::string("toy2d"));
  if (scenario != "toy2d" && scenario != "highdim" && scenario != "csv") {
    throw ConfigError("unknown scenario '" + scenario + "' (toy2d | highdim | csv)");
  }
  json doc = default_config(scenario);
  reject_unknown(doc, given, "");
  doc.merge_patch(given);
  return doc;
}

std::string config_hash(const json& cfg) {
  json stripped = cfg;
  for (const char* key : kPathKeys) stripped.erase(key);
  const std::string text = stripped.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig rc;
  rc.doc = doc;
  rc.hash = config_hash(doc);
  try {
    rc.scenario = doc.at("scenario").get<std::string>();
    rc.method = method_from_string(doc.at("method").get<std::string>());
    rc.k = doc.at("k").get<int>();
    rc.k_grid = doc.at("k_grid").get<std::vector<int>>();
    rc.criterion = criterion_from_string(doc.at("criterion").get<std::string>());
    rc.replications = doc.at("replications").get<int>();
    rc.restarts = doc.at("restarts").get<int>();
    rc.bootstrap_fraction = doc.at("bootstrap_fraction").get<double>();
    rc.seed = doc.at("seed").get<std::uint64_t>();
    rc.abc_samples = doc.at("abc_samples").get<Index>();
    rc.data_dir = doc.at("data_dir").get<std::string>();
    rc.fit_dir = doc.at("fit_dir").get<std::string>();
    rc.output_dir = doc.at("output_dir").get<std::string>();

    const auto& em = doc.at("em");
    rc.em.max_iters = em.at("max_iters").get<int>();
    rc.em.rel_tol = em.at("rel_tol").get<double>();
    rc.em.min_resp_floor = em.at("min_resp_floor").get<double>();
    rc.em.init = init_mode_from_string(em.at("init").get<std::string>());
    const auto& prox = doc.at("prox");
    rc.em.prox.alpha0 = prox.at("alpha0").get<double>();
    rc.em.prox.beta = prox.at("beta").get<double>();
    rc.em.prox.max_iters = prox.at("max_iters").get<int>();
    rc.em.prox.grad_tol = prox.at("grad_tol").get<double>();
    rc.em.prox.obj_tol = prox.at("obj_tol").get<double>();
    rc.em.prox.max_backtracks = prox.at("max_backtracks").get<int>();
    const auto& pen = doc.at("penalty");
    rc.em.pen.lambda1_prec = pen.at("lambda1_prec").get<double>();
    rc.em.pen.lambda2_prec = pen.at("lambda2_prec").get<double>();
    rc.em.pen.lambda1_trans = pen.at("lambda1_trans").get<double>();
    rc.em.pen.lambda2_trans = pen.at("lambda2_trans").get<double>();
    rc.em.seed = rc.seed;

    const auto& toy = doc.at("toy");
    rc.toy.n = toy.at("n").get<int>();
    rc.toy.beta1 = vector2_from(toy.at("beta1"), "toy.beta1");
    rc.toy.beta2 = vector2_from(toy.at("beta2"), "toy.beta2");
    rc.toy.lambda1 = matrix2_from(toy.at("lambda1"), "toy.lambda1");
    rc.toy.lambda2 = matrix2_from(toy.at("lambda2"), "toy.lambda2");

    const auto& hd = doc.at("highdim");
    rc.highdim.n = hd.at("n").get<int>();
    rc.highdim.p = hd.at("p").get<int>();
    rc.highdim.q = hd.at("q").get<int>();
    rc.highdim.k = hd.at("k").get<int>();
    rc.highdim.lambda_offdiag_counts = hd.at("lambda_offdiag_counts").get<std::vector<int>>();
    rc.highdim.theta_counts = hd.at("theta_counts").get<std::vector<int>>();
    rc.highdim.lambda_magnitude = magnitude_from(hd.at("lambda_magnitude"), "lambda_magnitude");
    rc.highdim.theta_magnitude = magnitude_from(hd.at("theta_magnitude"), "theta_magnitude");
    rc.highdim.intercept_effects = hd.at("intercept_effects").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  if (rc.replications < 1) throw ConfigError("replications must be >= 1");
  if (rc.restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(rc.bootstrap_fraction > 0.0 && rc.bootstrap_fraction <= 1.0)) {
    throw ConfigError("bootstrap_fraction must lie in (0, 1]");
  }
  if (rc.k < 1) throw ConfigError("k must be >= 1");
  if (rc.k_grid.empty()) throw ConfigError("k_grid must not be empty");
  if (rc.abc_samples < 0) throw ConfigError("abc_samples must be >= 0 (0 means n)");
  try {
    rc.em.validate();
    rc.toy.validate();
    rc.highdim.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

}  // namespace cggm::cli
