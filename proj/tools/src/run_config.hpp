#pragma once

#include "cggm/datagen.hpp"
#include "cggm/em.hpp"
#include "cggm/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cggm::cli {

using nlohmann::json;

/// Raised for malformed configs and command-line usage errors (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Method { cggm, ggm, residual_ggm };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
inline constexpr Method kAllMethods[] = {Method::cggm, Method::ggm, Method::residual_ggm};

/// Full default document for a scenario ("toy2d", "highdim" or "csv").
json default_config(const std::string& scenario);

/// Parses "key.sub=value"; the value is read as JSON when it parses, else as a string.
void apply_set(json& doc, const std::string& assignment);

/// defaults(scenario) <- file <- overrides. Unknown keys are rejected.
json resolve_config(const std::optional<std::filesystem::path>& file,
                    const std::vector<std::string>& overrides);

/// FNV-1a of the canonical dump, ignoring the path keys (data_dir, fit_dir,
/// output_dir), as 16 hex digits.
std::string config_hash(const json& cfg);

/// Typed view of a resolved config document.
struct RunConfig {
  json doc;
  std::string hash;

  std::string scenario;
  Method method = Method::cggm;
  int k = 2;
  std::vector<int> k_grid;
  Criterion criterion = Criterion::bic;
  int replications = 1;
  int restarts = 1;
  double bootstrap_fraction = 1.0;
  std::uint64_t seed = 0;
  Index abc_samples = 0;  // 0: one synthetic draw per sample
  std::filesystem::path data_dir;
  std::filesystem::path fit_dir;
  std::filesystem::path output_dir;
  EMConfig em;
  ToyConfig toy;
  HighDimConfig highdim;

  static RunConfig from_json(const json& doc);
};

/// Seed streams shared by every command.
enum SeedStream : std::uint64_t { kDataStream = 1, kInitStream = 2, kAbcStream = 3, kBootStream = 4 };

}  // namespace cggm::cli
