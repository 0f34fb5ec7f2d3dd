#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int default_jobs() {
  if (const char* env = std::getenv("CGGM_MIX_JOBS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring malformed CGGM_MIX_JOBS='" << env << "'\n";
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cggm::cli;

  CLI::App app{"Mixtures of conditional Gaussian graphical models"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  int jobs = default_jobs();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override a config key: key.sub=value (repeatable)");
  };
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  auto* fit = app.add_subcommand("fit", "Fit one method, keeping the best restart");
  auto* eval = app.add_subcommand("evaluate", "Score a fit against data and truth");
  auto* sel = app.add_subcommand("select-k", "Choose K by an information criterion");
  auto* rep = app.add_subcommand("reproduce", "Run all methods over replications and restarts");
  for (auto* sub : {gen, fit, eval, sel, rep}) add_common(sub);
  rep->add_option("-j,--jobs", jobs, "Concurrent replication/restart tasks (default CGGM_MIX_JOBS or 1)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    const auto rc = RunConfig::from_json(resolve_config(file, sets));
    if (gen->parsed()) return cmd_generate(rc);
    if (fit->parsed()) return cmd_fit(rc);
    if (eval->parsed()) return cmd_evaluate(rc);
    if (sel->parsed()) return cmd_select_k(rc);
    return cmd_reproduce(rc, jobs);
  } catch (const cggm::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const cggm::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const cggm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
