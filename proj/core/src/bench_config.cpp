#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "hte/bench.hpp"

namespace hte {

int ScenarioEntry::p() const {
  switch (kind) {
    case Kind::LinearFamily: return linear.p;
    case Kind::Pdl1: return 5;
    case Kind::External: return -1;  // known after loading
  }
  return -1;
}

ScenarioEntry resolve_scenario(const std::string& name, const std::string& presets_dir) {
  ScenarioEntry entry;
  entry.name = name;

  const std::filesystem::path preset =
      std::filesystem::path(presets_dir) / (name + ".cfg");
  if (std::filesystem::exists(preset)) {
    const ConfigFile cfg = ConfigFile::parse_file(preset.string());
    const std::string kind = cfg.get_string("scenario", "kind", "linear-family");
    if (kind == "pd-l1") {
      entry.kind = ScenarioEntry::Kind::Pdl1;
      entry.pdl1 = pdl1_from_config(cfg);
    } else {
      entry.kind = ScenarioEntry::Kind::LinearFamily;
      entry.linear = scenario_from_config(cfg);
    }
    return entry;
  }
  if (name == "pd-l1") {
    entry.kind = ScenarioEntry::Kind::Pdl1;
    entry.pdl1 = Pdl1Params{};
    return entry;
  }
  entry.kind = ScenarioEntry::Kind::LinearFamily;
  entry.linear = builtin_linear_scenario(name);  // throws on unknown names
  return entry;
}

Generated generate_scenario(const ScenarioEntry& scenario, std::size_t n, std::uint64_t seed,
                            ForceTreatment force) {
  switch (scenario.kind) {
    case ScenarioEntry::Kind::LinearFamily:
      return gen_linear_family(scenario.linear, n, seed, force);
    case ScenarioEntry::Kind::Pdl1:
      return gen_pdl1(scenario.pdl1, n, seed, force);
    case ScenarioEntry::Kind::External:
      if (force != ForceTreatment::None)
        throw std::invalid_argument("generate_scenario: cannot force treatment on external data");
      return load_external(scenario.path, n, seed, scenario.external_noise_sd);
  }
  throw std::logic_error("generate_scenario: unknown kind");
}

BenchConfig BenchConfig::from_file(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  return from_config(cfg, std::filesystem::path(path).parent_path().string());
}

BenchConfig BenchConfig::from_config(const ConfigFile& cfg, const std::string& base_dir) {
  BenchConfig bc;

  if (cfg.has("run", "n_grid")) {
    bc.n_grid.clear();
    for (double v : cfg.get_double_list("run", "n_grid")) bc.n_grid.push_back(static_cast<int>(v));
  }
  bc.replicates = static_cast<int>(cfg.get_int("run", "replicates", bc.replicates));
  bc.test_size = static_cast<int>(cfg.get_int("run", "test_size", bc.test_size));
  bc.master_seed = static_cast<std::uint64_t>(cfg.get_int("run", "master_seed",
                                                          static_cast<std::int64_t>(bc.master_seed)));
  bc.out_dir = cfg.get_string("run", "out", bc.out_dir);
  bc.workers = static_cast<int>(cfg.get_int("run", "workers", bc.workers));

  const std::string kendall = cfg.get_string("run", "kendall", "tau-b");
  if (kendall == "tau-b")
    bc.kendall = KendallVariant::TauB;
  else if (kendall == "tau-a")
    bc.kendall = KendallVariant::TauA;
  else
    throw std::runtime_error("bench config: kendall must be tau-a or tau-b");
  bc.cba_out_of_fold = cfg.get_bool("run", "cba_out_of_fold", bc.cba_out_of_fold);

  std::string presets_dir = cfg.get_string("scenarios", "presets_dir", "presets");
  if (!base_dir.empty() && std::filesystem::path(presets_dir).is_relative())
    presets_dir = (std::filesystem::path(base_dir) / presets_dir).string();

  if (cfg.has("scenarios", "names"))
    for (const auto& name : cfg.get_list("scenarios", "names"))
      bc.scenarios.push_back(resolve_scenario(name, presets_dir));
  if (cfg.has("scenarios", "external")) {
    for (const auto& path : cfg.get_list("scenarios", "external")) {
      ScenarioEntry entry;
      entry.kind = ScenarioEntry::Kind::External;
      std::filesystem::path fp(path);
      if (!base_dir.empty() && fp.is_relative()) fp = std::filesystem::path(base_dir) / fp;
      entry.path = fp.string();
      entry.name = fp.stem().string();
      entry.external_noise_sd = cfg.get_double("scenarios", "external_noise_sd", 1.0);
      bc.scenarios.push_back(std::move(entry));
    }
  }

  if (cfg.has("models", "names")) bc.models = cfg.get_list("models", "names");
  if (cfg.has("metrics", "names")) bc.metrics = cfg.get_list("metrics", "names");

  bc.forest_trees = static_cast<int>(cfg.get_int("hyperparameters", "forest_trees", bc.forest_trees));
  bc.cf_trees = static_cast<int>(cfg.get_int("hyperparameters", "cf_trees", bc.cf_trees));
  bc.boosting_max_rounds = static_cast<int>(
      cfg.get_int("hyperparameters", "boosting_max_rounds", bc.boosting_max_rounds));
  bc.ensemble_folds =
      static_cast<int>(cfg.get_int("hyperparameters", "ensemble_folds", bc.ensemble_folds));

  bc.check();
  return bc;
}

void BenchConfig::check() const {
  if (scenarios.empty()) throw std::runtime_error("bench config: no scenarios");
  if (models.empty()) throw std::runtime_error("bench config: no models");
  if (replicates < 1) throw std::runtime_error("bench config: replicates >= 1 required");
  if (n_grid.empty()) throw std::runtime_error("bench config: empty n_grid");
  for (int n : n_grid)
    if (n < 50) throw std::runtime_error("bench config: n values must be >= 50");
  if (test_size < 25) throw std::runtime_error("bench config: test_size too small");

  const auto known = known_model_labels();
  for (const auto& m : models)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::runtime_error("bench config: unknown model label: " + m);
  for (const auto& metric : metrics)
    if (metric != "srmse" && metric != "rod" && metric != "srmse_sg" && metric != "rod_sg")
      throw std::runtime_error("bench config: unknown metric: " + metric);
}

}  // namespace hte
