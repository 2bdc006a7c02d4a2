#pragma once

#include <map>
#include <optional>

#include "hte/config.hpp"
#include "hte/dgp.hpp"
#include "hte/numerics.hpp"

namespace hte {

// a scenario entry resolved from config: a built-in/preset generator or an
// external covariate file
struct ScenarioEntry {
  enum class Kind { LinearFamily, Pdl1, External };
  Kind kind = Kind::LinearFamily;
  std::string name;
  ScenarioSpec linear;       // Kind::LinearFamily
  Pdl1Params pdl1;           // Kind::Pdl1
  std::string path;          // Kind::External
  double external_noise_sd = 1.0;

  int p() const;
};

struct BenchConfig {
  std::vector<ScenarioEntry> scenarios;
  std::vector<int> n_grid{100, 250, 500, 750};
  int replicates = 50;
  int test_size = 5000;
  std::vector<std::string> models;
  std::vector<std::string> metrics{"srmse", "rod", "srmse_sg", "rod_sg"};
  std::uint64_t master_seed = 17;
  std::string out_dir = "results";
  int workers = 1;  // 0 = hardware concurrency
  bool resume = false;
  KendallVariant kendall = KendallVariant::TauB;
  bool cba_out_of_fold = false;

  // hyperparameter overrides, mainly for quick runs
  int forest_trees = 500;
  int cf_trees = 500;
  int boosting_max_rounds = 200;
  int ensemble_folds = 3;

  static BenchConfig from_file(const std::string& path);
  static BenchConfig from_config(const ConfigFile& cfg, const std::string& base_dir);
  void check() const;  // throws on invalid settings
};

// resolves a scenario name against <presets_dir>/<name>.cfg, falling back to
// the built-ins
ScenarioEntry resolve_scenario(const std::string& name, const std::string& presets_dir);

Generated generate_scenario(const ScenarioEntry& scenario, std::size_t n, std::uint64_t seed,
                            ForceTreatment force = ForceTreatment::None);

// one line of the results CSV: scenario,p,n,replicate,model,metric,value,status,seed
struct ResultRow {
  std::string scenario;
  int p = 0;
  int n = 0;
  int replicate = 0;
  std::string model;
  std::string metric;
  std::optional<double> value;
  std::string status;  // ok | failed | degenerate
  std::uint64_t seed = 0;
};

std::vector<ResultRow> read_results_csv(const std::string& path);
void write_results_csv(const std::string& path, std::vector<ResultRow> rows);  // canonical order

std::vector<std::string> known_model_labels();

struct RunSummary {
  std::size_t rows_written = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;  // resumed keys
  int exit_code = 0;        // 0 ok, 2 partial failures
};

RunSummary run_benchmark(const BenchConfig& config);

// --------------------------------------------------------------- aggregate ----

// relative excess over the row best: (median - best) / best
std::map<std::string, double> relative_excess(const std::map<std::string, double>& medians);

struct AggregateTables {
  std::string medians_csv;  // scenario,p,n x model pivot of medians
  std::string excess_csv;   // same pivot of relative excess
};

AggregateTables aggregate_results(const std::vector<ResultRow>& rows, const std::string& metric);

double median(std::vector<double> values);

}  // namespace hte
