#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hte/bench.hpp"
#include "hte/dataset_io.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, int workers_override,
            bool resume) {
  hte::BenchConfig config = hte::BenchConfig::from_file(config_path);
  if (!out_override.empty()) config.out_dir = out_override;
  if (workers_override > 0) config.workers = workers_override;
  config.resume = resume;

  const hte::RunSummary summary = hte::run_benchmark(config);
  std::cout << "rows: " << summary.rows_written << ", skipped: " << summary.skipped
            << ", failures: " << summary.failures << "\n";
  std::cout << "results: " << (std::filesystem::path(config.out_dir) / "results.csv").string()
            << "\n";
  return summary.exit_code;
}

int cmd_aggregate(const std::string& in_dir, const std::string& metric,
                  const std::string& out_path) {
  const std::string results_path =
      (std::filesystem::path(in_dir) / "results.csv").string();
  const auto rows = hte::read_results_csv(results_path);
  const hte::AggregateTables tables = hte::aggregate_results(rows, metric);

  std::ofstream medians(out_path);
  if (!medians) throw std::runtime_error("cannot write " + out_path);
  medians << tables.medians_csv;

  std::filesystem::path excess_path(out_path);
  excess_path.replace_extension(".excess" + excess_path.extension().string());
  std::ofstream excess(excess_path);
  if (!excess) throw std::runtime_error("cannot write " + excess_path.string());
  excess << tables.excess_csv;

  std::cout << "medians: " << out_path << "\n";
  std::cout << "excess:  " << excess_path.string() << "\n";
  return 0;
}

int cmd_gen(const std::string& scenario, const std::string& presets_dir, int n, std::uint64_t seed,
            const std::string& out_path) {
  const hte::ScenarioEntry entry = hte::resolve_scenario(scenario, presets_dir);
  const hte::Generated gen = hte::generate_scenario(entry, static_cast<std::size_t>(n), seed);
  hte::write_dataset_csv(out_path, hte::to_csv_dataset(gen.trial, &gen.eval));
  std::cout << "wrote " << n << " rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CATE estimation benchmark runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, metric = "srmse", out_file;
  std::string scenario, presets_dir = "presets", gen_out;
  int workers = 0, gen_n = 1000;
  std::uint64_t gen_seed = 17;
  bool resume = false;

  auto* run = app.add_subcommand("run", "run the benchmark described by a config file");
  run->add_option("--config", config_path, "benchmark config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--workers", workers, "worker thread count (overrides config)");
  run->add_flag("--resume", resume, "skip (scenario,n,replicate,model) keys already in results.csv");

  auto* agg = app.add_subcommand("aggregate", "pivot results into median and excess tables");
  agg->add_option("--in", in_dir, "directory containing results.csv")->required();
  agg->add_option("--metric", metric, "srmse | rod | srmse_sg | rod_sg")
      ->check(CLI::IsMember({"srmse", "rod", "srmse_sg", "rod_sg"}));
  agg->add_option("--out", out_file, "median pivot CSV path (excess table lands beside it)")
      ->required();

  auto* gen = app.add_subcommand("gen", "write one generated dataset as CSV");
  gen->add_option("--scenario", scenario, "preset name or preset file stem")->required();
  gen->add_option("--presets", presets_dir, "preset directory");
  gen->add_option("--n", gen_n, "row count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, workers, resume);
    if (agg->parsed()) return cmd_aggregate(in_dir, metric, out_file);
    if (gen->parsed()) return cmd_gen(scenario, presets_dir, gen_n, gen_seed, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
