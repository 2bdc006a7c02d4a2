// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hte/bench.hpp"
#include "hte/dataset_io.hpp"
#include "hte/ensembles.hpp"
#include "hte/metrics.hpp"
#include "hte/random.hpp"
#include "support/oracles.hpp"

using namespace hte;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << name << " ("
            << static_cast<int>(seconds) << "s)";
  if (!detail.empty()) std::cout << " - " << detail;
  std::cout << std::endl;
  if (!pass) ++failures;
}

template <typename Fn>
void criterion(int index, const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    detail = fn();
    pass = true;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(index, name, pass, detail, secs);
}

void require(bool cond, const std::string& message) {
  if (!cond) throw std::runtime_error(message);
}

std::filesystem::path work_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hte_acceptance_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- 1 -------

std::string oracle_metric_identity() {
  const auto dir = work_dir("oracle");

  // an external-scenario file exercises the third generator kind
  const std::string external_path = (dir / "external.csv").string();
  {
    const Generated gen = gen_linear_family(builtin_linear_scenario("slightly-nl-p10"), 600, 5);
    write_dataset_csv(external_path, to_csv_dataset(gen.trial, &gen.eval));
  }

  BenchConfig config;
  config.scenarios = {resolve_scenario("linear-p10", "/nonexistent"),
                      resolve_scenario("pd-l1", "/nonexistent")};
  ScenarioEntry external;
  external.kind = ScenarioEntry::Kind::External;
  external.path = external_path;
  external.name = "external";
  config.scenarios.push_back(external);
  config.n_grid = {100};
  config.replicates = 2;
  config.test_size = 400;
  config.models = {"Oracle"};
  config.metrics = {"srmse", "rod"};
  config.master_seed = 7;
  config.out_dir = (dir / "results").string();
  run_benchmark(config);

  const auto rows = read_results_csv((dir / "results" / "results.csv").string());
  require(rows.size() == 3 * 2 * 2, "unexpected row count");
  for (const auto& row : rows) {
    require(row.status == "ok", row.scenario + " row not ok");
    require(*row.value == 0.0, row.scenario + "/" + row.metric + " not exactly 0");
  }
  std::filesystem::remove_all(dir);
  return "srmse = rod = 0 exactly on all scenario/replicate rows";
}

// ---------------------------------------------------------------- 2 -------

std::string dgp_oracle_equivalence() {
  // PD-L1: common-noise pairing, 1e-10
  {
    const std::size_t n = 20000;
    const Generated g1 = gen_pdl1(Pdl1Params{}, n, 23, ForceTreatment::Treated);
    const Generated g0 = gen_pdl1(Pdl1Params{}, n, 23, ForceTreatment::Control);
    const Generated gen = gen_pdl1(Pdl1Params{}, n, 23);
    const double gap =
        ((g1.trial.outcome - g0.trial.outcome) - gen.eval.true_cate).cwiseAbs().maxCoeff();
    require(gap < 1e-10, "pd-l1 paired oracle gap " + std::to_string(gap));
  }

  // linear family: forced-arm Monte-Carlo at n = 20000, within 3 SE
  for (const auto& name : builtin_linear_scenario_names()) {
    const ScenarioSpec spec = builtin_linear_scenario(name);
    const std::size_t n = 20000;
    const Generated g1 = gen_linear_family(spec, n, 29, ForceTreatment::Treated);
    const Generated g0 = gen_linear_family(spec, n, 29, ForceTreatment::Control);
    const Generated gen = gen_linear_family(spec, n, 29);
    const double dim = (g1.trial.outcome - g0.trial.outcome).mean();
    const double mean_tau = gen.eval.true_cate.mean();
    const double se = std::sqrt(
        (gen.eval.true_cate.array() - mean_tau).square().mean() / static_cast<double>(n));
    require(std::abs(dim - mean_tau) <= std::max(3.0 * se, 1e-10),
            name + ": DiM " + std::to_string(dim) + " vs mean tau " + std::to_string(mean_tau));
  }

  // external loader: tau column must equal mu1 - mu0 on the held-out side
  {
    const auto dir = work_dir("dgp");
    const std::string path = (dir / "ext.csv").string();
    const Generated gen = gen_linear_family(builtin_linear_scenario("linear-p10"), 800, 31);
    write_dataset_csv(path, to_csv_dataset(gen.trial, &gen.eval));
    const Generated split = load_external(path, 500, 37);
    require(split.eval.mu0.has_value(), "external eval lost mu columns");
    const double gap =
        (*split.eval.mu1 - *split.eval.mu0 - split.eval.true_cate).cwiseAbs().maxCoeff();
    require(gap < 1e-10, "external tau vs mu gap " + std::to_string(gap));
    std::filesystem::remove_all(dir);
  }
  return "pd-l1 paired 1e-10; linear family within 3 SE at n=20000; external tau = mu1 - mu0";
}

// ---------------------------------------------------------------- 3 -------

std::string solver_oracles() {
  // NNLS and simplex LS vs 0.02-step grids on 100 random instances each
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(stable_seed(41, s));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.index(6));
    const Matrix X = oracles::random_matrix(n, d, stable_seed(42, s));
    const Vector y = oracles::random_vector(n, stable_seed(43, s)) * 1.5;

    const Vector beta = fit_nnls(DesignMatrix(X), y).coefficients;
    const double nnls_grid = oracles::nnls_grid_minimum(X, y, 3.0, 0.02);
    require(oracles::ls_objective(X, y, beta) <= nnls_grid + 1e-4,
            "nnls above grid optimum at instance " + std::to_string(s));

    if (d >= 2) {
      const Vector alpha = fit_simplex_ls(DesignMatrix(X), y).coefficients;
      const double splx_grid = oracles::simplex_grid_minimum(X, y, 0.02);
      require(oracles::ls_objective(X, y, alpha) <= splx_grid + 1e-4,
              "simplex ls above grid optimum at instance " + std::to_string(s));
      require(std::abs(alpha.sum() - 1.0) <= 1e-8, "simplex weights do not sum to 1");
    }
  }

  // elastic net KKT residual < 1e-5 on 100 random instances
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(stable_seed(47, s));
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.index(41));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(10));
    const Matrix X = oracles::random_matrix(n, d, stable_seed(48, s));
    const Vector y = oracles::random_vector(n, stable_seed(49, s));
    const double lambda1 = 0.02 + 0.3 * rng.uniform();
    const double lambda2 = 0.2 * rng.uniform();
    const DesignMatrix Xd(X);
    const LinearFit fit = fit_elastic_net(Xd, y, lambda1, lambda2);

    const Standardization st = standardize_columns(Xd, nullptr);
    Matrix Z = X;
    for (Eigen::Index j = 0; j < d; ++j) Z.col(j) = (Z.col(j).array() - st.mean[j]) / st.scale[j];
    const Vector beta_std = fit.coefficients.cwiseProduct(st.scale);
    const Vector resid = (y.array() - y.mean()).matrix() - Z * beta_std;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double grad = -Z.col(j).dot(resid) / static_cast<double>(n) + lambda2 * beta_std[j];
      double kkt = 0.0;
      if (beta_std[j] > 1e-9)
        kkt = std::abs(grad + lambda1);
      else if (beta_std[j] < -1e-9)
        kkt = std::abs(grad - lambda1);
      else
        kkt = std::max(0.0, std::abs(grad) - lambda1);
      require(kkt < 1e-5, "elastic net KKT residual " + std::to_string(kkt));
    }
  }

  // Kendall fast path vs pair enumeration on 1000 vectors, exact equality
  int compared = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(stable_seed(53, s));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(199));
    Vector u(n), v(n);
    const bool tie_heavy = rng.bernoulli(0.5);
    const int levels = tie_heavy ? 1 + static_cast<int>(rng.index(8)) : 1000000;
    bool u_const = true, v_const = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
      v[i] = rng.bernoulli(0.3) ? u[i]
                                : static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
      if (u[i] != u[0]) u_const = false;
      if (v[i] != v[0]) v_const = false;
    }
    if (u_const || v_const) continue;
    ++compared;
    require(kendall_tau(u, v) == oracles::naive_kendall_tau(u, v),
            "kendall mismatch at instance " + std::to_string(s));
  }
  return "nnls+simplex beat 0.02 grids (100 instances), enet KKT < 1e-5 (100), kendall exact on " +
         std::to_string(compared) + " vectors";
}

// ---------------------------------------------------------------- 4 -------

std::string ensemble_sanity() {
  // noiseless Y = x + (1 + x) A with exact nuisances and a planted oracle
  Rng rng(59);
  const Eigen::Index n = 400;
  Matrix X(n, 2);
  Vector a(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    a[i] = i % 2 == 0 ? 1.0 : 0.0;
    y[i] = X(i, 0) + (1.0 + X(i, 0)) * a[i];
  }
  const TrialDataset data{DesignMatrix(X), a, y, "planted", 59};
  const Vector x1 = X.col(0);
  const Vector tau = Vector(1.0 + x1.array());

  MemberPredictions mp;
  mp.labels = {"oracle", "noise-a", "noise-b"};
  mp.out_of_fold.resize(n, 3);
  mp.out_of_fold.col(0) = tau;
  mp.out_of_fold.col(1) = Vector(0.4 * X.col(1).array() + oracles::random_vector(n, 60).array());
  mp.out_of_fold.col(2) = oracles::random_vector(n, 61);

  NuisanceSet ns;
  ns.oof_m = Vector(x1.array() + 0.5 * (1.0 + x1.array()));
  ns.oof_pi = Vector::Constant(n, 0.5);
  ns.oof_mu0 = x1;
  ns.oof_mu1 = Vector(1.0 + 2.0 * x1.array());

  const EnsembleFit r = fit_r_stacking(data, mp, ns);
  require(std::abs(r.weights[0] - 1.0) < 1e-4,
          "r-stacking oracle weight " + std::to_string(r.weights[0]));
  require(std::abs(r.intercept_b) < 1e-4 && std::abs(r.intercept_c) < 1e-4,
          "r-stacking intercepts not ~0");

  const Vector pi = Vector::Constant(n, 0.5);
  const EnsembleFit cs = fit_causal_stacking(data, mp, ns.oof_mu0, ns.oof_mu1, pi);
  require(cs.weights[0] >= 0.95,
          "causal-stacking oracle weight " + std::to_string(cs.weights[0]));

  const EnsembleFit ts = fit_t_stacking(data, mp, tau);  // exact validation T-target
  require(ts.weights[0] >= 0.95, "t-stacking oracle weight " + std::to_string(ts.weights[0]));

  // CBA: two identical members, one reversed
  Matrix preds(n, 3);
  preds.col(0) = tau;
  preds.col(1) = tau;
  preds.col(2) = -tau;
  const CbaResult cba = cba_combine(preds, {"a", "b", "rev"});
  require(cba.fit.selected == std::vector<int>{0, 1}, "cba did not select the identical pair");
  require(std::abs(cba.diagnostics.mean_corr[0] - 0.0) < 1e-12 &&
              std::abs(cba.diagnostics.mean_corr[2] + 1.0) < 1e-12,
          "cba hand-enumerated diagnostics mismatch");
  require(((preds * cba.fit.weights) - tau).cwiseAbs().maxCoeff() < 1e-12,
          "cba ensemble is not the identical members' prediction");

  return "planted-oracle weights: R=" + std::to_string(r.weights[0]) +
         ", CS=" + std::to_string(cs.weights[0]) + ", TS=" + std::to_string(ts.weights[0]) +
         "; CBA selected the identical pair";
}

// ------------------------------------------------------------- 5 + 6 ------

struct OrderingRun {
  std::map<std::string, std::map<int, std::map<std::string, double>>> medians;
  // scenario -> n -> model -> median srmse
};

OrderingRun shared_run;

std::string table_ordering() {
  const auto dir = work_dir("ordering");
  BenchConfig config;
  config.scenarios = {resolve_scenario("linear-p10", HTE_PRESETS_DIR),
                      resolve_scenario("slightly-nl-p10", HTE_PRESETS_DIR)};
  config.n_grid = {100, 500};
  config.replicates = 10;
  config.test_size = 5000;
  config.models = {"CF",    "H-CF",      "S-Boost",    "T-Linear",        "T-Elastic-Net",
                   "X-RF",  "X-Boosting", "X-AGLM",    "DR-RF",           "Stacked-X",
                   "R-Stacking", "T-Stacking", "Causal-Stacking", "CBA"};
  config.metrics = {"srmse"};
  config.master_seed = 20240809;
  config.out_dir = (dir / "results").string();
  config.workers = 0;  // all cores
  const RunSummary summary = run_benchmark(config);
  require(summary.failures == 0, std::to_string(summary.failures) + " failed rows");

  const auto rows = read_results_csv((dir / "results" / "results.csv").string());
  std::map<std::string, std::map<int, std::map<std::string, std::vector<double>>>> values;
  for (const auto& row : rows)
    if (row.status == "ok") values[row.scenario][row.n][row.model].push_back(*row.value);
  for (const auto& [scenario, by_n] : values)
    for (const auto& [n, by_model] : by_n)
      for (const auto& [model, v] : by_model)
        shared_run.medians[scenario][n][model] = median(v);

  const auto& linear500 = shared_run.medians.at("linear-p10").at(500);
  const double t_linear = linear500.at("T-Linear");
  for (const std::string& other : {"X-RF", "X-Boosting", "DR-RF", "CF", "H-CF"})
    require(t_linear < linear500.at(other),
            "T-Linear (" + std::to_string(t_linear) + ") not below " + other + " (" +
                std::to_string(linear500.at(other)) + ")");

  const auto& nl500 = shared_run.medians.at("slightly-nl-p10").at(500);
  double best = nl500.begin()->second;
  for (const auto& [model, v] : nl500) best = std::min(best, v);
  const double stacked_excess = (nl500.at("Stacked-X") - best) / best;
  const double cba_excess = (nl500.at("CBA") - best) / best;
  require(stacked_excess <= 0.15,
          "Stacked-X excess " + std::to_string(stacked_excess) + " > 0.15");
  require(cba_excess <= 0.15, "CBA excess " + std::to_string(cba_excess) + " > 0.15");

  std::filesystem::remove_all(dir);
  std::ostringstream detail;
  detail << "T-Linear " << t_linear << " best-in-row on linear-p10@500; excess Stacked-X "
         << stacked_excess << ", CBA " << cba_excess << " on slightly-nl-p10@500";
  return detail.str();
}

std::string sample_size_monotonicity() {
  require(!shared_run.medians.empty(), "criterion 5 run unavailable");
  std::ostringstream detail;
  for (const auto& [scenario, by_n] : shared_run.medians) {
    const auto& at100 = by_n.at(100);
    const auto& at500 = by_n.at(500);
    for (const auto& [model, median100] : at100) {
      const double median500 = at500.at(model);
      require(median500 <= median100, scenario + "/" + model + ": median at 500 (" +
                                          std::to_string(median500) + ") > at 100 (" +
                                          std::to_string(median100) + ")");
    }
  }
  return "median sRMSE at n=500 <= n=100 for every model on both presets";
}

// ---------------------------------------------------------------- 7 -------

std::string subgroup_machinery() {
  // p(p-1) boxes of ~20% size on independent covariates
  Rng rng(67);
  const Eigen::Index m = 5000;
  Matrix X(m, 5);
  for (Eigen::Index i = 0; i < m; ++i)
    for (int j = 0; j < 5; ++j) X(i, j) = rng.uniform();
  const auto subgroups = enumerate_subgroups(DesignMatrix(X));
  require(subgroups.size() == 20, "expected 20 subgroups, got " +
                                      std::to_string(subgroups.size()));
  std::vector<double> sizes;
  for (const auto& sg : subgroups) sizes.push_back(static_cast<double>(sg.size()));
  const double med = quantile(sizes, 0.5);
  require(med >= 0.18 * static_cast<double>(m) && med <= 0.22 * static_cast<double>(m),
          "median subgroup size " + std::to_string(med));

  // oracle model scores 0 on subgroup sRMSE
  const Generated gen = gen_linear_family(builtin_linear_scenario("slightly-nl-p10"), 5000, 71);
  const auto eval_groups = enumerate_subgroups(gen.eval.covariates);
  const SubgroupMetrics oracle = subgroup_metrics(gen.eval.true_cate, gen.eval, eval_groups);
  require(oracle.srmse_sg == 0.0, "oracle subgroup srmse not 0");

  // observed-data DiM on crafted 4-unit subgroups
  Matrix Xs = oracles::random_matrix(8, 2, 73);
  Vector a(8), y(8);
  a << 1, 1, 0, 0, 1, 1, 0, 0;
  y << 3, 5, 1, 2, 10, 30, 10, 10;
  const TrialDataset crafted{DesignMatrix(Xs), a, y, "", 0};
  SubgroupSpec g1, g2;
  g1.member_mask = {true, true, true, true, false, false, false, false};
  g2.member_mask = {false, false, false, false, true, true, true, true};
  require(subgroup_dim_estimate(crafted, g1) == 2.5, "dim arithmetic (3+5)/2-(1+2)/2 != 2.5");
  require(subgroup_dim_estimate(crafted, g2) == 10.0, "dim arithmetic 20-10 != 10");

  return "20 boxes, median size " + std::to_string(static_cast<int>(med)) +
         "/5000; oracle srmse_sg = 0; DiM hand arithmetic exact";
}

// ---------------------------------------------------------------- 8 -------

std::string benchmark_reproducibility() {
  const auto dir = work_dir("repro");

  // drive the actual CLI twice with the same config
  const std::string cfg_path = (dir / "bench.cfg").string();
  {
    std::ofstream out(cfg_path);
    out << "[run]\nn_grid = 60\nreplicates = 2\ntest_size = 150\nmaster_seed = 5\n"
        << "[scenarios]\nnames = linear-p10, pd-l1\npresets_dir = " << HTE_PRESETS_DIR << "\n"
        << "[models]\nnames = T-Linear, S-Boost, CF\n"
        << "[metrics]\nnames = srmse, rod\n"
        << "[hyperparameters]\nforest_trees = 30\ncf_trees = 30\n";
  }
  const std::string out1 = (dir / "run1").string();
  const std::string out2 = (dir / "run2").string();
  const std::string exe = HTE_BENCH_EXE;
  for (const auto& out : {out1, out2}) {
    const std::string cmd = exe + " run --config " + cfg_path + " --out " + out + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    require(rc == 0, "bench run exited with " + std::to_string(rc));
  }
  require(slurp(out1 + "/results.csv") == slurp(out2 + "/results.csv"),
          "bench run is not byte-reproducible");

  // aggregate: excess table has exactly one 0 per row and no negatives
  const std::string agg_path = (dir / "agg.csv").string();
  const std::string agg_cmd =
      exe + " aggregate --in " + out1 + " --metric srmse --out " + agg_path + " 2>/dev/null";
  require(std::system(agg_cmd.c_str()) == 0, "bench aggregate failed");
  const std::string excess_csv = slurp((dir / "agg.excess.csv").string());
  std::istringstream in(excess_csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    int zeros = 0;
    for (std::size_t f = 3; f < fields.size(); ++f) {
      if (fields[f].empty()) continue;
      const double v = std::stod(fields[f]);
      require(v >= 0.0, "negative excess entry");
      if (v == 0.0) ++zeros;
    }
    require(zeros == 1, "excess row without exactly one zero");
  }

  // the published-medians arithmetic check
  const auto excess = relative_excess(
      {{"H-CF", 0.79}, {"Stacked-X", 0.81}, {"CBA", 0.81}, {"S-learner", 1.20}});
  require(excess.at("H-CF") == 0.0, "H-CF excess not 0");
  require(std::abs(excess.at("Stacked-X") - 0.0253) < 1e-4, "Stacked-X excess arithmetic");
  require(std::abs(excess.at("CBA") - 0.0253) < 1e-4, "CBA excess arithmetic");
  require(std::abs(excess.at("S-learner") - 0.5190) < 1e-4, "S-learner excess arithmetic");

  std::filesystem::remove_all(dir);
  return "CLI runs byte-identical; excess pivot well-formed; 0.79 -> {0, 0.0253, 0.0253, 0.5190}";
}

}  // namespace

int main() {
  std::cout << "acceptance suite" << std::endl;
  criterion(1, "oracle-metric identity", oracle_metric_identity);
  criterion(2, "DGP oracle equivalence", dgp_oracle_equivalence);
  criterion(3, "solver oracles", solver_oracles);
  criterion(4, "ensemble sanity", ensemble_sanity);
  criterion(5, "qualitative table ordering at reduced scale", table_ordering);
  criterion(6, "sample-size monotonicity", sample_size_monotonicity);
  criterion(7, "subgroup machinery", subgroup_machinery);
  criterion(8, "benchmark reproducibility", benchmark_reproducibility);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures;
}
