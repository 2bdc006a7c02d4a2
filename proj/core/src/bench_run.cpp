#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hte/bench.hpp"
#include "hte/causal_forest.hpp"
#include "hte/ensembles.hpp"
#include "hte/metrics.hpp"
#include "hte/random.hpp"

namespace hte {

std::vector<std::string> known_model_labels() {
  return {"CF",       "H-CF",      "S-Boost",   "T-Linear",   "T-Elastic-Net",
          "X-RF",     "X-Boosting", "X-AGLM",   "DR-RF",      "Stacked-X",
          "R-Stacking", "T-Stacking", "Causal-Stacking", "CBA", "Oracle"};
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class LambdaCateLearner : public CateLearner {
 public:
  using Fn = std::function<CateModelPtr(const TrialDataset&)>;
  LambdaCateLearner(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}
  CateModelPtr fit(const TrialDataset& data) const override { return fn_(data); }
  std::string label() const override { return label_; }

 private:
  Fn fn_;
  std::string label_;
};

// Per-replicate model fitting. Ensemble assets (cross-fitted members,
// nuisances, T-learner target) are computed once and shared by the four
// ensemble methods.
class ReplicateRunner {
 public:
  ReplicateRunner(const TrialDataset& train, std::uint64_t seed, const BenchConfig& config)
      : train_(train), seed_(seed), config_(config) {}

  Vector predict(const std::string& label, const DesignMatrix& eval_X) {
    if (label == "CF" || label == "H-CF") {
      CausalForestParams params;
      params.honesty = label == "H-CF";
      params.n_trees = config_.cf_trees;
      params.seed = stable_seed(seed_, "model", label);
      return fit_causal_forest(train_, params)->predict_cate(eval_X);
    }
    const std::uint64_t ms = stable_seed(seed_, "model", label);
    if (label == "S-Boost")
      return fit_s_learner(train_, make_boosting_cv(ms, config_.boosting_max_rounds), label)
          ->predict_cate(eval_X);
    if (label == "T-Linear")
      return fit_t_learner(train_, make_ols_regressor(), make_ols_regressor(), label)
          ->predict_cate(eval_X);
    if (label == "T-Elastic-Net")
      return fit_t_learner(train_, make_elastic_net_cv(stable_seed(ms, "mu0")),
                           make_elastic_net_cv(stable_seed(ms, "mu1")), label)
          ->predict_cate(eval_X);
    if (label == "X-RF")
      return fit_x_learner(train_, make_random_forest(stable_seed(ms, "outcome"), config_.forest_trees),
                           make_random_forest(stable_seed(ms, "effect"), config_.forest_trees),
                           {std::nullopt, label})
          ->predict_cate(eval_X);
    if (label == "X-Boosting")
      return fit_x_learner(train_, make_boosting_cv(stable_seed(ms, "outcome"), config_.boosting_max_rounds),
                           make_boosting_cv(stable_seed(ms, "effect"), config_.boosting_max_rounds),
                           {std::nullopt, label})
          ->predict_cate(eval_X);
    if (label == "X-AGLM")
      return fit_x_learner(train_, make_aglm_cv(stable_seed(ms, "outcome")),
                           make_aglm_cv(stable_seed(ms, "effect")), {std::nullopt, label})
          ->predict_cate(eval_X);
    if (label == "DR-RF")
      return fit_dr_learner(train_, make_random_forest(stable_seed(ms, "outcome"), config_.forest_trees),
                            make_random_forest(stable_seed(ms, "final"), config_.forest_trees),
                            DrMode::Crossfit, ms, label)
          ->predict_cate(eval_X);
    if (label == "Stacked-X")
      return fit_stacked_x_learner(train_, make_stacking_base_set(ms), ms, label)
          ->predict_cate(eval_X);
    if (label == "R-Stacking") {
      ensure_ensemble_assets();
      const EnsembleFit fit = fit_r_stacking(train_, *members_, *nuisances_);
      return combine_members(eval_X, fit.weights, fit.intercept_c);
    }
    if (label == "Causal-Stacking") {
      ensure_ensemble_assets();
      const Vector pi = Vector::Constant(train_.n(), 0.5);  // randomized allocation
      const EnsembleFit fit =
          fit_causal_stacking(train_, *members_, nuisances_->oof_mu0, nuisances_->oof_mu1, pi);
      return combine_members(eval_X, fit.weights, 0.0);
    }
    if (label == "T-Stacking") {
      ensure_ensemble_assets();
      const EnsembleFit fit = fit_t_stacking(train_, *members_, t_target_);
      return combine_members(eval_X, fit.weights, 0.0);
    }
    if (label == "CBA") {
      ensure_ensemble_assets();
      Matrix preds;
      if (config_.cba_out_of_fold) {
        preds = members_->out_of_fold;
      } else {
        preds.resize(train_.n(), static_cast<Eigen::Index>(members_->refit.size()));
        for (std::size_t k = 0; k < members_->refit.size(); ++k)
          preds.col(static_cast<Eigen::Index>(k)) =
              members_->refit[k]->predict_cate(train_.covariates);
      }
      const CbaResult result = cba_combine(preds, members_->labels, members_->refit, config_.kendall);
      return combine_members(eval_X, result.fit.weights, 0.0);
    }
    throw std::runtime_error("unknown model label: " + label);
  }

 private:
  // member predictions on the (fixed per-task) evaluation covariates,
  // computed once and combined with the same accumulation order as
  // CombinedCateModel
  Vector combine_members(const DesignMatrix& eval_X, const Vector& weights, double offset) {
    if (member_eval_.size() == 0) {
      member_eval_.resize(eval_X.rows(), static_cast<Eigen::Index>(members_->refit.size()));
      for (std::size_t k = 0; k < members_->refit.size(); ++k)
        member_eval_.col(static_cast<Eigen::Index>(k)) =
            members_->refit[k]->predict_cate(eval_X);
    }
    Vector out = Vector::Constant(member_eval_.rows(), offset);
    for (Eigen::Index k = 0; k < weights.size(); ++k)
      if (weights[k] != 0.0) out += weights[k] * member_eval_.col(k);
    return out;
  }

  void ensure_ensemble_assets() {
    if (members_) return;
    const std::uint64_t es = stable_seed(seed_, "ensemble");

    auto x_learner_member = [&](const std::string& label, auto base_factory) {
      return std::make_shared<LambdaCateLearner>(
          [label, base_factory](const TrialDataset& data) {
            return fit_x_learner(data, base_factory("outcome"), base_factory("effect"),
                                 {std::nullopt, label});
          },
          label);
    };
    const int forest_trees = config_.forest_trees;
    const int boost_rounds = config_.boosting_max_rounds;
    const int cf_trees = config_.cf_trees;

    std::vector<CateLearnerPtr> zoo;
    zoo.push_back(x_learner_member("X-RF", [es, forest_trees](const char* stage) {
      return make_random_forest(stable_seed(es, "x-rf", stage), forest_trees);
    }));
    zoo.push_back(x_learner_member("X-Boosting", [es, boost_rounds](const char* stage) {
      return make_boosting_cv(stable_seed(es, "x-boost", stage), boost_rounds);
    }));
    zoo.push_back(x_learner_member("X-AGLM", [es](const char* stage) {
      return make_aglm_cv(stable_seed(es, "x-aglm", stage));
    }));
    zoo.push_back(std::make_shared<LambdaCateLearner>(
        [es](const TrialDataset& data) {
          return fit_t_learner(data, make_elastic_net_cv(stable_seed(es, "t-en", "mu0")),
                               make_elastic_net_cv(stable_seed(es, "t-en", "mu1")),
                               "T-Elastic-Net");
        },
        "T-Elastic-Net"));
    for (bool honesty : {true, false}) {
      const std::string label = honesty ? "H-CF" : "CF";
      zoo.push_back(std::make_shared<LambdaCateLearner>(
          [es, honesty, cf_trees, label](const TrialDataset& data) -> CateModelPtr {
            CausalForestParams params;
            params.honesty = honesty;
            params.n_trees = cf_trees;
            params.seed = stable_seed(es, "cf", label);
            return fit_causal_forest(data, params);
          },
          label));
    }

    members_ = std::make_unique<MemberPredictions>(
        crossfit_member_predictions(train_, zoo, config_.ensemble_folds, es));

    // RF nuisances for the stacking objectives, logistic propensity
    NuisanceOptions opts;
    opts.k_folds = config_.ensemble_folds;
    opts.seed = stable_seed(es, "nuisance");
    RandomForestRegressor rf{[&] {
      ForestParams fp;
      fp.n_trees = forest_trees;
      fp.seed = stable_seed(es, "nuisance-rf");
      return fp;
    }()};
    nuisances_ = std::make_unique<NuisanceSet>(compute_nuisances(train_, rf, opts));

    // out-of-fold T-learner target for T-stacking
    const FoldAssignment folds =
        make_folds(train_, config_.ensemble_folds, stable_seed(es, "t-target"));
    t_target_.resize(train_.n());
    for (int f = 0; f < folds.k; ++f) {
      const auto train_idx = folds.out_of_fold_indices(f);
      const auto val_idx = folds.fold_indices(f);
      const CateModelPtr t_fold = fit_t_learner(
          train_.select_rows(train_idx),
          make_random_forest(stable_seed(es, "t-target-mu0", static_cast<std::uint64_t>(f)), forest_trees),
          make_random_forest(stable_seed(es, "t-target-mu1", static_cast<std::uint64_t>(f)), forest_trees),
          "T-RF");
      const Vector pred = t_fold->predict_cate(train_.covariates.select_rows(val_idx));
      for (std::size_t i = 0; i < val_idx.size(); ++i)
        t_target_[static_cast<Eigen::Index>(val_idx[i])] = pred[static_cast<Eigen::Index>(i)];
    }
  }

  const TrialDataset& train_;
  std::uint64_t seed_;
  const BenchConfig& config_;
  std::unique_ptr<MemberPredictions> members_;
  std::unique_ptr<NuisanceSet> nuisances_;
  Vector t_target_;
  Matrix member_eval_;
};

struct Task {
  const ScenarioEntry* scenario;
  int n;
  int replicate;
};

std::string task_key(const std::string& scenario, int n, int replicate, const std::string& model) {
  return scenario + "\x1f" + std::to_string(n) + "\x1f" + std::to_string(replicate) + "\x1f" +
         model;
}

std::vector<ResultRow> run_task(const Task& task, const BenchConfig& config,
                                const std::set<std::string>& done_keys, std::size_t* skipped) {
  std::vector<ResultRow> rows;
  const std::string& scen_name = task.scenario->name;
  const std::uint64_t seed =
      stable_seed(config.master_seed, scen_name, static_cast<std::uint64_t>(task.n),
                  static_cast<std::uint64_t>(task.replicate));

  std::vector<std::string> todo;
  for (const auto& model : config.models) {
    if (done_keys.count(task_key(scen_name, task.n, task.replicate, model))) {
      ++*skipped;
      continue;
    }
    todo.push_back(model);
  }
  if (todo.empty()) return rows;

  const Generated train_gen =
      generate_scenario(*task.scenario, static_cast<std::size_t>(task.n), seed);
  EvaluationSet eval;
  if (task.scenario->kind == ScenarioEntry::Kind::External) {
    eval = train_gen.eval;  // held-out remainder
  } else {
    eval = generate_scenario(*task.scenario, static_cast<std::size_t>(config.test_size),
                             stable_seed(seed, "eval"))
               .eval;
  }
  const int p = static_cast<int>(eval.covariates.cols());

  const bool want_subgroups =
      std::find(config.metrics.begin(), config.metrics.end(), "srmse_sg") != config.metrics.end() ||
      std::find(config.metrics.begin(), config.metrics.end(), "rod_sg") != config.metrics.end();
  std::vector<SubgroupSpec> subgroups;
  if (want_subgroups) subgroups = enumerate_subgroups(eval.covariates);

  ReplicateRunner runner(train_gen.trial, seed, config);
  for (const auto& model : todo) {
    ResultRow base;
    base.scenario = scen_name;
    base.p = p;
    base.n = task.n;
    base.replicate = task.replicate;
    base.model = model;
    base.seed = seed;

    std::optional<Vector> preds;
    std::string failure;
    try {
      preds = model == "Oracle" ? eval.true_cate : runner.predict(model, eval.covariates);
      if (!preds->allFinite()) throw std::runtime_error("non-finite predictions");
    } catch (const std::exception& e) {
      failure = e.what();
    }

    std::optional<std::pair<Vector, Vector>> group_means;
    if (preds && want_subgroups) {
      try {
        group_means = subgroup_means(*preds, eval, subgroups);
      } catch (const std::exception&) {
        // leaves subgroup metrics degenerate below
      }
    }

    for (const auto& metric : config.metrics) {
      ResultRow row = base;
      row.metric = metric;
      if (!preds) {
        row.status = "failed";
        rows.push_back(std::move(row));
        continue;
      }
      try {
        if (metric == "srmse") {
          row.value = srmse(*preds, eval.true_cate);
        } else if (metric == "rod") {
          row.value = rod(*preds, eval.true_cate, config.kendall);
        } else if (metric == "srmse_sg") {
          if (!group_means) throw std::domain_error("no usable subgroups");
          row.value = srmse(group_means->first, group_means->second);
        } else if (metric == "rod_sg") {
          if (!group_means) throw std::domain_error("no usable subgroups");
          row.value = rod(group_means->first, group_means->second, config.kendall);
        }
        row.status = "ok";
      } catch (const std::domain_error&) {
        row.status = "degenerate";
        row.value.reset();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

bool row_less(const ResultRow& a, const ResultRow& b) {
  auto key = [](const ResultRow& r) {
    return std::tie(r.scenario, r.p, r.n, r.replicate, r.model, r.metric);
  };
  return key(a) < key(b);
}

}  // namespace

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file: " + path);
  std::vector<ResultRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 9) throw std::runtime_error("results csv: bad row: " + line);
    ResultRow row;
    row.scenario = fields[0];
    row.p = std::stoi(fields[1]);
    row.n = std::stoi(fields[2]);
    row.replicate = std::stoi(fields[3]);
    row.model = fields[4];
    row.metric = fields[5];
    if (!fields[6].empty()) row.value = std::stod(fields[6]);
    row.status = fields[7];
    row.seed = std::stoull(fields[8]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results_csv(const std::string& path, std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), row_less);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results file: " + path);
  out << "scenario,p,n,replicate,model,metric,value,status,seed\n";
  for (const auto& r : rows) {
    out << r.scenario << "," << r.p << "," << r.n << "," << r.replicate << "," << r.model << ","
        << r.metric << "," << (r.value ? format_value(*r.value) : "") << "," << r.status << ","
        << r.seed << "\n";
  }
}

RunSummary run_benchmark(const BenchConfig& config) {
  config.check();
  std::filesystem::create_directories(config.out_dir);
  const std::string results_path =
      (std::filesystem::path(config.out_dir) / "results.csv").string();

  std::vector<ResultRow> rows;
  std::set<std::string> done_keys;
  if (config.resume && std::filesystem::exists(results_path)) {
    rows = read_results_csv(results_path);
    for (const auto& r : rows)
      done_keys.insert(task_key(r.scenario, r.n, r.replicate, r.model));
  }

  std::vector<Task> tasks;
  for (const auto& scenario : config.scenarios)
    for (int n : config.n_grid)
      for (int rep = 0; rep < config.replicates; ++rep)
        tasks.push_back({&scenario, n, rep});

  RunSummary summary;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> skipped{0};
  const int workers = config.workers > 0
                          ? config.workers
                          : std::max(1u, std::thread::hardware_concurrency());

  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
      const Task& task = tasks[t];
      const auto start = std::chrono::steady_clock::now();
      std::size_t local_skipped = 0;
      std::vector<ResultRow> task_rows;
      try {
        task_rows = run_task(task, config, done_keys, &local_skipped);
      } catch (const std::exception& e) {
        // scenario-level failure (e.g. unreadable external file): every
        // pending model/metric row is marked failed
        for (const auto& model : config.models) {
          if (done_keys.count(task_key(task.scenario->name, task.n, task.replicate, model)))
            continue;
          for (const auto& metric : config.metrics) {
            ResultRow row;
            row.scenario = task.scenario->name;
            row.p = task.scenario->p();
            row.n = task.n;
            row.replicate = task.replicate;
            row.model = model;
            row.metric = metric;
            row.status = "failed";
            row.seed = stable_seed(config.master_seed, task.scenario->name,
                                   static_cast<std::uint64_t>(task.n),
                                   static_cast<std::uint64_t>(task.replicate));
            task_rows.push_back(std::move(row));
          }
        }
        std::lock_guard<std::mutex> lock(mu);
        std::cerr << "[bench] task " << task.scenario->name << " n=" << task.n << " rep="
                  << task.replicate << " failed: " << e.what() << "\n";
      }
      skipped += local_skipped;
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::lock_guard<std::mutex> lock(mu);
      rows.insert(rows.end(), task_rows.begin(), task_rows.end());
      summary.rows_written += task_rows.size();
      if (!task_rows.empty())
        std::cerr << "[bench] " << task.scenario->name << " n=" << task.n << " rep="
                  << task.replicate << " done in " << static_cast<int>(secs * 1000.0) << " ms\n";
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  summary.skipped = skipped.load();
  for (const auto& r : rows)
    if (r.status == "failed") ++summary.failures;

  // row-count accounting: every (task, model, metric) must be present exactly once
  const std::size_t expected =
      tasks.size() * config.models.size() * config.metrics.size();
  if (rows.size() != expected)
    throw std::runtime_error("run_benchmark: row count mismatch: have " +
                             std::to_string(rows.size()) + ", expected " +
                             std::to_string(expected));

  write_results_csv(results_path, std::move(rows));
  summary.exit_code = summary.failures > 0 ? 2 : 0;
  return summary;
}

}  // namespace hte
