#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "hte/causal_forest.hpp"
#include "hte/meta_learners.hpp"
#include "hte/random.hpp"

namespace hte {

double CausalTree::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& nd = nodes[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].theta;
}

Vector CausalForestModel::predict_cate(const DesignMatrix& X) const {
  Vector out = Vector::Zero(X.rows());
  for (const auto& tree : trees_) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] += tree.predict_one(X.values.row(i));
  }
  return out / static_cast<double>(trees_.size());
}

namespace {

constexpr double kThetaDenomFloor = 1e-8;

struct NodeStats {
  double sum_a2 = 0.0;   // sum of centered-treatment squares
  double sum_ay = 0.0;   // sum of centered-treatment * centered-outcome
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t n = 0;

  bool theta_valid() const { return sum_a2 >= kThetaDenomFloor; }
  double theta() const { return sum_ay / sum_a2; }
};

struct TreeBuildContext {
  const Matrix& X;
  const Vector& a_raw;       // 0/1 treatment
  const Vector& a_centered;  // A - pi-hat
  const Vector& y_centered;  // Y - m-hat
  int min_leaf;
  int max_depth;
  int mtry;
};

NodeStats gather_stats(const TreeBuildContext& ctx, const std::vector<std::size_t>& rows) {
  NodeStats s;
  for (std::size_t r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    s.sum_a2 += ctx.a_centered[i] * ctx.a_centered[i];
    s.sum_ay += ctx.a_centered[i] * ctx.y_centered[i];
    if (ctx.a_raw[i] == 1.0)
      ++s.n_treated;
    else
      ++s.n_control;
    ++s.n;
  }
  return s;
}

struct CfSplit {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();  // sum n_child theta^2
};

// maximize n_L theta_L^2 + n_R theta_R^2 with >= min_leaf of each arm per child
CfSplit best_causal_split(const TreeBuildContext& ctx, const std::vector<std::size_t>& rows,
                          const std::vector<int>& features,
                          std::vector<std::pair<double, std::size_t>>& scratch) {
  CfSplit best;
  const std::size_t m = rows.size();
  const NodeStats total = gather_stats(ctx, rows);

  for (int f : features) {
    scratch.clear();
    for (std::size_t r : rows) scratch.emplace_back(ctx.X(static_cast<Eigen::Index>(r), f), r);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    NodeStats left;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const auto [v, r] = scratch[i];
      const auto ri = static_cast<Eigen::Index>(r);
      left.sum_a2 += ctx.a_centered[ri] * ctx.a_centered[ri];
      left.sum_ay += ctx.a_centered[ri] * ctx.y_centered[ri];
      if (ctx.a_raw[ri] == 1.0)
        ++left.n_treated;
      else
        ++left.n_control;
      ++left.n;

      const double next = scratch[i + 1].first;
      if (next == v) continue;

      NodeStats right;
      right.sum_a2 = total.sum_a2 - left.sum_a2;
      right.sum_ay = total.sum_ay - left.sum_ay;
      right.n_treated = total.n_treated - left.n_treated;
      right.n_control = total.n_control - left.n_control;
      right.n = total.n - left.n;

      const auto ml = static_cast<std::size_t>(ctx.min_leaf);
      if (left.n_treated < ml || left.n_control < ml || right.n_treated < ml ||
          right.n_control < ml)
        continue;
      if (!left.theta_valid() || !right.theta_valid()) continue;

      double mid = v + (next - v) / 2.0;
      if (!(mid >= v && mid < next)) mid = v;

      const double score = static_cast<double>(left.n) * left.theta() * left.theta() +
                           static_cast<double>(right.n) * right.theta() * right.theta();
      if (score > best.score) {
        best.score = score;
        best.feature = f;
        best.threshold = mid;
      }
    }
  }
  return best;
}

CausalTree grow_causal_tree(const TreeBuildContext& ctx,
                            const std::vector<std::size_t>& split_rows,
                            const std::vector<std::size_t>& estimate_rows,
                            double global_theta, std::uint64_t seed) {
  CausalTree tree;
  Rng rng(seed);
  std::vector<std::pair<double, std::size_t>> scratch;
  const int p = static_cast<int>(ctx.X.cols());
  std::vector<int> all_features(static_cast<std::size_t>(p));
  std::iota(all_features.begin(), all_features.end(), 0);

  struct Pending {
    int node;
    std::vector<std::size_t> split_rows;
    std::vector<std::size_t> estimate_rows;
    int depth;
    double parent_theta;
  };

  // root estimate fallback chain: estimation sample, then split sample, then
  // the forest-level global estimate
  double root_fallback = global_theta;
  {
    const NodeStats split_stats = gather_stats(ctx, split_rows);
    if (split_stats.theta_valid()) root_fallback = split_stats.theta();
  }

  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, split_rows, estimate_rows, 0, root_fallback});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();

    // honest estimate with parent inheritance for thin leaves
    const NodeStats est = gather_stats(ctx, cur.estimate_rows);
    const auto ml = static_cast<std::size_t>(ctx.min_leaf);
    double theta = cur.parent_theta;
    if (est.theta_valid() && est.n_treated >= ml && est.n_control >= ml) theta = est.theta();
    tree.nodes[static_cast<std::size_t>(cur.node)].theta = theta;

    if (cur.depth >= ctx.max_depth) continue;
    if (cur.split_rows.size() < 2 * static_cast<std::size_t>(ctx.min_leaf)) continue;

    std::vector<int> features;
    if (ctx.mtry >= p) {
      features = all_features;
    } else {
      auto pool = all_features;
      rng.shuffle(pool);
      features.assign(pool.begin(), pool.begin() + ctx.mtry);
      std::sort(features.begin(), features.end());
    }

    const CfSplit split = best_causal_split(ctx, cur.split_rows, features, scratch);
    if (split.feature < 0) continue;

    auto partition = [&](const std::vector<std::size_t>& rows, std::vector<std::size_t>& left,
                         std::vector<std::size_t>& right) {
      for (std::size_t r : rows) {
        if (ctx.X(static_cast<Eigen::Index>(r), split.feature) <= split.threshold)
          left.push_back(r);
        else
          right.push_back(r);
      }
    };
    std::vector<std::size_t> sl, sr, el, er;
    partition(cur.split_rows, sl, sr);
    partition(cur.estimate_rows, el, er);
    if (sl.empty() || sr.empty()) continue;

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    CausalTree::Node& parent = tree.nodes[static_cast<std::size_t>(cur.node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left_id;
    parent.right = right_id;

    stack.push_back({right_id, std::move(sr), std::move(er), cur.depth + 1, theta});
    stack.push_back({left_id, std::move(sl), std::move(el), cur.depth + 1, theta});
  }
  return tree;
}

void parallel_loop(int count, int n_threads, const std::function<void(int)>& body) {
  if (n_threads <= 1) {
    for (int t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(n_threads, count);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < count; t = next.fetch_add(1)) body(t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::shared_ptr<CausalForestModel> fit_causal_forest(const TrialDataset& data,
                                                     const CausalForestParams& params) {
  validate(data);
  const auto treated = data.treated_indices();
  const auto controls = data.control_indices();
  const std::size_t n = static_cast<std::size_t>(data.n());
  if (treated.empty() || controls.empty())
    throw std::invalid_argument("fit_causal_forest: both arms must be present");
  // min_leaf >= n is the deliberate no-split (stump) configuration; only
  // splittable forests need room for two leaves per arm
  const bool stump = params.min_leaf >= static_cast<int>(n);
  if (!stump && (treated.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
                 controls.size() < 2 * static_cast<std::size_t>(params.min_leaf)))
    throw std::invalid_argument("fit_causal_forest: each arm needs >= 2*min_leaf units");
  if (params.n_trees < 1) throw std::invalid_argument("fit_causal_forest: n_trees >= 1");
  const int p = static_cast<int>(data.p());
  const int mtry = params.mtry > 0
                       ? std::min(params.mtry, p)
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));

  // local centering via cross-fitted nuisances
  Vector y_centered = data.outcome;
  Vector a_centered = data.treatment;
  if (params.center_outcome || !params.fixed_propensity) {
    NuisanceOptions opts;
    opts.k_folds = params.nuisance_folds;
    opts.seed = stable_seed(params.seed, "cf-nuisance");
    opts.fit_m = params.center_outcome;
    opts.fit_pi = !params.fixed_propensity.has_value();
    opts.fit_mu = false;
    RandomForestRegressor rf_base{[&] {
      ForestParams fp;
      fp.seed = stable_seed(params.seed, "cf-mhat");
      return fp;
    }()};
    NuisanceSet ns = compute_nuisances(data, rf_base, opts);
    if (params.center_outcome) y_centered -= ns.oof_m;
    if (!params.fixed_propensity) a_centered -= ns.oof_pi;
  }
  if (params.fixed_propensity) a_centered.array() -= *params.fixed_propensity;

  TreeBuildContext ctx{data.covariates.values, data.treatment, a_centered, y_centered,
                       params.min_leaf, params.max_depth, mtry};

  double global_theta = 0.0;
  {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const NodeStats g = gather_stats(ctx, all);
    if (g.theta_valid()) global_theta = g.theta();
  }

  const std::size_t draw = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(params.subsample * static_cast<double>(n))));

  std::vector<CausalTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_loop(params.n_trees, params.n_threads, [&](int t) {
    Rng rng(stable_seed(params.seed, "cf-tree", static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sub = rng.sample_without_replacement(n, draw);
    std::vector<std::size_t> split_rows, estimate_rows;
    if (params.honesty) {
      const std::size_t half = sub.size() / 2;
      split_rows.assign(sub.begin(), sub.begin() + static_cast<std::ptrdiff_t>(half));
      estimate_rows.assign(sub.begin() + static_cast<std::ptrdiff_t>(half), sub.end());
    } else {
      split_rows = sub;
      estimate_rows = sub;
    }
    trees[static_cast<std::size_t>(t)] =
        grow_causal_tree(ctx, split_rows, estimate_rows, global_theta,
                         stable_seed(params.seed, "cf-grow", static_cast<std::uint64_t>(t)));
  });

  return std::make_shared<CausalForestModel>(std::move(trees),
                                             params.honesty ? "H-CF" : "CF",
                                             std::move(y_centered), std::move(a_centered));
}

}  // namespace hte
