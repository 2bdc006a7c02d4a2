#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

class FittedForest : public FittedRegressor {
 public:
  explicit FittedForest(std::vector<TreeModel> trees) : trees_(std::move(trees)) {}

  Vector predict(const DesignMatrix& X) const override {
    Vector out = Vector::Zero(X.rows());
    for (const auto& tree : trees_)
      for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] += tree.predict_one(X.values.row(i));
    return out / static_cast<double>(trees_.size());
  }

 private:
  std::vector<TreeModel> trees_;
};

// Index-addressed parallel loop; output slots are preassigned so the result
// does not depend on the worker count.
void parallel_tree_loop(int n_trees, int n_threads, const std::function<void(int)>& body) {
  if (n_threads <= 1) {
    for (int t = 0; t < n_trees; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(n_threads, n_trees);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < n_trees; t = next.fetch_add(1)) body(t);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::unique_ptr<FittedRegressor> RandomForestRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                            const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("forest fit: rows(X) != len(y)");
  if (params_.n_trees < 1) throw std::invalid_argument("forest fit: n_trees >= 1 required");

  const std::size_t n = static_cast<std::size_t>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int mtry = params_.mtry > 0 ? std::min(params_.mtry, p)
                                    : static_cast<int>(std::ceil(static_cast<double>(p) / 3.0));
  const std::size_t draw =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                   params_.subsample * static_cast<double>(n))));

  std::vector<TreeModel> trees(static_cast<std::size_t>(params_.n_trees));
  parallel_tree_loop(params_.n_trees, params_.n_threads, [&](int t) {
    // resampling is keyed on (seed, tree index), never on execution order
    Rng rng(stable_seed(params_.seed, "tree", static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows = params_.bootstrap
                                        ? rng.sample_with_replacement(n, draw)
                                        : rng.sample_without_replacement(n, draw);
    TreeGrowth opts;
    opts.max_depth = params_.max_depth;
    opts.min_leaf = params_.min_leaf;
    opts.mtry = mtry;
    opts.seed = stable_seed(params_.seed, "grow", static_cast<std::uint64_t>(t));
    trees[static_cast<std::size_t>(t)] = grow_tree(X.values, y, weights, rows, opts);
  });

  return std::make_unique<FittedForest>(std::move(trees));
}

}  // namespace hte
