#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hte/data.hpp"
#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

struct BoostModel {
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<TreeModel> trees;

  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x, std::size_t rounds) const {
    double f = f0;
    for (std::size_t t = 0; t < rounds; ++t) f += learning_rate * trees[t].predict_one(x);
    return f;
  }
};

BoostModel boost_fit(const Matrix& X, const Vector& y, const Vector* weights,
                     const BoostingParams& params) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  BoostModel model;
  model.learning_rate = params.learning_rate;

  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights ? (*weights)[static_cast<Eigen::Index>(i)] : 1.0;
    sw += w;
    swy += w * y[static_cast<Eigen::Index>(i)];
  }
  model.f0 = sw > 0.0 ? swy / sw : 0.0;

  Vector resid = y.array() - model.f0;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const std::size_t draw = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));

  model.trees.reserve(static_cast<std::size_t>(params.n_rounds));
  for (int t = 0; t < params.n_rounds; ++t) {
    std::vector<std::size_t> rows;
    if (draw >= n) {
      rows = all;
    } else {
      Rng rng(stable_seed(params.seed, "round", static_cast<std::uint64_t>(t)));
      rows = rng.sample_without_replacement(n, draw);
    }
    TreeGrowth opts;
    opts.max_depth = params.max_depth;
    opts.min_leaf = params.min_leaf;
    TreeModel tree = grow_tree(X, resid, weights, rows, opts);
    for (std::size_t i = 0; i < n; ++i)
      resid[static_cast<Eigen::Index>(i)] -=
          params.learning_rate * tree.predict_one(X.row(static_cast<Eigen::Index>(i)));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

class FittedBoosting : public FittedRegressor {
 public:
  explicit FittedBoosting(BoostModel model) : model_(std::move(model)) {}
  Vector predict(const DesignMatrix& X) const override {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out[i] = model_.predict_one(X.values.row(i), model_.trees.size());
    return out;
  }

 private:
  BoostModel model_;
};

void check_boost_inputs(const DesignMatrix& X, const Vector& y, const BoostingParams& params) {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("boosting fit: rows(X) != len(y)");
  if (params.n_rounds < 1) throw std::invalid_argument("boosting fit: n_rounds >= 1 required");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
    throw std::invalid_argument("boosting fit: learning_rate must be in (0,1]");
}

}  // namespace

std::unique_ptr<FittedRegressor> GradientBoostingRegressor::fit(const DesignMatrix& X,
                                                                const Vector& y,
                                                                const Vector* weights) const {
  check_boost_inputs(X, y, params_);
  return std::make_unique<FittedBoosting>(boost_fit(X.values, y, weights, params_));
}

std::unique_ptr<FittedRegressor> BoostingCvRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                          const Vector* weights) const {
  check_boost_inputs(X, y, params_);
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const int k = 3;

  std::vector<int> grid = round_grid_;
  std::sort(grid.begin(), grid.end());
  int best_rounds = grid.back();

  if (n >= 2 * static_cast<std::size_t>(k) && grid.size() > 1) {
    FoldAssignment folds =
        make_folds_strata(n, k, stable_seed(params_.seed, "boost-cv"), nullptr);
    std::vector<double> cv_sse(grid.size(), 0.0);

    for (int f = 0; f < k; ++f) {
      const auto train_idx = folds.out_of_fold_indices(f);
      const auto val_idx = folds.fold_indices(f);

      Matrix Xt(static_cast<Eigen::Index>(train_idx.size()), X.cols());
      Vector yt(static_cast<Eigen::Index>(train_idx.size()));
      Vector wt(static_cast<Eigen::Index>(train_idx.size()));
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        Xt.row(static_cast<Eigen::Index>(i)) = X.values.row(static_cast<Eigen::Index>(train_idx[i]));
        yt[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(train_idx[i])];
        wt[static_cast<Eigen::Index>(i)] =
            weights ? (*weights)[static_cast<Eigen::Index>(train_idx[i])] : 1.0;
      }
      BoostingParams fold_params = params_;
      fold_params.n_rounds = grid.back();
      fold_params.seed = stable_seed(params_.seed, "boost-cv-fold", static_cast<std::uint64_t>(f));
      const BoostModel staged = boost_fit(Xt, yt, weights ? &wt : nullptr, fold_params);

      // incremental validation predictions, scored at each grid checkpoint
      Vector val_pred = Vector::Constant(static_cast<Eigen::Index>(val_idx.size()), staged.f0);
      std::size_t next_tree = 0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::size_t upto = std::min<std::size_t>(staged.trees.size(),
                                                       static_cast<std::size_t>(grid[g]));
        for (; next_tree < upto; ++next_tree)
          for (std::size_t i = 0; i < val_idx.size(); ++i)
            val_pred[static_cast<Eigen::Index>(i)] +=
                staged.learning_rate *
                staged.trees[next_tree].predict_one(
                    X.values.row(static_cast<Eigen::Index>(val_idx[i])));
        for (std::size_t i = 0; i < val_idx.size(); ++i) {
          const double e = val_pred[static_cast<Eigen::Index>(i)] -
                           y[static_cast<Eigen::Index>(val_idx[i])];
          cv_sse[g] += e * e;
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (cv_sse[g] < cv_sse[best]) best = g;
    best_rounds = grid[best];
  }

  BoostingParams final_params = params_;
  final_params.n_rounds = best_rounds;
  return std::make_unique<FittedBoosting>(boost_fit(X.values, y, weights, final_params));
}

}  // namespace hte
