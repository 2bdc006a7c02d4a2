#include <stdexcept>

#include "hte/data.hpp"
#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

class FittedOls : public FittedRegressor {
 public:
  explicit FittedOls(LinearFit fit) : fit_(std::move(fit)) {}
  Vector predict(const DesignMatrix& X) const override { return fit_.predict(X); }

 private:
  LinearFit fit_;
};

class FittedLinear : public FittedRegressor {
 public:
  explicit FittedLinear(LinearFit fit) : fit_(std::move(fit)) {}
  Vector predict(const DesignMatrix& X) const override { return fit_.predict(X); }

 private:
  LinearFit fit_;
};

}  // namespace

std::unique_ptr<FittedRegressor> OlsRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                   const Vector* weights) const {
  return std::make_unique<FittedOls>(fit_ols(X, y, weights));
}

std::unique_ptr<FittedRegressor> ElasticNetCvRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                            const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("elastic-net fit: rows(X) != len(y)");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  if (alpha_ <= 0.0) throw std::invalid_argument("elastic-net-cv: alpha must be positive");

  const double lmax = detail::lambda_max(X, y, weights) / alpha_;
  if (lmax <= 0.0) return std::make_unique<FittedLinear>(fit_elastic_net(X, y, 0.0, 0.0, weights));

  std::vector<double> lambdas(static_cast<std::size_t>(n_lambda_));
  for (int g = 0; g < n_lambda_; ++g)
    lambdas[static_cast<std::size_t>(g)] =
        lmax * std::pow(min_ratio_, static_cast<double>(g) / static_cast<double>(n_lambda_ - 1));

  std::size_t best = lambdas.size() / 2;
  if (n >= 2 * static_cast<std::size_t>(k_folds_)) {
    FoldAssignment folds = make_folds_strata(n, k_folds_, stable_seed(seed_, "enet-cv"), nullptr);
    std::vector<double> cv_sse(lambdas.size(), 0.0);
    for (int f = 0; f < k_folds_; ++f) {
      const auto train_idx = folds.out_of_fold_indices(f);
      const auto val_idx = folds.fold_indices(f);
      DesignMatrix Xt = X.select_rows(train_idx);
      Vector yt(static_cast<Eigen::Index>(train_idx.size()));
      Vector wt(static_cast<Eigen::Index>(train_idx.size()));
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        yt[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(train_idx[i])];
        wt[static_cast<Eigen::Index>(i)] =
            weights ? (*weights)[static_cast<Eigen::Index>(train_idx[i])] : 1.0;
      }
      auto fits = detail::elastic_net_path(Xt, yt, lambdas, alpha_, weights ? &wt : nullptr);
      DesignMatrix Xv = X.select_rows(val_idx);
      for (std::size_t g = 0; g < lambdas.size(); ++g) {
        Vector pred = fits[g].predict(Xv);
        for (std::size_t i = 0; i < val_idx.size(); ++i) {
          const double e =
              pred[static_cast<Eigen::Index>(i)] - y[static_cast<Eigen::Index>(val_idx[i])];
          cv_sse[g] += e * e;
        }
      }
    }
    best = 0;
    for (std::size_t g = 1; g < lambdas.size(); ++g)
      if (cv_sse[g] < cv_sse[best]) best = g;
  }

  std::vector<double> path_to_best(lambdas.begin(),
                                   lambdas.begin() + static_cast<std::ptrdiff_t>(best + 1));
  auto fits = detail::elastic_net_path(X, y, path_to_best, alpha_, weights);
  return std::make_unique<FittedLinear>(std::move(fits.back()));
}

RegressorPtr make_ols_regressor() { return std::make_shared<OlsRegressor>(); }

RegressorPtr make_elastic_net_cv(std::uint64_t seed, double alpha) {
  return std::make_shared<ElasticNetCvRegressor>(alpha, seed);
}

RegressorPtr make_random_forest(std::uint64_t seed, int n_trees) {
  ForestParams params;
  params.n_trees = n_trees;
  params.seed = seed;
  return std::make_shared<RandomForestRegressor>(params);
}

RegressorPtr make_boosting_cv(std::uint64_t seed, int max_rounds) {
  BoostingParams params;
  params.n_rounds = max_rounds;
  params.seed = seed;
  std::vector<int> grid;
  for (int r : {50, 100, 200})
    if (r <= max_rounds) grid.push_back(r);
  if (grid.empty()) grid.push_back(max_rounds);
  return std::make_shared<BoostingCvRegressor>(params, grid);
}

RegressorPtr make_aglm_cv(std::uint64_t seed, int bins) {
  return std::make_shared<AglmCvRegressor>(bins, seed);
}

std::vector<RegressorPtr> make_stacking_base_set(std::uint64_t seed) {
  return {make_elastic_net_cv(stable_seed(seed, "enet")),
          make_random_forest(stable_seed(seed, "rf")),
          make_boosting_cv(stable_seed(seed, "boost")),
          make_aglm_cv(stable_seed(seed, "aglm"))};
}

}  // namespace hte
