#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hte/design_matrix.hpp"
#include "hte/numerics.hpp"

namespace hte {

class FittedRegressor {
 public:
  virtual ~FittedRegressor() = default;
  virtual Vector predict(const DesignMatrix& X) const = 0;
};

// Supervised base-learner contract. fit() is const and deterministic given
// the hyperparameters (including any seed) carried by the concrete type.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                               const Vector* weights = nullptr) const = 0;
  virtual std::string name() const = 0;
};

using RegressorPtr = std::shared_ptr<const Regressor>;

// ---------------------------------------------------------------- trees ----

struct TreeModel {
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  bool empty() const { return nodes.empty(); }
  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Vector predict(const DesignMatrix& X) const;
};

struct TreeGrowth {
  int max_depth = 30;
  int min_leaf = 5;
  int mtry = 0;  // features sampled per node; 0 = all
  std::uint64_t seed = 0;
};

// Greedy CART on the listed rows (duplicates allowed, as produced by
// bootstrap draws). Splits minimize weighted child SSE; candidate thresholds
// are midpoints of consecutive sorted unique values; ties break toward the
// lowest feature index, then the lowest threshold.
TreeModel grow_tree(const Matrix& X, const Vector& y, const Vector* weights,
                    const std::vector<std::size_t>& rows, const TreeGrowth& opts);

class RegressionTreeRegressor : public Regressor {
 public:
  RegressionTreeRegressor(int max_depth, int min_leaf, std::uint64_t seed = 0);
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "tree"; }

 private:
  TreeGrowth opts_;
};

// --------------------------------------------------------------- forest ----

struct ForestParams {
  int n_trees = 500;
  int mtry = 0;  // 0 = ceil(p / 3)
  int min_leaf = 5;
  double subsample = 1.0;
  bool bootstrap = true;  // false = draw without replacement
  int max_depth = 30;
  std::uint64_t seed = 0;
  int n_threads = 1;  // prediction identical for any thread count
};

class RandomForestRegressor : public Regressor {
 public:
  explicit RandomForestRegressor(ForestParams params) : params_(params) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "random-forest"; }
  const ForestParams& params() const { return params_; }

 private:
  ForestParams params_;
};

// ------------------------------------------------------------- boosting ----

struct BoostingParams {
  int n_rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 5;
  double subsample = 0.8;
  std::uint64_t seed = 0;
};

// Squared-loss boosting: F0 is the weighted mean, each round fits a tree to
// the current residuals.
class GradientBoostingRegressor : public Regressor {
 public:
  explicit GradientBoostingRegressor(BoostingParams params) : params_(params) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "boosting"; }
  const BoostingParams& params() const { return params_; }

 private:
  BoostingParams params_;
};

// Selects n_rounds from {50, 100, 200} by 3-fold CV, then refits.
class BoostingCvRegressor : public Regressor {
 public:
  explicit BoostingCvRegressor(BoostingParams params, std::vector<int> round_grid = {50, 100, 200})
      : params_(params), round_grid_(std::move(round_grid)) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "boosting-cv"; }

 private:
  BoostingParams params_;
  std::vector<int> round_grid_;
};

// ----------------------------------------------------------------- aglm ----

// Nested (cumulative) binary bins: bit j of a feature's encoding is
// 1{x >= cut_j}, cuts at equally spaced empirical quantiles.
struct AglmEncoding {
  std::vector<std::vector<double>> cuts;  // strictly increasing per feature

  Eigen::Index width() const;
  Matrix encode(const Matrix& X) const;
};

AglmEncoding make_aglm_encoding(const Matrix& X, int bins_per_feature);

struct AglmParams {
  int bins_per_feature = 20;
  double lambda1 = 0.0;
  std::uint64_t seed = 0;
};

// Lasso on the nested-bin encoding; piecewise constant in each feature.
class AglmRegressor : public Regressor {
 public:
  explicit AglmRegressor(AglmParams params) : params_(params) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "aglm"; }

 private:
  AglmParams params_;
};

// lambda1 chosen by 3-fold CV over a log-spaced grid. The lambda floor is
// 1e-2 of lambda_max: the nested-bin design is wider than n at trial scale.
class AglmCvRegressor : public Regressor {
 public:
  AglmCvRegressor(int bins_per_feature, std::uint64_t seed, int n_lambda = 20,
                  double lambda_min_ratio = 1e-2)
      : bins_(bins_per_feature), seed_(seed), n_lambda_(n_lambda), min_ratio_(lambda_min_ratio) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "aglm-cv"; }

 private:
  int bins_;
  std::uint64_t seed_;
  int n_lambda_;
  double min_ratio_;
};

// --------------------------------------------------------------- linear ----

class OlsRegressor : public Regressor {
 public:
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "ols"; }
};

// Elastic net with lambda1 = alpha * lambda, lambda2 = (1 - alpha) * lambda,
// lambda chosen by k-fold CV over a log-spaced grid.
class ElasticNetCvRegressor : public Regressor {
 public:
  ElasticNetCvRegressor(double alpha, std::uint64_t seed, int n_lambda = 20,
                        double lambda_min_ratio = 1e-3, int k_folds = 3)
      : alpha_(alpha), seed_(seed), n_lambda_(n_lambda), min_ratio_(lambda_min_ratio),
        k_folds_(k_folds) {}
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "elastic-net-cv"; }

 private:
  double alpha_;
  std::uint64_t seed_;
  int n_lambda_;
  double min_ratio_;
  int k_folds_;
};

namespace detail {
// Coordinate descent along a decreasing lambda path with warm starts; shares
// the standardization convention of fit_elastic_net.
std::vector<LinearFit> elastic_net_path(const DesignMatrix& X, const Vector& y,
                                        const std::vector<double>& lambdas, double alpha,
                                        const Vector* weights);
double lambda_max(const DesignMatrix& X, const Vector& y, const Vector* weights);
}  // namespace detail

// -------------------------------------------------------------- stacked ----

// Stacked generalization: out-of-fold base predictions feed an OLS
// meta-regression with intercept, then every base is refit on all rows.
class StackedRegressor : public Regressor {
 public:
  StackedRegressor(std::vector<RegressorPtr> base_set, int k_folds, std::uint64_t seed,
                   bool non_negative_meta = false);
  std::unique_ptr<FittedRegressor> fit(const DesignMatrix& X, const Vector& y,
                                       const Vector* weights) const override;
  std::string name() const override { return "stacked"; }

 private:
  std::vector<RegressorPtr> bases_;
  int k_folds_;
  std::uint64_t seed_;
  bool non_negative_meta_;
};

// ------------------------------------------------------------------ zoo ----

RegressorPtr make_ols_regressor();
RegressorPtr make_elastic_net_cv(std::uint64_t seed, double alpha = 0.5);
RegressorPtr make_random_forest(std::uint64_t seed, int n_trees = 500);
RegressorPtr make_boosting_cv(std::uint64_t seed, int max_rounds = 200);
RegressorPtr make_aglm_cv(std::uint64_t seed, int bins = 20);
// the stacked-regressor base set: elastic net, random forest, boosting, AGLM
std::vector<RegressorPtr> make_stacking_base_set(std::uint64_t seed);

}  // namespace hte
