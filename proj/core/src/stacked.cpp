#include <numeric>
#include <stdexcept>

#include "hte/data.hpp"
#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

class FittedStacked : public FittedRegressor {
 public:
  FittedStacked(std::vector<std::unique_ptr<FittedRegressor>> bases, LinearFit meta)
      : bases_(std::move(bases)), meta_(std::move(meta)) {}

  Vector predict(const DesignMatrix& X) const override {
    Matrix P(X.rows(), static_cast<Eigen::Index>(bases_.size()));
    for (std::size_t k = 0; k < bases_.size(); ++k)
      P.col(static_cast<Eigen::Index>(k)) = bases_[k]->predict(X);
    return meta_.predict(DesignMatrix(std::move(P)));
  }

 private:
  std::vector<std::unique_ptr<FittedRegressor>> bases_;
  LinearFit meta_;
};

// intercept + non-negative slopes, by alternating mean updates with NNLS
LinearFit fit_nonneg_meta(const DesignMatrix& P, const Vector& y) {
  double b = y.mean();
  Vector alpha = Vector::Zero(P.cols());
  for (int it = 0; it < 200; ++it) {
    Vector target = y.array() - b;
    LinearFit nn = fit_nnls(P, target);
    alpha = nn.coefficients;
    const double next_b = (y - P.values * alpha).mean();
    if (std::abs(next_b - b) < 1e-12) {
      b = next_b;
      break;
    }
    b = next_b;
  }
  LinearFit fit;
  fit.intercept = b;
  fit.coefficients = alpha;
  return fit;
}

}  // namespace

StackedRegressor::StackedRegressor(std::vector<RegressorPtr> base_set, int k_folds,
                                   std::uint64_t seed, bool non_negative_meta)
    : bases_(std::move(base_set)), k_folds_(k_folds), seed_(seed),
      non_negative_meta_(non_negative_meta) {
  if (bases_.empty()) throw std::invalid_argument("StackedRegressor: empty base set");
  if (k_folds_ < 2) throw std::invalid_argument("StackedRegressor: k_folds >= 2 required");
}

std::unique_ptr<FittedRegressor> StackedRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                       const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("stacked fit: rows(X) != len(y)");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  if (n < 2 * static_cast<std::size_t>(k_folds_))
    throw std::invalid_argument("stacked fit: n >= 2 * k_folds required");

  FoldAssignment folds = make_folds_strata(n, k_folds_, stable_seed(seed_, "stack"), nullptr);

  std::vector<Vector> oof_columns;
  std::vector<std::size_t> survivors;
  for (std::size_t k = 0; k < bases_.size(); ++k) {
    Vector col(static_cast<Eigen::Index>(n));
    bool ok = true;
    for (int f = 0; f < k_folds_ && ok; ++f) {
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
      try {
        auto fitted = bases_[k]->fit(Xt, yt, weights ? &wt : nullptr);
        Vector pred = fitted->predict(X.select_rows(val_idx));
        for (std::size_t i = 0; i < val_idx.size(); ++i)
          col[static_cast<Eigen::Index>(val_idx[i])] = pred[static_cast<Eigen::Index>(i)];
      } catch (const std::exception&) {
        ok = false;  // drop this base learner
      }
    }
    if (ok) {
      oof_columns.push_back(std::move(col));
      survivors.push_back(k);
    }
  }
  if (survivors.empty())
    throw std::runtime_error("stacked fit: every base learner failed");

  Matrix P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(survivors.size()));
  for (std::size_t k = 0; k < oof_columns.size(); ++k)
    P.col(static_cast<Eigen::Index>(k)) = oof_columns[k];

  DesignMatrix Pd(std::move(P));
  LinearFit meta = non_negative_meta_ ? fit_nonneg_meta(Pd, y) : fit_ols(Pd, y, weights);

  std::vector<std::unique_ptr<FittedRegressor>> refit;
  refit.reserve(survivors.size());
  for (std::size_t k : survivors) refit.push_back(bases_[k]->fit(X, y, weights));
  return std::make_unique<FittedStacked>(std::move(refit), std::move(meta));
}

}  // namespace hte
