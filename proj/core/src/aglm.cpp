#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hte/data.hpp"
#include "hte/learners.hpp"
#include "hte/random.hpp"

namespace hte {

Eigen::Index AglmEncoding::width() const {
  std::size_t w = 0;
  for (const auto& c : cuts) w += c.size();
  return static_cast<Eigen::Index>(w);
}

Matrix AglmEncoding::encode(const Matrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != cuts.size())
    throw std::invalid_argument("AglmEncoding: feature count mismatch");
  Matrix Z = Matrix::Zero(X.rows(), width());
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    for (double cut : cuts[j]) {
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        Z(i, col) = X(i, static_cast<Eigen::Index>(j)) >= cut ? 1.0 : 0.0;
      ++col;
    }
  }
  return Z;
}

AglmEncoding make_aglm_encoding(const Matrix& X, int bins_per_feature) {
  if (bins_per_feature < 2)
    throw std::invalid_argument("make_aglm_encoding: bins_per_feature >= 2 required");
  AglmEncoding enc;
  enc.cuts.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::vector<double> col(X.col(j).data(), X.col(j).data() + X.rows());
    std::vector<double> uniq = col;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 2) continue;  // constant feature gets zero cuts

    std::vector<double> cuts;
    for (int b = 1; b < bins_per_feature; ++b) {
      const double q = static_cast<double>(b) / static_cast<double>(bins_per_feature);
      const double cut = quantile(col, q);
      if (cut <= uniq.front()) continue;  // 1{x >= min} is constant
      if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
    enc.cuts[static_cast<std::size_t>(j)] = std::move(cuts);
  }
  return enc;
}

namespace {

class FittedAglm : public FittedRegressor {
 public:
  FittedAglm(AglmEncoding enc, LinearFit fit) : enc_(std::move(enc)), fit_(std::move(fit)) {}
  Vector predict(const DesignMatrix& X) const override {
    return fit_.predict(DesignMatrix(enc_.encode(X.values)));
  }

 private:
  AglmEncoding enc_;
  LinearFit fit_;
};

}  // namespace

std::unique_ptr<FittedRegressor> AglmRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                    const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("aglm fit: rows(X) != len(y)");
  AglmEncoding enc = make_aglm_encoding(X.values, params_.bins_per_feature);
  if (enc.width() == 0) {
    // all features constant: intercept-only fit at the weighted mean
    LinearFit fit;
    fit.coefficients = Vector::Zero(0);
    Vector w = weights ? *weights : Vector::Ones(y.size());
    fit.intercept = y.dot(w) / w.sum();
    AglmEncoding empty;
    empty.cuts.resize(static_cast<std::size_t>(X.cols()));
    return std::make_unique<FittedAglm>(std::move(empty), std::move(fit));
  }
  DesignMatrix Z(enc.encode(X.values));
  LinearFit fit = fit_elastic_net(Z, y, params_.lambda1, 0.0, weights);
  return std::make_unique<FittedAglm>(std::move(enc), std::move(fit));
}

std::unique_ptr<FittedRegressor> AglmCvRegressor::fit(const DesignMatrix& X, const Vector& y,
                                                      const Vector* weights) const {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("aglm fit: rows(X) != len(y)");
  const std::size_t n = static_cast<std::size_t>(X.rows());

  AglmEncoding full_enc = make_aglm_encoding(X.values, bins_);
  if (full_enc.width() == 0) return AglmRegressor({bins_, 0.0, seed_}).fit(X, y, weights);
  DesignMatrix Zfull(full_enc.encode(X.values));

  const double lmax = detail::lambda_max(Zfull, y, weights);
  std::vector<double> lambdas(static_cast<std::size_t>(n_lambda_));
  for (int g = 0; g < n_lambda_; ++g)
    lambdas[static_cast<std::size_t>(g)] =
        lmax * std::pow(min_ratio_, static_cast<double>(g) / static_cast<double>(n_lambda_ - 1));

  const int k = 3;
  std::size_t best = lambdas.size() / 2;
  if (n >= 2 * static_cast<std::size_t>(k) && lmax > 0.0) {
    FoldAssignment folds = make_folds_strata(n, k, stable_seed(seed_, "aglm-cv"), nullptr);
    std::vector<double> cv_sse(lambdas.size(), 0.0);
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
      AglmEncoding enc = make_aglm_encoding(Xt, bins_);
      if (enc.width() == 0) continue;
      DesignMatrix Zt(enc.encode(Xt));
      auto fits = detail::elastic_net_path(Zt, yt, lambdas, 1.0, weights ? &wt : nullptr);

      Matrix Xv(static_cast<Eigen::Index>(val_idx.size()), X.cols());
      for (std::size_t i = 0; i < val_idx.size(); ++i)
        Xv.row(static_cast<Eigen::Index>(i)) = X.values.row(static_cast<Eigen::Index>(val_idx[i]));
      DesignMatrix Zv(enc.encode(Xv));
      for (std::size_t g = 0; g < lambdas.size(); ++g) {
        Vector pred = fits[g].predict(Zv);
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

  std::vector<double> path_to_best(lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(best + 1));
  auto fits = detail::elastic_net_path(Zfull, y, path_to_best, 1.0, weights);
  return std::make_unique<FittedAglm>(std::move(full_enc), std::move(fits.back()));
}

}  // namespace hte
