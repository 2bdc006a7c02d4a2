#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hte/ensembles.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

// weighted member combination c + sum alpha_k tau_k(x)
class CombinedCateModel : public CateModel {
 public:
  CombinedCateModel(std::vector<CateModelPtr> members, Vector weights, double offset,
                    std::string label)
      : members_(std::move(members)), weights_(std::move(weights)), offset_(offset),
        label_(std::move(label)) {}

  Vector predict_cate(const DesignMatrix& X) const override {
    Vector out = Vector::Constant(X.rows(), offset_);
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (weights_[static_cast<Eigen::Index>(k)] == 0.0) continue;
      out += weights_[static_cast<Eigen::Index>(k)] * members_[k]->predict_cate(X);
    }
    return out;
  }
  std::string label() const override { return label_; }

 private:
  std::vector<CateModelPtr> members_;
  Vector weights_;
  double offset_;
  std::string label_;
};

CateModelPtr make_combined(const MemberPredictions& members, const Vector& weights, double offset,
                           const std::string& label) {
  if (members.refit.empty()) return nullptr;
  return std::make_shared<CombinedCateModel>(members.refit, weights, offset, label);
}

}  // namespace

MemberPredictions crossfit_member_predictions(const TrialDataset& data,
                                              const std::vector<CateLearnerPtr>& members,
                                              int k_folds, std::uint64_t seed) {
  validate(data);
  if (members.size() < 2)
    throw std::invalid_argument("crossfit_member_predictions: K >= 2 members required");
  const std::size_t n = static_cast<std::size_t>(data.n());
  if (n < 2 * static_cast<std::size_t>(k_folds))
    throw std::invalid_argument("crossfit_member_predictions: n >= 2k required");

  const FoldAssignment folds = make_folds(data, k_folds, stable_seed(seed, "members"));

  MemberPredictions out;
  std::vector<Vector> columns;
  for (const auto& member : members) {
    Vector col(static_cast<Eigen::Index>(n));
    bool ok = true;
    try {
      for (int f = 0; f < k_folds; ++f) {
        const auto train_idx = folds.out_of_fold_indices(f);
        const auto val_idx = folds.fold_indices(f);
        const CateModelPtr fitted = member->fit(data.select_rows(train_idx));
        const Vector pred = fitted->predict_cate(data.covariates.select_rows(val_idx));
        for (std::size_t i = 0; i < val_idx.size(); ++i)
          col[static_cast<Eigen::Index>(val_idx[i])] = pred[static_cast<Eigen::Index>(i)];
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      out.dropped.push_back(member->label());
      continue;
    }
    try {
      out.refit.push_back(member->fit(data));
    } catch (const std::exception&) {
      out.dropped.push_back(member->label());
      continue;
    }
    out.labels.push_back(member->label());
    columns.push_back(std::move(col));
  }
  if (columns.size() < 2)
    throw std::runtime_error("crossfit_member_predictions: fewer than 2 members survived");

  out.out_of_fold.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.out_of_fold.col(static_cast<Eigen::Index>(k)) = columns[k];
  return out;
}

double r_stacking_objective(const Vector& residual_outcome, const Vector& residual_treatment,
                            const Matrix& member_matrix, double b, double c, const Vector& alpha) {
  const Vector effect = Vector::Constant(member_matrix.rows(), c) + member_matrix * alpha;
  const Vector err =
      residual_outcome.array() - b - effect.array() * residual_treatment.array();
  return err.squaredNorm();
}

EnsembleFit fit_r_stacking(const TrialDataset& data, const MemberPredictions& members,
                           const NuisanceSet& nuisances) {
  const Eigen::Index n = data.n();
  const Eigen::Index K = members.out_of_fold.cols();
  if (members.out_of_fold.rows() != n) throw std::invalid_argument("fit_r_stacking: row mismatch");
  if (nuisances.oof_m.size() != n || nuisances.oof_pi.size() != n)
    throw std::invalid_argument("fit_r_stacking: nuisances must be out-of-fold over all rows");

  const Vector r = data.outcome - nuisances.oof_m;
  const Vector at = data.treatment - nuisances.oof_pi;

  // columns (A - pi) * tau_k for the alpha block
  Matrix C(n, K);
  for (Eigen::Index k = 0; k < K; ++k)
    C.col(k) = at.cwiseProduct(members.out_of_fold.col(k));
  const DesignMatrix Cd(C);

  Matrix bc_design(n, 1);
  bc_design.col(0) = at;
  const DesignMatrix bc_d(bc_design);

  double b = 0.0, c = 0.0;
  Vector alpha = Vector::Zero(K);
  double prev_obj = r_stacking_objective(r, at, members.out_of_fold, b, c, alpha);

  for (int it = 0; it < 500; ++it) {
    // (b, c) step: OLS of the alpha-residual on [1, (A - pi)]
    const LinearFit bc = fit_ols(bc_d, r - C * alpha);
    b = bc.intercept;
    c = bc.coefficients[0];

    // alpha step: NNLS on the (b, c)-residual
    const Vector target = r.array() - b - c * at.array();
    alpha = fit_nnls(Cd, target).coefficients;

    const double obj = r_stacking_objective(r, at, members.out_of_fold, b, c, alpha);
    if (prev_obj - obj < 1e-9 * (1.0 + std::abs(obj))) {
      prev_obj = obj;
      break;
    }
    prev_obj = obj;
  }

  EnsembleFit fit;
  fit.member_labels = members.labels;
  fit.weights = alpha;
  fit.intercept_b = b;
  fit.intercept_c = c;
  fit.combined = make_combined(members, alpha, c, "R-Stacking");
  return fit;
}

EnsembleFit fit_causal_stacking(const TrialDataset& data, const MemberPredictions& members,
                                const Vector& oof_mu0, const Vector& oof_mu1,
                                const Vector& known_propensity) {
  const Eigen::Index n = data.n();
  if (members.out_of_fold.rows() != n)
    throw std::invalid_argument("fit_causal_stacking: row mismatch");
  for (Eigen::Index i = 0; i < known_propensity.size(); ++i)
    if (!(known_propensity[i] > 0.0 && known_propensity[i] < 1.0))
      throw std::invalid_argument("fit_causal_stacking: propensity must lie in (0,1)");

  const Vector tau_po =
      causal_stacking_pseudo_outcome(data.outcome, data.treatment, oof_mu0, oof_mu1,
                                     known_propensity)
          .values;
  const LinearFit simplex = fit_simplex_ls(DesignMatrix(members.out_of_fold), tau_po);

  EnsembleFit fit;
  fit.member_labels = members.labels;
  fit.weights = simplex.coefficients;
  fit.combined = make_combined(members, fit.weights, 0.0, "Causal-Stacking");
  return fit;
}

EnsembleFit fit_t_stacking(const TrialDataset& data, const MemberPredictions& members,
                           const Vector& validation_t_predictions) {
  if (members.out_of_fold.rows() != data.n() ||
      validation_t_predictions.size() != data.n())
    throw std::invalid_argument("fit_t_stacking: row mismatch");

  const LinearFit nn = fit_nnls(DesignMatrix(members.out_of_fold), validation_t_predictions);

  EnsembleFit fit;
  fit.member_labels = members.labels;
  fit.weights = nn.coefficients;
  fit.combined = make_combined(members, fit.weights, 0.0, "T-Stacking");
  return fit;
}

std::string ConsensusDiagnostics::to_csv(const std::vector<std::string>& labels) const {
  std::ostringstream out;
  out << "member";
  for (const auto& l : labels) out << "," << l;
  out << ",mean_corr\n";
  for (Eigen::Index i = 0; i < tau_matrix.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < tau_matrix.cols(); ++j) out << "," << tau_matrix(i, j);
    out << "," << mean_corr[i] << "\n";
  }
  return out.str();
}

CbaResult cba_combine(const Matrix& prediction_matrix, const std::vector<std::string>& labels,
                      const std::vector<CateModelPtr>& refit_members, KendallVariant variant) {
  const Eigen::Index K = prediction_matrix.cols();
  if (K < 2) throw std::invalid_argument("cba_combine: K >= 2 members required");
  if (static_cast<Eigen::Index>(labels.size()) != K)
    throw std::invalid_argument("cba_combine: label count mismatch");
  if (!refit_members.empty() && static_cast<Eigen::Index>(refit_members.size()) != K)
    throw std::invalid_argument("cba_combine: refit member count mismatch");

  CbaResult result;
  auto& diag = result.diagnostics;

  // constant predictions have no ranking; drop them up front
  std::vector<int> survivors;
  for (Eigen::Index k = 0; k < K; ++k) {
    const Vector& col = prediction_matrix.col(k);
    if ((col.array() == col[0]).all())
      diag.dropped.push_back(static_cast<int>(k));
    else
      survivors.push_back(static_cast<int>(k));
  }

  auto finish = [&](const std::vector<int>& selected) {
    result.fit.member_labels = labels;
    result.fit.selected = selected;
    result.fit.weights = Vector::Zero(K);
    for (int k : selected)
      result.fit.weights[k] = 1.0 / static_cast<double>(selected.size());
    if (!refit_members.empty())
      result.fit.combined =
          std::make_shared<CombinedCateModel>(refit_members, result.fit.weights, 0.0, "CBA");
  };

  if (survivors.size() < 2) {
    // not enough rankable members: average all originals
    std::vector<int> all(static_cast<std::size_t>(K));
    std::iota(all.begin(), all.end(), 0);
    finish(all);
    diag.knee_index = static_cast<int>(K);
    return result;
  }

  const Eigen::Index S = static_cast<Eigen::Index>(survivors.size());
  diag.tau_matrix = Matrix::Identity(S, S);
  for (Eigen::Index i = 0; i < S; ++i)
    for (Eigen::Index j = i + 1; j < S; ++j) {
      const double tau = kendall_tau(prediction_matrix.col(survivors[static_cast<std::size_t>(i)]),
                                     prediction_matrix.col(survivors[static_cast<std::size_t>(j)]),
                                     variant);
      diag.tau_matrix(i, j) = tau;
      diag.tau_matrix(j, i) = tau;
    }

  diag.mean_corr.resize(S);
  for (Eigen::Index i = 0; i < S; ++i)
    diag.mean_corr[i] =
        (diag.tau_matrix.row(i).sum() - 1.0) / static_cast<double>(S - 1);

  // sort descending by mean agreement; ties keep original member order
  diag.sorted_order.resize(static_cast<std::size_t>(S));
  std::iota(diag.sorted_order.begin(), diag.sorted_order.end(), 0);
  std::stable_sort(diag.sorted_order.begin(), diag.sorted_order.end(), [&](int a, int b) {
    return diag.mean_corr[a] > diag.mean_corr[b];
  });

  int m = static_cast<int>(S);
  if (S > 2) {
    // knee = largest drop in the sorted curve; first index wins ties
    double best_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i + 1 < S; ++i) {
      const double gap = diag.mean_corr[diag.sorted_order[static_cast<std::size_t>(i + 1)]] -
                         diag.mean_corr[diag.sorted_order[static_cast<std::size_t>(i)]];
      if (gap < best_gap) {
        best_gap = gap;
        m = static_cast<int>(i) + 1;
      }
    }
  }
  diag.knee_index = m;

  std::vector<int> selected;
  for (int i = 0; i < m; ++i)
    selected.push_back(survivors[static_cast<std::size_t>(diag.sorted_order[static_cast<std::size_t>(i)])]);
  std::sort(selected.begin(), selected.end());
  finish(selected);
  return result;
}

}  // namespace hte
