#pragma once

#include "hte/cate_model.hpp"
#include "hte/meta_learners.hpp"

namespace hte {

// Out-of-fold CATE predictions for every (unit, member), plus full-data
// refits for deployment.
struct MemberPredictions {
  std::vector<std::string> labels;
  Matrix out_of_fold;  // n x K
  std::vector<CateModelPtr> refit;
  std::vector<std::string> dropped;  // members that failed to fit
};

MemberPredictions crossfit_member_predictions(const TrialDataset& data,
                                              const std::vector<CateLearnerPtr>& members,
                                              int k_folds, std::uint64_t seed);

struct EnsembleFit {
  std::vector<std::string> member_labels;
  Vector weights;             // stacking weights (alpha)
  std::vector<int> selected;  // CBA subset, indices into member_labels
  double intercept_b = 0.0;   // R-stacking only
  double intercept_c = 0.0;   // R-stacking only
  CateModelPtr combined;      // null when no refit members were supplied
};

// training objective of the fit, for optimality checks
double r_stacking_objective(const Vector& residual_outcome, const Vector& residual_treatment,
                            const Matrix& member_matrix, double b, double c, const Vector& alpha);

// argmin over (b, c, alpha >= 0) of
//   sum [ (Y - m) - b - (c + sum alpha_k tau_k)(A - pi) ]^2,
// solved by alternating an OLS step for (b, c) with an NNLS step for alpha.
EnsembleFit fit_r_stacking(const TrialDataset& data, const MemberPredictions& members,
                           const NuisanceSet& nuisances);

// simplex-constrained least squares of the known-propensity pseudo-outcome
// on the member columns
EnsembleFit fit_causal_stacking(const TrialDataset& data, const MemberPredictions& members,
                                const Vector& oof_mu0, const Vector& oof_mu1,
                                const Vector& known_propensity);

// NNLS of an out-of-fold T-learner target on the member columns
EnsembleFit fit_t_stacking(const TrialDataset& data, const MemberPredictions& members,
                           const Vector& validation_t_predictions);

struct ConsensusDiagnostics {
  Matrix tau_matrix;            // pairwise Kendall tau over surviving members
  Vector mean_corr;             // mean off-diagonal agreement per member
  std::vector<int> sorted_order;  // surviving-member indices, best agreement first
  int knee_index = 0;           // m: number of selected members
  std::vector<int> dropped;     // original indices of constant members

  std::string to_csv(const std::vector<std::string>& labels) const;
};

struct CbaResult {
  EnsembleFit fit;
  ConsensusDiagnostics diagnostics;
};

// Consensus-based averaging: members are ranked by mean pairwise Kendall
// agreement, the sorted curve's largest drop marks the knee, and everything
// before it is averaged with equal weight. With K = 2 both members are kept.
CbaResult cba_combine(const Matrix& prediction_matrix, const std::vector<std::string>& labels,
                      const std::vector<CateModelPtr>& refit_members = {},
                      KendallVariant variant = KendallVariant::TauB);

}  // namespace hte
