#pragma once

#include <optional>

#include "hte/cate_model.hpp"
#include "hte/learners.hpp"

namespace hte {

// Cross-fitted nuisance estimates with fold provenance. Out-of-fold vectors
// cover every training row; the full-data refits serve deployment.
struct NuisanceSet {
  std::shared_ptr<const FittedRegressor> m_hat;    // E[Y | X]
  std::shared_ptr<const FittedRegressor> mu0_hat;  // E[Y | A=0, X]
  std::shared_ptr<const FittedRegressor> mu1_hat;  // E[Y | A=1, X]
  LogisticModel pi_hat;
  FoldAssignment folds;
  Vector oof_m;
  Vector oof_pi;
  Vector oof_mu0;
  Vector oof_mu1;
};

struct NuisanceOptions {
  int k_folds = 3;
  std::uint64_t seed = 0;
  bool fit_m = true;
  bool fit_pi = true;
  bool fit_mu = true;
};

NuisanceSet compute_nuisances(const TrialDataset& data, const Regressor& outcome_base,
                              const NuisanceOptions& options);

// Logistic regression of A on X, probabilities clipped. Errors if either arm
// is empty (the dataset is unusable for CATE estimation).
LogisticModel fit_propensity(const TrialDataset& data);

enum class PseudoOutcomeKind { XD0, XD1, DrPhi, CsTauPo };

struct PseudoOutcome {
  Vector values;
  PseudoOutcomeKind kind;
};

// phi = (A - pi) / (pi (1 - pi)) * (Y - mu_A) + mu1 - mu0
PseudoOutcome dr_pseudo_outcome(const Vector& y, const Vector& a, const Vector& mu0,
                                const Vector& mu1, const Vector& pi);
// tauPO = (mu1 - mu0) + (Y - mu1) A / pi - (Y - mu0)(1 - A) / (1 - pi)
PseudoOutcome causal_stacking_pseudo_outcome(const Vector& y, const Vector& a, const Vector& mu0,
                                             const Vector& mu1, const Vector& pi);

// ------------------------------------------------------------- learners ----

CateModelPtr fit_s_learner(const TrialDataset& data, RegressorPtr base,
                           const std::string& label = "S");

CateModelPtr fit_t_learner(const TrialDataset& data, RegressorPtr base0, RegressorPtr base1,
                           const std::string& label = "T");

struct XLearnerOptions {
  std::optional<double> fixed_propensity;  // skip the logistic fit
  std::string label = "X";
};
CateModelPtr fit_x_learner(const TrialDataset& data, RegressorPtr base_outcome,
                           RegressorPtr base_effect, const XLearnerOptions& options = {});

enum class DrMode { Split, Crossfit };
CateModelPtr fit_dr_learner(const TrialDataset& data, RegressorPtr base_outcome,
                            RegressorPtr base_final, DrMode mode = DrMode::Crossfit,
                            std::uint64_t seed = 0, const std::string& label = "DR");

// R-objective as a weighted regression of (Y - m)/(A - pi) on X with weights
// (A - pi)^2. m_base defaults to the zoo random forest.
CateModelPtr fit_r_learner(const TrialDataset& data, RegressorPtr base_effect,
                           RegressorPtr m_base = nullptr, int k_folds = 3, std::uint64_t seed = 0,
                           const std::string& label = "R");
// same transform on caller-supplied out-of-fold nuisances
CateModelPtr fit_r_learner(const TrialDataset& data, RegressorPtr base_effect,
                           const NuisanceSet& nuisances, const std::string& label = "R");

// (1/n) sum [(Y - m) - (A - pi) tau]^2 over out-of-fold nuisances
double r_loss(const TrialDataset& data, const NuisanceSet& nuisances, const Vector& tau_hat);

// X-learner whose outcome and effect stages are stacked regressors over the
// given base set; propensity by logistic regression.
CateModelPtr fit_stacked_x_learner(const TrialDataset& data, std::vector<RegressorPtr> base_set,
                                   std::uint64_t seed, const std::string& label = "Stacked-X");

}  // namespace hte
