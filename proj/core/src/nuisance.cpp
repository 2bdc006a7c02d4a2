#include <stdexcept>

#include "hte/meta_learners.hpp"
#include "hte/random.hpp"

namespace hte {

LogisticModel fit_propensity(const TrialDataset& data) {
  validate(data);
  if (data.treated_indices().empty() || data.control_indices().empty())
    throw std::invalid_argument("fit_propensity: both arms must be present");
  return fit_logistic(data.covariates, data.treatment);
}

namespace {

Vector subset(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  return out;
}

void scatter(Vector& dest, const std::vector<std::size_t>& idx, const Vector& vals) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    dest[static_cast<Eigen::Index>(idx[i])] = vals[static_cast<Eigen::Index>(i)];
}

std::vector<std::size_t> arm_rows(const TrialDataset& data,
                                  const std::vector<std::size_t>& pool, double arm) {
  std::vector<std::size_t> out;
  for (std::size_t r : pool)
    if (data.treatment[static_cast<Eigen::Index>(r)] == arm) out.push_back(r);
  return out;
}

}  // namespace

NuisanceSet compute_nuisances(const TrialDataset& data, const Regressor& outcome_base,
                              const NuisanceOptions& options) {
  validate(data);
  const Eigen::Index n = data.n();

  NuisanceSet ns;
  ns.folds = make_folds(data, options.k_folds, stable_seed(options.seed, "nuisance"));
  if (options.fit_m) ns.oof_m = Vector::Zero(n);
  if (options.fit_pi) ns.oof_pi = Vector::Zero(n);
  if (options.fit_mu) {
    ns.oof_mu0 = Vector::Zero(n);
    ns.oof_mu1 = Vector::Zero(n);
  }

  for (int f = 0; f < options.k_folds; ++f) {
    const auto train_idx = ns.folds.out_of_fold_indices(f);
    const auto val_idx = ns.folds.fold_indices(f);
    const DesignMatrix Xval = data.covariates.select_rows(val_idx);
    const TrialDataset train = data.select_rows(train_idx);

    if (options.fit_m) {
      auto m = outcome_base.fit(train.covariates, train.outcome);
      scatter(ns.oof_m, val_idx, m->predict(Xval));
    }
    if (options.fit_pi) {
      LogisticModel pi = fit_logistic(train.covariates, train.treatment);
      scatter(ns.oof_pi, val_idx, pi.predict_probability(Xval));
    }
    if (options.fit_mu) {
      const auto controls = arm_rows(data, train_idx, 0.0);
      const auto treated = arm_rows(data, train_idx, 1.0);
      if (controls.empty() || treated.empty())
        throw std::runtime_error("compute_nuisances: single-arm training fold");
      auto mu0 = outcome_base.fit(data.covariates.select_rows(controls),
                                  subset(data.outcome, controls));
      auto mu1 = outcome_base.fit(data.covariates.select_rows(treated),
                                  subset(data.outcome, treated));
      scatter(ns.oof_mu0, val_idx, mu0->predict(Xval));
      scatter(ns.oof_mu1, val_idx, mu1->predict(Xval));
    }
  }

  // full-data refits for deployment predictions
  if (options.fit_m) ns.m_hat = outcome_base.fit(data.covariates, data.outcome);
  if (options.fit_pi) ns.pi_hat = fit_propensity(data);
  if (options.fit_mu) {
    const auto controls = data.control_indices();
    const auto treated = data.treated_indices();
    ns.mu0_hat =
        outcome_base.fit(data.covariates.select_rows(controls), subset(data.outcome, controls));
    ns.mu1_hat =
        outcome_base.fit(data.covariates.select_rows(treated), subset(data.outcome, treated));
  }
  return ns;
}

PseudoOutcome dr_pseudo_outcome(const Vector& y, const Vector& a, const Vector& mu0,
                                const Vector& mu1, const Vector& pi) {
  const Eigen::Index n = y.size();
  if (a.size() != n || mu0.size() != n || mu1.size() != n || pi.size() != n)
    throw std::invalid_argument("dr_pseudo_outcome: length mismatch");
  PseudoOutcome out{Vector(n), PseudoOutcomeKind::DrPhi};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu_a = a[i] == 1.0 ? mu1[i] : mu0[i];
    out.values[i] =
        (a[i] - pi[i]) / (pi[i] * (1.0 - pi[i])) * (y[i] - mu_a) + mu1[i] - mu0[i];
  }
  return out;
}

PseudoOutcome causal_stacking_pseudo_outcome(const Vector& y, const Vector& a, const Vector& mu0,
                                             const Vector& mu1, const Vector& pi) {
  const Eigen::Index n = y.size();
  if (a.size() != n || mu0.size() != n || mu1.size() != n || pi.size() != n)
    throw std::invalid_argument("causal_stacking_pseudo_outcome: length mismatch");
  PseudoOutcome out{Vector(n), PseudoOutcomeKind::CsTauPo};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = (mu1[i] - mu0[i]) + (y[i] - mu1[i]) * a[i] / pi[i] -
                    (y[i] - mu0[i]) * (1.0 - a[i]) / (1.0 - pi[i]);
  }
  return out;
}

}  // namespace hte
