#include <cmath>
#include <stdexcept>
#include <utility>

#include "hte/meta_learners.hpp"
#include "hte/random.hpp"

namespace hte {

namespace {

Vector subset(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  return out;
}

void require_both_arms(const TrialDataset& data, const char* who) {
  if (data.treated_indices().empty() || data.control_indices().empty())
    throw std::invalid_argument(std::string(who) + ": both arms must be present");
}

// ---- S-learner ----

class SLearnerModel : public CateModel {
 public:
  SLearnerModel(std::unique_ptr<FittedRegressor> fit, std::string label)
      : fit_(std::move(fit)), label_(std::move(label)) {}

  Vector predict_cate(const DesignMatrix& X) const override {
    const Vector ones = Vector::Ones(X.rows());
    const Vector zeros = Vector::Zero(X.rows());
    return fit_->predict(X.with_column(ones, "a")) - fit_->predict(X.with_column(zeros, "a"));
  }
  std::string label() const override { return label_; }

 private:
  std::unique_ptr<FittedRegressor> fit_;
  std::string label_;
};

// ---- T-learner ----

class TLearnerModel : public CateModel {
 public:
  TLearnerModel(std::unique_ptr<FittedRegressor> mu0, std::unique_ptr<FittedRegressor> mu1,
                std::string label)
      : mu0_(std::move(mu0)), mu1_(std::move(mu1)), label_(std::move(label)) {}

  Vector predict_cate(const DesignMatrix& X) const override {
    return mu1_->predict(X) - mu0_->predict(X);
  }
  std::string label() const override { return label_; }

 private:
  std::unique_ptr<FittedRegressor> mu0_;
  std::unique_ptr<FittedRegressor> mu1_;
  std::string label_;
};

// ---- X-learner ----

class XLearnerModel : public CateModel {
 public:
  XLearnerModel(std::unique_ptr<FittedRegressor> tau0, std::unique_ptr<FittedRegressor> tau1,
                std::optional<LogisticModel> pi, std::optional<double> fixed_pi, std::string label)
      : tau0_(std::move(tau0)), tau1_(std::move(tau1)), pi_(std::move(pi)), fixed_pi_(fixed_pi),
        label_(std::move(label)) {}

  Vector predict_cate(const DesignMatrix& X) const override {
    const Vector t0 = tau0_->predict(X);
    const Vector t1 = tau1_->predict(X);
    const Vector pi = fixed_pi_ ? Vector::Constant(X.rows(), *fixed_pi_)
                                : pi_->predict_probability(X);
    return pi.cwiseProduct(t0) + (Vector::Ones(X.rows()) - pi).cwiseProduct(t1);
  }
  std::string label() const override { return label_; }

 private:
  std::unique_ptr<FittedRegressor> tau0_;
  std::unique_ptr<FittedRegressor> tau1_;
  std::optional<LogisticModel> pi_;
  std::optional<double> fixed_pi_;
  std::string label_;
};

// ---- regression-backed models (DR final stage, R-learner effect stage) ----

class RegressorCateModel : public CateModel {
 public:
  RegressorCateModel(std::unique_ptr<FittedRegressor> fit, std::string label)
      : fit_(std::move(fit)), label_(std::move(label)) {}
  Vector predict_cate(const DesignMatrix& X) const override { return fit_->predict(X); }
  std::string label() const override { return label_; }

 private:
  std::unique_ptr<FittedRegressor> fit_;
  std::string label_;
};

struct ArmFits {
  std::unique_ptr<FittedRegressor> mu0;
  std::unique_ptr<FittedRegressor> mu1;
};

ArmFits fit_arms(const TrialDataset& data, const Regressor& base0, const Regressor& base1,
                 std::size_t min_arm, const char* who) {
  const auto controls = data.control_indices();
  const auto treated = data.treated_indices();
  if (controls.size() < min_arm || treated.size() < min_arm)
    throw std::invalid_argument(std::string(who) + ": arm too small (control=" +
                                std::to_string(controls.size()) + ", treated=" +
                                std::to_string(treated.size()) + ", need >= " +
                                std::to_string(min_arm) + ")");
  ArmFits fits;
  fits.mu0 = base0.fit(data.covariates.select_rows(controls), subset(data.outcome, controls));
  fits.mu1 = base1.fit(data.covariates.select_rows(treated), subset(data.outcome, treated));
  return fits;
}

}  // namespace

CateModelPtr fit_s_learner(const TrialDataset& data, RegressorPtr base, const std::string& label) {
  validate(data);
  require_both_arms(data, "fit_s_learner");
  DesignMatrix Xa = data.covariates.with_column(data.treatment, "a");
  return std::make_shared<SLearnerModel>(base->fit(Xa, data.outcome), label);
}

CateModelPtr fit_t_learner(const TrialDataset& data, RegressorPtr base0, RegressorPtr base1,
                           const std::string& label) {
  validate(data);
  ArmFits fits = fit_arms(data, *base0, *base1, 10, "fit_t_learner");
  return std::make_shared<TLearnerModel>(std::move(fits.mu0), std::move(fits.mu1), label);
}

CateModelPtr fit_x_learner(const TrialDataset& data, RegressorPtr base_outcome,
                           RegressorPtr base_effect, const XLearnerOptions& options) {
  validate(data);
  ArmFits stage1 = fit_arms(data, *base_outcome, *base_outcome, 10, "fit_x_learner");

  const auto controls = data.control_indices();
  const auto treated = data.treated_indices();
  const DesignMatrix Xc = data.covariates.select_rows(controls);
  const DesignMatrix Xt = data.covariates.select_rows(treated);

  // D0 = mu1(X) - Y on controls, D1 = Y - mu0(X) on treated
  const Vector d0 = stage1.mu1->predict(Xc) - subset(data.outcome, controls);
  const Vector d1 = subset(data.outcome, treated) - stage1.mu0->predict(Xt);

  auto tau0 = base_effect->fit(Xc, d0);
  auto tau1 = base_effect->fit(Xt, d1);

  std::optional<LogisticModel> pi;
  if (!options.fixed_propensity) pi = fit_propensity(data);
  return std::make_shared<XLearnerModel>(std::move(tau0), std::move(tau1), std::move(pi),
                                         options.fixed_propensity, options.label);
}

CateModelPtr fit_dr_learner(const TrialDataset& data, RegressorPtr base_outcome,
                            RegressorPtr base_final, DrMode mode, std::uint64_t seed,
                            const std::string& label) {
  validate(data);
  require_both_arms(data, "fit_dr_learner");
  if (data.n() < 40) throw std::invalid_argument("fit_dr_learner: n >= 40 required");

  FoldAssignment folds = make_folds(data, 2, stable_seed(seed, "dr"));

  auto nuisances_on = [&](const std::vector<std::size_t>& train_idx) {
    const TrialDataset train = data.select_rows(train_idx);
    require_both_arms(train, "fit_dr_learner (fold)");
    struct Fold {
      ArmFits arms;
      LogisticModel pi;
    };
    Fold f{fit_arms(train, *base_outcome, *base_outcome, 1, "fit_dr_learner"),
           fit_propensity(train)};
    if (f.pi.degenerate) throw std::runtime_error("fit_dr_learner: degenerate propensity");
    return f;
  };

  auto phi_for = [&](const auto& nuis, const std::vector<std::size_t>& rows) {
    const DesignMatrix Xr = data.covariates.select_rows(rows);
    return dr_pseudo_outcome(subset(data.outcome, rows), subset(data.treatment, rows),
                             nuis.arms.mu0->predict(Xr), nuis.arms.mu1->predict(Xr),
                             nuis.pi.predict_probability(Xr))
        .values;
  };

  if (mode == DrMode::Split) {
    const auto s1 = folds.fold_indices(0);
    const auto s2 = folds.fold_indices(1);
    const auto nuis = nuisances_on(s1);
    const Vector phi = phi_for(nuis, s2);
    auto final_fit = base_final->fit(data.covariates.select_rows(s2), phi);
    return std::make_shared<RegressorCateModel>(std::move(final_fit), label);
  }

  // cross-fit: 2-fold swap, pseudo-outcome out-of-fold on all rows
  Vector phi(data.n());
  for (int f = 0; f < 2; ++f) {
    const auto nuis = nuisances_on(folds.out_of_fold_indices(f));
    const auto rows = folds.fold_indices(f);
    const Vector vals = phi_for(nuis, rows);
    for (std::size_t i = 0; i < rows.size(); ++i)
      phi[static_cast<Eigen::Index>(rows[i])] = vals[static_cast<Eigen::Index>(i)];
  }
  auto final_fit = base_final->fit(data.covariates, phi);
  return std::make_shared<RegressorCateModel>(std::move(final_fit), label);
}

CateModelPtr fit_r_learner(const TrialDataset& data, RegressorPtr base_effect,
                           const NuisanceSet& nuisances, const std::string& label) {
  validate(data);
  require_both_arms(data, "fit_r_learner");
  const Eigen::Index n = data.n();
  if (nuisances.oof_m.size() != n || nuisances.oof_pi.size() != n)
    throw std::invalid_argument("fit_r_learner: out-of-fold nuisances must cover all rows");

  // transformed regression: y~ = (Y - m)/(A - pi) with weights (A - pi)^2
  Vector target(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double at = data.treatment[i] - nuisances.oof_pi[i];
    if (std::abs(at) < 1e-6) {
      target[i] = 0.0;
      w[i] = 0.0;
    } else {
      target[i] = (data.outcome[i] - nuisances.oof_m[i]) / at;
      w[i] = at * at;
    }
  }
  auto fit = base_effect->fit(data.covariates, target, &w);
  return std::make_shared<RegressorCateModel>(std::move(fit), label);
}

CateModelPtr fit_r_learner(const TrialDataset& data, RegressorPtr base_effect,
                           RegressorPtr m_base, int k_folds, std::uint64_t seed,
                           const std::string& label) {
  validate(data);
  require_both_arms(data, "fit_r_learner");
  if (!m_base) m_base = make_random_forest(stable_seed(seed, "r-mhat"));

  NuisanceOptions opts;
  opts.k_folds = k_folds;
  opts.seed = stable_seed(seed, "r-nuisance");
  opts.fit_mu = false;
  const NuisanceSet ns = compute_nuisances(data, *m_base, opts);
  return fit_r_learner(data, std::move(base_effect), ns, label);
}

double r_loss(const TrialDataset& data, const NuisanceSet& nuisances, const Vector& tau_hat) {
  const Eigen::Index n = data.n();
  if (tau_hat.size() != n || nuisances.oof_m.size() != n || nuisances.oof_pi.size() != n)
    throw std::invalid_argument("r_loss: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = (data.outcome[i] - nuisances.oof_m[i]) -
                     (data.treatment[i] - nuisances.oof_pi[i]) * tau_hat[i];
    acc += e * e;
  }
  return acc / static_cast<double>(n);
}

CateModelPtr fit_stacked_x_learner(const TrialDataset& data, std::vector<RegressorPtr> base_set,
                                   std::uint64_t seed, const std::string& label) {
  validate(data);
  if (base_set.empty()) throw std::invalid_argument("fit_stacked_x_learner: empty base set");
  auto outcome_stage =
      std::make_shared<StackedRegressor>(base_set, 3, stable_seed(seed, "stage1"));
  auto effect_stage =
      std::make_shared<StackedRegressor>(std::move(base_set), 3, stable_seed(seed, "stage2"));
  XLearnerOptions options;
  options.label = label;
  return fit_x_learner(data, outcome_stage, effect_stage, options);
}

}  // namespace hte
