#pragma once

#include "hte/cate_model.hpp"
#include "hte/numerics.hpp"

namespace hte {

// sqrt( sum (tau_hat - tau)^2 / sum (tau - mean tau)^2 ).
// Throws std::domain_error("degenerate CATE variance") for constant tau.
double srmse(const Vector& tau_hat, const Vector& tau);

// (1 - Kendall tau) / 2; throws std::domain_error("zero-variance ranking")
// when either ranking is constant.
double rod(const Vector& tau_hat, const Vector& tau,
           KendallVariant variant = KendallVariant::TauB);

// Two-feature half-open box: rows pass the first-feature filter, then the
// second-feature filter evaluated within that subset.
struct SubgroupSpec {
  int first_feature = 0;
  int second_feature = 0;
  double t1 = 0.0;
  double t2 = 0.0;
  bool upper1 = false;  // true: x >= t instead of x <= t
  bool upper2 = false;
  std::vector<bool> member_mask;

  std::size_t size() const;
};

enum class SubgroupDirection { Lower, Both };

// All ordered feature pairs (j, k): t1 at the sqrt(0.2) quantile of feature j,
// t2 at the sqrt(0.2) quantile of feature k within the first filter, giving
// ~20% boxes under independence. direction Both mirrors with >= filters at the
// 1 - sqrt(0.2) quantile. Empty subgroups are dropped.
std::vector<SubgroupSpec> enumerate_subgroups(const DesignMatrix& covariates,
                                              SubgroupDirection direction = SubgroupDirection::Lower);

// difference of arm means within the subgroup (Eq.-style observed-data
// estimate). Throws std::domain_error on a single-arm subgroup.
double subgroup_dim_estimate(const TrialDataset& data, const SubgroupSpec& subgroup);

struct SubgroupMetrics {
  double srmse_sg = 0.0;
  double rod_sg = 0.0;
};

// per-subgroup (predicted mean, true mean) vectors used by both metric modes
std::pair<Vector, Vector> subgroup_means(const Vector& predictions, const EvaluationSet& eval,
                                         const std::vector<SubgroupSpec>& subgroups);

// Model-average mode: tau_hat_g = mean model prediction over members,
// tau_g = mean true CATE over members, then srmse/rod across subgroups.
SubgroupMetrics subgroup_metrics(const Vector& predictions, const EvaluationSet& eval,
                                 const std::vector<SubgroupSpec>& subgroups,
                                 KendallVariant variant = KendallVariant::TauB);
SubgroupMetrics subgroup_metrics(const CateModel& model, const EvaluationSet& eval,
                                 const std::vector<SubgroupSpec>& subgroups,
                                 KendallVariant variant = KendallVariant::TauB);

// Observed-data mode: tau_hat_g from subgroup_dim_estimate on a trial dataset
// whose true CATE per row is supplied. Single-arm subgroups are excluded.
SubgroupMetrics subgroup_dim_metrics(const TrialDataset& data, const Vector& true_tau,
                                     const std::vector<SubgroupSpec>& subgroups,
                                     KendallVariant variant = KendallVariant::TauB);

}  // namespace hte
