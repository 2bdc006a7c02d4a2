#include <cmath>
#include <stdexcept>

#include "hte/data.hpp"
#include "hte/metrics.hpp"

namespace hte {

double srmse(const Vector& tau_hat, const Vector& tau) {
  if (tau_hat.size() != tau.size()) throw std::invalid_argument("srmse: length mismatch");
  if (tau.size() < 2) throw std::invalid_argument("srmse: need at least 2 points");
  const double mean = tau.mean();
  const double denom = (tau.array() - mean).square().sum();
  if (denom <= 0.0) throw std::domain_error("degenerate CATE variance");
  const double num = (tau_hat - tau).squaredNorm();
  return std::sqrt(num / denom);
}

double rod(const Vector& tau_hat, const Vector& tau, KendallVariant variant) {
  return (1.0 - kendall_tau(tau_hat, tau, variant)) / 2.0;
}

std::size_t SubgroupSpec::size() const {
  std::size_t count = 0;
  for (bool b : member_mask)
    if (b) ++count;
  return count;
}

namespace {

constexpr double kSubgroupQuantile = 0.4472135954999579;  // sqrt(0.2)

std::vector<double> masked_column(const Matrix& X, int feature, const std::vector<bool>* mask) {
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    vals.push_back(X(i, feature));
  }
  return vals;
}

}  // namespace

std::vector<SubgroupSpec> enumerate_subgroups(const DesignMatrix& covariates,
                                              SubgroupDirection direction) {
  validate(covariates);
  const int p = static_cast<int>(covariates.cols());
  const Eigen::Index m = covariates.rows();
  if (p < 2) throw std::invalid_argument("enumerate_subgroups: p >= 2 required");
  if (m < 25) throw std::invalid_argument("enumerate_subgroups: m >= 25 required");

  const Matrix& X = covariates.values;
  std::vector<std::pair<bool, bool>> variants = {{false, false}};
  if (direction == SubgroupDirection::Both)
    variants = {{false, false}, {false, true}, {true, false}, {true, true}};

  std::vector<SubgroupSpec> out;
  for (const auto& [upper1, upper2] : variants) {
    for (int j = 0; j < p; ++j) {
      const double q1 = upper1 ? 1.0 - kSubgroupQuantile : kSubgroupQuantile;
      const double t1 = quantile(masked_column(X, j, nullptr), q1);
      std::vector<bool> s1(static_cast<std::size_t>(m));
      bool any = false;
      for (Eigen::Index i = 0; i < m; ++i) {
        const bool in = upper1 ? X(i, j) >= t1 : X(i, j) <= t1;
        s1[static_cast<std::size_t>(i)] = in;
        any = any || in;
      }
      if (!any) continue;

      for (int k = 0; k < p; ++k) {
        if (k == j) continue;
        const double q2 = upper2 ? 1.0 - kSubgroupQuantile : kSubgroupQuantile;
        const auto within = masked_column(X, k, &s1);
        if (within.empty()) continue;
        const double t2 = quantile(within, q2);

        SubgroupSpec sg;
        sg.first_feature = j;
        sg.second_feature = k;
        sg.t1 = t1;
        sg.t2 = t2;
        sg.upper1 = upper1;
        sg.upper2 = upper2;
        sg.member_mask.resize(static_cast<std::size_t>(m));
        std::size_t count = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
          const bool in = s1[static_cast<std::size_t>(i)] &&
                          (upper2 ? X(i, k) >= t2 : X(i, k) <= t2);
          sg.member_mask[static_cast<std::size_t>(i)] = in;
          if (in) ++count;
        }
        if (count == 0) continue;  // dropped
        out.push_back(std::move(sg));
      }
    }
  }
  return out;
}

double subgroup_dim_estimate(const TrialDataset& data, const SubgroupSpec& subgroup) {
  if (subgroup.member_mask.size() != static_cast<std::size_t>(data.n()))
    throw std::invalid_argument("subgroup_dim_estimate: mask length mismatch");
  double sum_ty = 0.0, sum_cy = 0.0;
  std::size_t n_t = 0, n_c = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!subgroup.member_mask[static_cast<std::size_t>(i)]) continue;
    if (data.treatment[i] == 1.0) {
      sum_ty += data.outcome[i];
      ++n_t;
    } else {
      sum_cy += data.outcome[i];
      ++n_c;
    }
  }
  if (n_t == 0 || n_c == 0) throw std::domain_error("single-arm subgroup");
  return sum_ty / static_cast<double>(n_t) - sum_cy / static_cast<double>(n_c);
}

namespace {

double masked_mean(const Vector& v, const std::vector<bool>& mask) {
  double acc = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    acc += v[i];
    ++count;
  }
  return acc / static_cast<double>(count);
}

SubgroupMetrics metrics_over_groups(const Vector& hat_g, const Vector& true_g,
                                    KendallVariant variant) {
  SubgroupMetrics out;
  out.srmse_sg = srmse(hat_g, true_g);
  out.rod_sg = rod(hat_g, true_g, variant);
  return out;
}

}  // namespace

std::pair<Vector, Vector> subgroup_means(const Vector& predictions, const EvaluationSet& eval,
                                         const std::vector<SubgroupSpec>& subgroups) {
  if (predictions.size() != eval.m())
    throw std::invalid_argument("subgroup_means: prediction length mismatch");
  if (subgroups.size() < 2) throw std::invalid_argument("subgroup_means: need >= 2 subgroups");

  Vector hat_g(static_cast<Eigen::Index>(subgroups.size()));
  Vector true_g(static_cast<Eigen::Index>(subgroups.size()));
  for (std::size_t g = 0; g < subgroups.size(); ++g) {
    hat_g[static_cast<Eigen::Index>(g)] = masked_mean(predictions, subgroups[g].member_mask);
    true_g[static_cast<Eigen::Index>(g)] = masked_mean(eval.true_cate, subgroups[g].member_mask);
  }
  return {std::move(hat_g), std::move(true_g)};
}

SubgroupMetrics subgroup_metrics(const Vector& predictions, const EvaluationSet& eval,
                                 const std::vector<SubgroupSpec>& subgroups,
                                 KendallVariant variant) {
  auto [hat_g, true_g] = subgroup_means(predictions, eval, subgroups);
  return metrics_over_groups(hat_g, true_g, variant);
}

SubgroupMetrics subgroup_metrics(const CateModel& model, const EvaluationSet& eval,
                                 const std::vector<SubgroupSpec>& subgroups,
                                 KendallVariant variant) {
  return subgroup_metrics(model.predict_cate(eval.covariates), eval, subgroups, variant);
}

SubgroupMetrics subgroup_dim_metrics(const TrialDataset& data, const Vector& true_tau,
                                     const std::vector<SubgroupSpec>& subgroups,
                                     KendallVariant variant) {
  if (true_tau.size() != data.n())
    throw std::invalid_argument("subgroup_dim_metrics: tau length mismatch");

  std::vector<double> hat, truth;
  for (const auto& sg : subgroups) {
    try {
      const double dim = subgroup_dim_estimate(data, sg);
      hat.push_back(dim);
      truth.push_back(masked_mean(true_tau, sg.member_mask));
    } catch (const std::domain_error&) {
      // single-arm subgroup: excluded from the aggregate
    }
  }
  if (hat.size() < 2)
    throw std::domain_error("subgroup_dim_metrics: fewer than 2 usable subgroups");

  Vector hat_g = Eigen::Map<Vector>(hat.data(), static_cast<Eigen::Index>(hat.size()));
  Vector true_g = Eigen::Map<Vector>(truth.data(), static_cast<Eigen::Index>(truth.size()));
  return metrics_over_groups(hat_g, true_g, variant);
}

}  // namespace hte
