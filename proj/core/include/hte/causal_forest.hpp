#pragma once

#include <optional>

#include "hte/cate_model.hpp"
#include "hte/learners.hpp"

namespace hte {

struct CausalForestParams {
  int n_trees = 500;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  int min_leaf = 5;  // per treatment arm
  double subsample = 0.5;  // without replacement
  bool honesty = true;
  int max_depth = 30;
  std::uint64_t seed = 0;
  int n_threads = 1;
  int nuisance_folds = 3;
  // test hooks / known-randomization shortcuts: fix pi-hat at a constant
  // and/or skip outcome centering (m-hat == 0)
  std::optional<double> fixed_propensity;
  bool center_outcome = true;
};

// One causal tree: CART structure whose node estimates are the
// residual-on-residual ratio theta = sum(at*yt) / sum(at^2).
struct CausalTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double theta = 0.0;
  };
  std::vector<Node> nodes;
  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

class CausalForestModel : public CateModel {
 public:
  CausalForestModel(std::vector<CausalTree> trees, std::string label, Vector residual_outcome,
                    Vector residual_treatment)
      : trees_(std::move(trees)), label_(std::move(label)),
        residual_outcome_(std::move(residual_outcome)),
        residual_treatment_(std::move(residual_treatment)) {}

  Vector predict_cate(const DesignMatrix& X) const override;
  std::string label() const override { return label_; }

  // centered training vectors (Y - m-hat, A - pi-hat), kept for diagnostics
  const Vector& residual_outcome() const { return residual_outcome_; }
  const Vector& residual_treatment() const { return residual_treatment_; }
  std::size_t n_trees() const { return trees_.size(); }

 private:
  std::vector<CausalTree> trees_;
  std::string label_;
  Vector residual_outcome_;
  Vector residual_treatment_;
};

// Debiased causal forest with optional honesty. Outcome centering uses a
// cross-fitted random forest, the propensity a cross-fitted logistic fit.
std::shared_ptr<CausalForestModel> fit_causal_forest(const TrialDataset& data,
                                                     const CausalForestParams& params);

}  // namespace hte
