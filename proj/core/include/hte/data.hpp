#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hte/design_matrix.hpp"

namespace hte {

// Covariates, binary treatment and outcome for n patients.
struct TrialDataset {
  DesignMatrix covariates;
  Vector treatment;  // entries in {0, 1}
  Vector outcome;
  std::string id;
  std::uint64_t seed_provenance = 0;

  Eigen::Index n() const { return covariates.rows(); }
  Eigen::Index p() const { return covariates.cols(); }

  std::vector<std::size_t> treated_indices() const;
  std::vector<std::size_t> control_indices() const;
  TrialDataset select_rows(const std::vector<std::size_t>& idx) const;
};

// throws on shape mismatch, non-finite values, or non-binary treatment
void validate(const TrialDataset& data);

// Covariates plus ground-truth CATE (and optionally potential-outcome means).
struct EvaluationSet {
  DesignMatrix covariates;
  Vector true_cate;
  std::optional<Vector> mu0;
  std::optional<Vector> mu1;

  Eigen::Index m() const { return covariates.rows(); }
};

void validate(const EvaluationSet& eval);

struct FoldAssignment {
  std::vector<int> fold_of;  // values in [0, k)
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = true;  // false when an arm was too small and we fell back

  std::vector<std::size_t> fold_indices(int fold) const;
  std::vector<std::size_t> out_of_fold_indices(int fold) const;
};

// k-fold assignment, deterministic for a given seed. Strata with fewer members
// than folds trigger an unstratified fallback (stratified flag cleared).
FoldAssignment make_folds_strata(std::size_t n, int k, std::uint64_t seed,
                                 const std::vector<int>* strata);

// Stratified by treatment arm; fold sizes differ by at most one.
FoldAssignment make_folds(const TrialDataset& dataset, int k, std::uint64_t seed);

// Empirical quantile with linear interpolation between order statistics
// (type-7). q must lie in (0, 1).
double quantile(const Vector& values, double q);
double quantile(std::vector<double> values, double q);

}  // namespace hte
