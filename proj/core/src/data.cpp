#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hte/data.hpp"
#include "hte/random.hpp"

namespace hte {

std::vector<std::size_t> TrialDataset::treated_indices() const {
  std::vector<std::size_t> idx;
  for (Eigen::Index i = 0; i < treatment.size(); ++i)
    if (treatment[i] == 1.0) idx.push_back(static_cast<std::size_t>(i));
  return idx;
}

std::vector<std::size_t> TrialDataset::control_indices() const {
  std::vector<std::size_t> idx;
  for (Eigen::Index i = 0; i < treatment.size(); ++i)
    if (treatment[i] == 0.0) idx.push_back(static_cast<std::size_t>(i));
  return idx;
}

TrialDataset TrialDataset::select_rows(const std::vector<std::size_t>& idx) const {
  TrialDataset out;
  out.covariates = covariates.select_rows(idx);
  out.treatment.resize(static_cast<Eigen::Index>(idx.size()));
  out.outcome.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.treatment[static_cast<Eigen::Index>(i)] = treatment[static_cast<Eigen::Index>(idx[i])];
    out.outcome[static_cast<Eigen::Index>(i)] = outcome[static_cast<Eigen::Index>(idx[i])];
  }
  out.id = id;
  out.seed_provenance = seed_provenance;
  return out;
}

void validate(const TrialDataset& data) {
  validate(data.covariates);
  const Eigen::Index n = data.covariates.rows();
  if (data.treatment.size() != n || data.outcome.size() != n)
    throw std::invalid_argument("TrialDataset: component row counts differ");
  if (!data.outcome.allFinite()) throw std::invalid_argument("TrialDataset: non-finite outcome");
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.treatment[i] != 0.0 && data.treatment[i] != 1.0)
      throw std::invalid_argument("TrialDataset: treatment entries must be 0/1");
}

void validate(const EvaluationSet& eval) {
  validate(eval.covariates);
  if (eval.true_cate.size() != eval.covariates.rows())
    throw std::invalid_argument("EvaluationSet: true_cate length mismatch");
  if (!eval.true_cate.allFinite())
    throw std::invalid_argument("EvaluationSet: non-finite true_cate");
  if (eval.mu0.has_value() != eval.mu1.has_value())
    throw std::invalid_argument("EvaluationSet: mu0/mu1 must come together");
  if (eval.mu0) {
    if (eval.mu0->size() != eval.true_cate.size() || eval.mu1->size() != eval.true_cate.size())
      throw std::invalid_argument("EvaluationSet: mu length mismatch");
    const double gap = (*eval.mu1 - *eval.mu0 - eval.true_cate).cwiseAbs().maxCoeff();
    if (gap > 1e-10)
      throw std::invalid_argument("EvaluationSet: tau != mu1 - mu0");
  }
}

std::vector<std::size_t> FoldAssignment::fold_indices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> FoldAssignment::out_of_fold_indices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) idx.push_back(i);
  return idx;
}

FoldAssignment make_folds_strata(std::size_t n, int k, std::uint64_t seed,
                                 const std::vector<int>* strata) {
  if (k < 2) throw std::invalid_argument("make_folds: k >= 2 required");
  if (n < 2 * static_cast<std::size_t>(k))
    throw std::invalid_argument("make_folds: n >= 2k required");

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold_of.assign(n, -1);

  bool use_strata = strata != nullptr;
  std::vector<std::vector<std::size_t>> groups;
  if (use_strata) {
    if (strata->size() != n) throw std::invalid_argument("make_folds: strata length mismatch");
    std::vector<int> labels(*strata);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (int lab : labels) {
      std::vector<std::size_t> g;
      for (std::size_t i = 0; i < n; ++i)
        if ((*strata)[i] == lab) g.push_back(i);
      groups.push_back(std::move(g));
    }
    for (const auto& g : groups)
      if (g.size() < static_cast<std::size_t>(k)) use_strata = false;
  }
  if (!use_strata) {
    groups.clear();
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    groups.push_back(std::move(all));
  }
  fa.stratified = use_strata && strata != nullptr;

  // Shuffle within each stratum, then deal round-robin, continuing the fold
  // cursor across strata so total fold sizes differ by at most one.
  Rng rng(seed);
  int cursor = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      fa.fold_of[g[i]] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return fa;
}

FoldAssignment make_folds(const TrialDataset& dataset, int k, std::uint64_t seed) {
  validate(dataset);
  std::vector<int> strata(static_cast<std::size_t>(dataset.n()));
  for (Eigen::Index i = 0; i < dataset.n(); ++i)
    strata[static_cast<std::size_t>(i)] = dataset.treatment[i] == 1.0 ? 1 : 0;
  return make_folds_strata(static_cast<std::size_t>(dataset.n()), k, seed, &strata);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile: q must be in (0,1)");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double quantile(const Vector& values, double q) {
  return quantile(std::vector<double>(values.data(), values.data() + values.size()), q);
}

}  // namespace hte
