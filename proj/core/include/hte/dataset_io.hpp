#pragma once

#include <optional>
#include <string>

#include "hte/data.hpp"

namespace hte {

// Shared CSV schema: header row `x1..xp,a,y[,tau][,mu0][,mu1]`, UTF-8,
// '.' decimal separator. Doubles are written with enough digits to
// round-trip losslessly.
struct CsvDataset {
  DesignMatrix covariates;
  Vector a;
  Vector y;
  std::optional<Vector> tau;
  std::optional<Vector> mu0;
  std::optional<Vector> mu1;

  TrialDataset trial(const std::string& id = "", std::uint64_t seed = 0) const;
  // requires tau
  EvaluationSet evaluation() const;
};

CsvDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const CsvDataset& data);

CsvDataset to_csv_dataset(const TrialDataset& trial, const EvaluationSet* eval = nullptr);

}  // namespace hte
