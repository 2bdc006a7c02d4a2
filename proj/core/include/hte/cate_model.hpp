#pragma once

#include <memory>
#include <string>

#include "hte/data.hpp"

namespace hte {

// Common contract of every fitted CATE estimator and ensemble.
class CateModel {
 public:
  virtual ~CateModel() = default;
  virtual Vector predict_cate(const DesignMatrix& X) const = 0;
  virtual std::string label() const = 0;
};

using CateModelPtr = std::shared_ptr<const CateModel>;

// Factory contract: fits a CateModel on a trial dataset. Used wherever models
// must be refit under cross-fitting.
class CateLearner {
 public:
  virtual ~CateLearner() = default;
  virtual CateModelPtr fit(const TrialDataset& data) const = 0;
  virtual std::string label() const = 0;
};

using CateLearnerPtr = std::shared_ptr<const CateLearner>;

// Wraps a fixed prediction function; handy for oracles and formula checks.
class FunctionCateModel : public CateModel {
 public:
  using Fn = std::function<Vector(const DesignMatrix&)>;
  FunctionCateModel(Fn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}
  Vector predict_cate(const DesignMatrix& X) const override { return fn_(X); }
  std::string label() const override { return label_; }

 private:
  Fn fn_;
  std::string label_;
};

}  // namespace hte
