#include <stdexcept>

#include "hte/numerics.hpp"

namespace hte {

Vector LinearFit::predict(const DesignMatrix& X) const {
  if (X.cols() != coefficients.size())
    throw std::invalid_argument("LinearFit::predict: width mismatch");
  return (X.values * coefficients).array() + intercept;
}

double LinearFit::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return intercept + x.dot(coefficients.transpose());
}

namespace {

void check_fit_inputs(const DesignMatrix& X, const Vector& y, const Vector* weights) {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("fit: rows(X) != len(y)");
  if (!y.allFinite()) throw std::invalid_argument("fit: non-finite target");
  if (weights) {
    if (weights->size() != y.size()) throw std::invalid_argument("fit: weight length mismatch");
    if (!weights->allFinite() || weights->minCoeff() < 0.0)
      throw std::invalid_argument("fit: weights must be finite and non-negative");
    if (weights->sum() <= 0.0) throw std::invalid_argument("fit: weights sum to zero");
  }
}

}  // namespace

LinearFit fit_ols(const DesignMatrix& X, const Vector& y, const Vector* weights) {
  check_fit_inputs(X, y, weights);
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  Vector w = weights ? *weights : Vector::Ones(n);
  const double wsum = w.sum();

  const Vector xmean = (X.values.transpose() * w) / wsum;
  const double ymean = y.dot(w) / wsum;

  Matrix Xc = X.values.rowwise() - xmean.transpose();
  Vector yc = y.array() - ymean;

  Matrix gram = Xc.transpose() * (w.asDiagonal() * Xc);
  gram.diagonal().array() += constants::kRidgeJitter;
  Vector rhs = Xc.transpose() * (w.cwiseProduct(yc));

  LinearFit fit;
  fit.coefficients = gram.ldlt().solve(rhs);
  fit.intercept = ymean - xmean.dot(fit.coefficients);
  fit.converged = true;
  fit.iterations = 1;
  (void)d;
  return fit;
}

}  // namespace hte
