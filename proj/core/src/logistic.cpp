#include <cmath>
#include <stdexcept>

#include "hte/numerics.hpp"

namespace hte {

namespace {

double clip_probability(double p) {
  return std::min(constants::kProbClipHigh, std::max(constants::kProbClipLow, p));
}

}  // namespace

Vector LogisticModel::predict_probability(const DesignMatrix& X) const {
  Vector eta = fit.predict(X);
  Vector p(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    p[i] = clip_probability(1.0 / (1.0 + std::exp(-eta[i])));
  return p;
}

LogisticModel fit_logistic(const DesignMatrix& X, const Vector& y01) {
  validate(X);
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (y01.size() != n) throw std::invalid_argument("fit_logistic: rows(X) != len(y)");
  for (Eigen::Index i = 0; i < n; ++i)
    if (y01[i] != 0.0 && y01[i] != 1.0)
      throw std::invalid_argument("fit_logistic: target entries must be 0/1");

  LogisticModel model;
  const double rate = y01.mean();
  if (rate == 0.0 || rate == 1.0) {
    const double clipped = clip_probability(rate);
    model.fit.coefficients = Vector::Zero(d);
    model.fit.intercept = std::log(clipped / (1.0 - clipped));
    model.fit.converged = false;
    model.degenerate = true;
    return model;
  }

  // IRLS with ridge on the slopes (separation guard); intercept unpenalized.
  Vector beta = Vector::Zero(d);
  double intercept = std::log(rate / (1.0 - rate));
  const double lambda = constants::kLogisticRidge;

  int iter = 0;
  bool converged = false;
  for (; iter < 100; ++iter) {
    Vector eta = (X.values * beta).array() + intercept;
    Vector p(n), wirls(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      wirls[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
      z[i] = eta[i] + (y01[i] - p[i]) / wirls[i];
    }

    Matrix A = Matrix::Zero(d + 1, d + 1);
    Vector rhs = Vector::Zero(d + 1);
    A(0, 0) = wirls.sum();
    A.block(0, 1, 1, d) = (X.values.transpose() * wirls).transpose();
    A.block(1, 0, d, 1) = X.values.transpose() * wirls;
    A.block(1, 1, d, d) = X.values.transpose() * (wirls.asDiagonal() * X.values);
    A.block(1, 1, d, d).diagonal().array() += lambda;
    rhs[0] = wirls.dot(z);
    rhs.tail(d) = X.values.transpose() * (wirls.cwiseProduct(z));

    Vector sol = A.ldlt().solve(rhs);
    const double change =
        std::max((sol.tail(d) - beta).cwiseAbs().maxCoeff(), std::abs(sol[0] - intercept));
    intercept = sol[0];
    beta = sol.tail(d);
    if (change < 1e-10) {
      converged = true;
      ++iter;
      break;
    }
  }

  model.fit.intercept = intercept;
  model.fit.coefficients = beta;
  model.fit.converged = converged;
  model.fit.iterations = iter;
  return model;
}

}  // namespace hte
