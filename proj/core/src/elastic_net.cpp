#include <cmath>
#include <stdexcept>

#include "hte/learners.hpp"
#include "hte/numerics.hpp"

namespace hte {

Standardization standardize_columns(const DesignMatrix& X, const Vector* weights) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  Vector w = weights ? *weights : Vector::Ones(n);
  const double wsum = w.sum();

  Standardization s;
  s.mean = (X.values.transpose() * w) / wsum;
  s.scale = Vector::Ones(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (X.values.col(j).array() - s.mean[j]).square().matrix().dot(w) / wsum;
    if (var > 0.0) s.scale[j] = std::sqrt(var);
  }
  return s;
}

namespace {

struct CdProblem {
  Matrix Z;       // standardized features
  Vector yc;      // centered target
  Vector w;
  Vector zj;      // (1/n) sum w z^2 per column; 0 marks constant columns
  double ybar = 0.0;
  Standardization st;
  Eigen::Index n = 0;
};

CdProblem prepare(const DesignMatrix& X, const Vector& y, const Vector* weights) {
  validate(X);
  if (y.size() != X.rows()) throw std::invalid_argument("fit_elastic_net: rows(X) != len(y)");
  if (!y.allFinite()) throw std::invalid_argument("fit_elastic_net: non-finite target");
  if (weights && weights->size() != y.size())
    throw std::invalid_argument("fit_elastic_net: weight length mismatch");

  CdProblem p;
  p.n = X.rows();
  const Eigen::Index d = X.cols();
  p.w = weights ? *weights : Vector::Ones(p.n);
  p.st = standardize_columns(X, weights);
  p.Z = X.values;
  for (Eigen::Index j = 0; j < d; ++j)
    p.Z.col(j) = (p.Z.col(j).array() - p.st.mean[j]) / p.st.scale[j];
  p.ybar = y.dot(p.w) / p.w.sum();
  p.yc = y.array() - p.ybar;
  p.zj.resize(d);
  for (Eigen::Index j = 0; j < d; ++j)
    p.zj[j] = p.Z.col(j).cwiseAbs2().dot(p.w) / static_cast<double>(p.n);
  return p;
}

// cyclic coordinate descent on the standardized problem; beta is updated in
// place. Full sweeps alternate with active-set sweeps over the nonzero
// coordinates; convergence is declared only by a full sweep.
int descend(const CdProblem& p, double lambda1, double lambda2, Vector& beta, Vector& resid,
            bool& converged) {
  const Eigen::Index d = p.Z.cols();
  const double inv_n = 1.0 / static_cast<double>(p.n);
  converged = false;

  // WZ = diag(w) Z, precomputed so the inner loop allocates nothing
  Matrix WZ = p.Z;
  for (Eigen::Index j = 0; j < d; ++j) WZ.col(j).array() *= p.w.array();

  auto update = [&](Eigen::Index j) {
    const double old = beta[j];
    const double rho = inv_n * WZ.col(j).dot(resid) + p.zj[j] * old;
    const double soft =
        std::abs(rho) > lambda1 ? std::copysign(std::abs(rho) - lambda1, rho) : 0.0;
    const double next = soft / (p.zj[j] + lambda2);
    if (next != old) {
      resid -= p.Z.col(j) * (next - old);
      beta[j] = next;
      return std::abs(next - old);
    }
    return 0.0;
  };

  int sweep = 0;
  while (sweep < constants::kElasticNetMaxSweeps) {
    // full sweep
    ++sweep;
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (p.zj[j] <= 0.0) continue;
      max_change = std::max(max_change, update(j));
    }
    if (max_change < constants::kElasticNetTol) {
      converged = true;
      break;
    }

    // active-set sweeps on the current support
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < d; ++j)
      if (beta[j] != 0.0 && p.zj[j] > 0.0) active.push_back(j);
    while (sweep < constants::kElasticNetMaxSweeps) {
      ++sweep;
      double active_change = 0.0;
      for (Eigen::Index j : active) active_change = std::max(active_change, update(j));
      if (active_change < constants::kElasticNetTol) break;
    }
  }
  return sweep;
}

LinearFit report(const CdProblem& p, const Vector& beta, bool converged, int sweeps) {
  LinearFit fit;
  fit.coefficients = beta.cwiseQuotient(p.st.scale);
  fit.intercept = p.ybar - p.st.mean.dot(fit.coefficients);
  fit.converged = converged;
  fit.iterations = sweeps;
  return fit;
}

}  // namespace

LinearFit fit_elastic_net(const DesignMatrix& X, const Vector& y, double lambda1, double lambda2,
                          const Vector* weights) {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("fit_elastic_net: negative penalties");
  CdProblem p = prepare(X, y, weights);
  Vector beta = Vector::Zero(X.cols());
  Vector resid = p.yc;
  bool converged = false;
  const int sweeps = descend(p, lambda1, lambda2, beta, resid, converged);
  return report(p, beta, converged, sweeps);
}

namespace detail {

double lambda_max(const DesignMatrix& X, const Vector& y, const Vector* weights) {
  CdProblem p = prepare(X, y, weights);
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (p.zj[j] <= 0.0) continue;
    lmax = std::max(lmax, std::abs(p.Z.col(j).dot(p.w.cwiseProduct(p.yc))) /
                              static_cast<double>(p.n));
  }
  return lmax;
}

std::vector<LinearFit> elastic_net_path(const DesignMatrix& X, const Vector& y,
                                        const std::vector<double>& lambdas, double alpha,
                                        const Vector* weights) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("elastic_net_path: alpha must be in [0,1]");
  CdProblem p = prepare(X, y, weights);
  Vector beta = Vector::Zero(X.cols());
  Vector resid = p.yc;
  std::vector<LinearFit> fits;
  fits.reserve(lambdas.size());
  for (double lam : lambdas) {
    if (lam < 0.0) throw std::invalid_argument("elastic_net_path: negative lambda");
    bool converged = false;
    const int sweeps = descend(p, alpha * lam, (1.0 - alpha) * lam, beta, resid, converged);
    fits.push_back(report(p, beta, converged, sweeps));
  }
  return fits;
}

}  // namespace detail

}  // namespace hte
