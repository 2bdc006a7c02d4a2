#include <limits>
#include <stdexcept>
#include <vector>

#include "hte/numerics.hpp"

namespace hte {

namespace {

// Unconstrained least squares restricted to the passive column set.
Vector solve_on_support(const Matrix& X, const Vector& y, const std::vector<int>& passive) {
  Matrix Xp(X.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) Xp.col(static_cast<Eigen::Index>(k)) = X.col(passive[k]);
  return Xp.colPivHouseholderQr().solve(y);
}

}  // namespace

// Lawson-Hanson active set. Finite termination; the inner loop backtracks
// along the feasible segment whenever the passive solve goes negative.
LinearFit fit_nnls(const DesignMatrix& Xd, const Vector& y) {
  validate(Xd);
  if (y.size() != Xd.rows()) throw std::invalid_argument("fit_nnls: rows(X) != len(y)");
  if (!y.allFinite()) throw std::invalid_argument("fit_nnls: non-finite target");

  const Matrix& X = Xd.values;
  const Eigen::Index d = X.cols();

  Vector beta = Vector::Zero(d);
  std::vector<bool> in_passive(static_cast<std::size_t>(d), false);
  std::vector<int> passive;

  const double scale = std::max(1.0, (X.transpose() * y).cwiseAbs().maxCoeff());
  const double tol = constants::kNnlsTol * scale * 1e-4;  // well inside the 1e-8 KKT budget

  int iterations = 0;
  const int max_outer = 3 * static_cast<int>(d) + 30;

  for (int outer = 0; outer < max_outer; ++outer) {
    Vector w = X.transpose() * (y - X * beta);

    int best = -1;
    double wmax = tol;
    for (int j = 0; j < d; ++j) {
      if (!in_passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;  // KKT satisfied

    in_passive[static_cast<std::size_t>(best)] = true;
    passive.push_back(best);

    for (int inner = 0; inner < max_outer; ++inner) {
      ++iterations;
      Vector z = solve_on_support(X, y, passive);

      double zmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < z.size(); ++k) zmin = std::min(zmin, z[k]);
      if (zmin > 0.0) {
        beta.setZero();
        for (std::size_t k = 0; k < passive.size(); ++k) beta[passive[k]] = z[static_cast<Eigen::Index>(k)];
        break;
      }

      // step to the boundary of the feasible region
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double zk = z[static_cast<Eigen::Index>(k)];
        if (zk <= 0.0) {
          const double bk = beta[passive[k]];
          const double t = bk / (bk - zk);
          alpha = std::min(alpha, t);
        }
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const int j = passive[k];
        beta[j] += alpha * (z[static_cast<Eigen::Index>(k)] - beta[j]);
      }

      std::vector<int> still;
      for (int j : passive) {
        if (beta[j] > tol) {
          still.push_back(j);
        } else {
          beta[j] = 0.0;
          in_passive[static_cast<std::size_t>(j)] = false;
        }
      }
      passive = std::move(still);
      if (passive.empty()) break;
    }
  }

  LinearFit fit;
  fit.intercept = 0.0;
  fit.coefficients = beta;
  fit.converged = true;
  fit.iterations = iterations;
  return fit;
}

}  // namespace hte
