#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hte/numerics.hpp"

namespace hte {

namespace {

// Euclidean projection onto { a : a >= 0, sum a = 1 } (sort-based).
Vector project_simplex(const Vector& v) {
  const Eigen::Index d = v.size();
  std::vector<double> u(v.data(), v.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  int support = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) {
      theta = t;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  Vector out(d);
  for (Eigen::Index j = 0; j < d; ++j) out[j] = std::max(0.0, v[j] - theta);
  return out;
}

double objective(const Matrix& X, const Vector& y, const Vector& a) {
  return (y - X * a).squaredNorm();
}

}  // namespace

LinearFit fit_simplex_ls(const DesignMatrix& Xd, const Vector& y) {
  validate(Xd);
  if (y.size() != Xd.rows()) throw std::invalid_argument("fit_simplex_ls: rows(X) != len(y)");
  if (!y.allFinite()) throw std::invalid_argument("fit_simplex_ls: non-finite target");

  const Matrix& X = Xd.values;
  const Eigen::Index d = X.cols();

  LinearFit fit;
  fit.intercept = 0.0;
  if (d == 1) {
    fit.coefficients = Vector::Ones(1);
    fit.iterations = 0;
    return fit;
  }

  const Matrix G = X.transpose() * X;
  const Vector c = X.transpose() * y;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);

  Vector a = Vector::Constant(d, 1.0 / static_cast<double>(d));
  int iterations = 0;
  for (; iterations < 100000; ++iterations) {
    Vector next = project_simplex(a - (G * a - c) / L);
    const double delta = (next - a).cwiseAbs().maxCoeff();
    a = std::move(next);
    if (delta < 1e-13) break;
  }

  // Exact solve on the active face: min ||y - X_S z||^2 s.t. sum z = 1.
  std::vector<int> support;
  for (Eigen::Index j = 0; j < d; ++j)
    if (a[j] > 1e-10) support.push_back(static_cast<int>(j));
  if (!support.empty()) {
    const Eigen::Index s = static_cast<Eigen::Index>(support.size());
    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    Vector rhs(s + 1);
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < s; ++j) kkt(i, j) = 2.0 * G(support[i], support[j]);
      kkt(i, s) = 1.0;
      kkt(s, i) = 1.0;
      rhs[i] = 2.0 * c[support[i]];
    }
    rhs[s] = 1.0;
    Vector sol = kkt.fullPivLu().solve(rhs);
    Vector polished = Vector::Zero(d);
    bool feasible = true;
    for (Eigen::Index i = 0; i < s; ++i) {
      if (sol[i] < -1e-12) feasible = false;
      polished[support[i]] = std::max(0.0, sol[i]);
    }
    if (feasible && polished.sum() > 0.0) {
      polished /= polished.sum();
      if (objective(X, y, polished) <= objective(X, y, a) + 1e-14) a = polished;
    }
  }

  a /= a.sum();  // exact sum-to-one
  fit.coefficients = a;
  fit.converged = true;
  fit.iterations = iterations;
  return fit;
}

}  // namespace hte
