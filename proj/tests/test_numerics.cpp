#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hte/learners.hpp"
#include "hte/numerics.hpp"
#include "hte/random.hpp"
#include "support/oracles.hpp"

using namespace hte;

TEST_CASE("fit_ols recovers exact linear data") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  Vector y(3);
  y << 2, 4, 6;
  const LinearFit fit = fit_ols(DesignMatrix(X), y);
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fit_ols on a constant target returns the constant") {
  const Matrix X = oracles::random_matrix(20, 4, 1);
  const Vector y = Vector::Constant(20, 3.25);
  const LinearFit fit = fit_ols(DesignMatrix(X), y);
  CHECK(fit.intercept == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fit_ols survives collinear designs via the ridge jitter") {
  Matrix X(2, 2);
  X << 1, 1, 2, 2;
  Vector y(2);
  y << 1, 2;
  const DesignMatrix Xd(X);
  const LinearFit fit = fit_ols(Xd, y);
  REQUIRE(fit.coefficients.allFinite());
  const Vector fitted = fit.predict(Xd);
  CHECK((fitted - y).norm() < 1e-6);
}

TEST_CASE("fit_ols rejects bad input") {
  Matrix X(2, 1);
  X << 1, 2;
  Vector y(3);
  y << 1, 2, 3;
  CHECK_THROWS_AS(fit_ols(DesignMatrix(X), y), std::invalid_argument);
  Vector y2(2);
  y2 << 1, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_ols(DesignMatrix(X), y2), std::invalid_argument);
}

TEST_CASE("fit_nnls clips and keeps interior solutions") {
  Matrix I = Matrix::Identity(2, 2);
  Vector y(2);
  y << 3, -2;
  Vector beta = fit_nnls(DesignMatrix(I), y).coefficients;
  CHECK(beta[0] == doctest::Approx(3.0));
  CHECK(beta[1] == doctest::Approx(0.0));

  y << 3, 2;
  beta = fit_nnls(DesignMatrix(I), y).coefficients;
  CHECK(beta[0] == doctest::Approx(3.0));
  CHECK(beta[1] == doctest::Approx(2.0));
}

TEST_CASE("fit_nnls beats the 0.05-step grid oracle on a random 5x3 problem") {
  const Matrix X = oracles::random_matrix(5, 3, 42);
  const Vector y = oracles::random_vector(5, 43) * 2.0;
  const LinearFit fit = fit_nnls(DesignMatrix(X), y);
  CHECK(fit.coefficients.minCoeff() >= 0.0);
  const double grid = oracles::nnls_grid_minimum(X, y, 3.0, 0.05);
  CHECK(oracles::ls_objective(X, y, fit.coefficients) <= grid + 1e-4);
}

TEST_CASE("fit_nnls satisfies KKT on random instances") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(stable_seed(100, s));
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(rng.index(6));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Matrix X = oracles::random_matrix(n, d, stable_seed(101, s));
    const Vector y = oracles::random_vector(n, stable_seed(102, s));
    const Vector beta = fit_nnls(DesignMatrix(X), y).coefficients;
    const Vector grad = X.transpose() * (y - X * beta);  // = -0.5 * objective gradient
    for (Eigen::Index j = 0; j < d; ++j) {
      CHECK(beta[j] >= 0.0);
      if (beta[j] > 1e-10)
        CHECK(std::abs(grad[j]) < 1e-8);  // active coordinates: stationarity
      else
        CHECK(grad[j] < 1e-8);  // inactive: no ascent direction
    }
  }
}

TEST_CASE("fit_simplex_ls handles the singleton simplex") {
  const Matrix X = oracles::random_matrix(6, 1, 9);
  const Vector y = oracles::random_vector(6, 10);
  const Vector alpha = fit_simplex_ls(DesignMatrix(X), y).coefficients;
  REQUIRE(alpha.size() == 1);
  CHECK(alpha[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_simplex_ls gives all weight to a perfect predictor") {
  const Vector y = oracles::random_vector(8, 11);
  Matrix X(8, 2);
  X.col(0) = y;
  X.col(1) = oracles::random_vector(8, 12);
  const Vector alpha = fit_simplex_ls(DesignMatrix(X), y).coefficients;
  CHECK(alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fit_simplex_ls beats the 0.02-step simplex grid on a random 6x3 problem") {
  const Matrix X = oracles::random_matrix(6, 3, 21);
  const Vector y = oracles::random_vector(6, 22);
  const Vector alpha = fit_simplex_ls(DesignMatrix(X), y).coefficients;
  CHECK(std::abs(alpha.sum() - 1.0) <= 1e-8);
  CHECK(alpha.minCoeff() >= 0.0);
  const double grid = oracles::simplex_grid_minimum(X, y, 0.02);
  CHECK(oracles::ls_objective(X, y, alpha) <= grid + 1e-4);
}

TEST_CASE("fit_elastic_net with zero penalties matches OLS fitted values") {
  const Matrix X = oracles::random_matrix(40, 5, 31);
  const Vector y = oracles::random_vector(40, 32);
  const DesignMatrix Xd(X);
  const Vector ols_fit = fit_ols(Xd, y).predict(Xd);
  const Vector enet_fit = fit_elastic_net(Xd, y, 0.0, 0.0).predict(Xd);
  CHECK((ols_fit - enet_fit).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit_elastic_net lasso dead zone zeroes every coefficient") {
  const Matrix X = oracles::random_matrix(30, 4, 33);
  const Vector y = oracles::random_vector(30, 34);
  const DesignMatrix Xd(X);
  const double lmax = detail::lambda_max(Xd, y, nullptr);
  const LinearFit fit = fit_elastic_net(Xd, y, lmax * 1.0001, 0.0);
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(y.mean()).epsilon(1e-9));
}

TEST_CASE("fit_elastic_net univariate solution is the soft threshold (seed 7)") {
  Rng rng(7);
  const Eigen::Index n = 50;
  Matrix X(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = rng.normal();
  // standardize x exactly (mean 0, population sd 1)
  X.col(0).array() -= X.col(0).mean();
  X.col(0) /= std::sqrt(X.col(0).squaredNorm() / static_cast<double>(n));
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = 1.5 * X(i, 0) + rng.normal();
  const Vector yc = y.array() - y.mean();

  const double lambda1 = 0.3;
  const double rho = X.col(0).dot(yc) / static_cast<double>(n);
  const double expected = std::abs(rho) > lambda1 ? std::copysign(std::abs(rho) - lambda1, rho) : 0.0;

  const LinearFit fit = fit_elastic_net(DesignMatrix(X), y, lambda1, 0.0);
  CHECK(fit.coefficients[0] == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("fit_elastic_net satisfies subgradient KKT conditions on random instances") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(stable_seed(200, s));
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.index(41));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(10));
    const Matrix X = oracles::random_matrix(n, d, stable_seed(201, s));
    const Vector y = oracles::random_vector(n, stable_seed(202, s));
    const double lambda1 = 0.05 + 0.2 * rng.uniform();
    const double lambda2 = 0.1 * rng.uniform();

    const DesignMatrix Xd(X);
    const LinearFit fit = fit_elastic_net(Xd, y, lambda1, lambda2);

    // KKT is checked in the standardized coordinates the penalty applies to
    const Standardization st = standardize_columns(Xd, nullptr);
    Matrix Z = X;
    for (Eigen::Index j = 0; j < d; ++j)
      Z.col(j) = (Z.col(j).array() - st.mean[j]) / st.scale[j];
    const Vector beta_std = fit.coefficients.cwiseProduct(st.scale);
    const Vector yc = y.array() - y.mean();
    const Vector resid = yc - Z * beta_std;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double grad = -Z.col(j).dot(resid) / static_cast<double>(n) + lambda2 * beta_std[j];
      if (beta_std[j] > 1e-9)
        CHECK(std::abs(grad + lambda1) < 1e-5);
      else if (beta_std[j] < -1e-9)
        CHECK(std::abs(grad - lambda1) < 1e-5);
      else
        CHECK(std::abs(grad) <= lambda1 + 1e-5);
    }
  }
}

TEST_CASE("fit_elastic_net rejects negative penalties") {
  const Matrix X = oracles::random_matrix(5, 2, 51);
  const Vector y = oracles::random_vector(5, 52);
  CHECK_THROWS_AS(fit_elastic_net(DesignMatrix(X), y, -0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_elastic_net(DesignMatrix(X), y, 0.0, -0.1), std::invalid_argument);
}

TEST_CASE("fit_logistic on symmetric null data stays near zero") {
  Rng rng(61);
  const Eigen::Index n = 2000;
  Matrix X(n, 2);
  Vector y(n);
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    X(2 * i, 0) = rng.normal();
    X(2 * i, 1) = rng.normal();
    X(2 * i + 1, 0) = -X(2 * i, 0);  // exactly symmetric design
    X(2 * i + 1, 1) = -X(2 * i, 1);
    y[2 * i] = static_cast<double>(i % 2);
    y[2 * i + 1] = y[2 * i];  // labels independent of X, balanced
  }
  const LogisticModel model = fit_logistic(DesignMatrix(X), y);
  CHECK(std::abs(model.fit.intercept) < 1e-2);
  CHECK(model.fit.coefficients.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("fit_logistic null Monte-Carlo predictions stay within [0.4, 0.6]") {
  Rng rng(100);
  const Eigen::Index n = 2000;
  Matrix X(n, 3);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  const DesignMatrix Xd(X);
  const Vector p = fit_logistic(Xd, y).predict_probability(Xd);
  CHECK(p.minCoeff() >= 0.4);
  CHECK(p.maxCoeff() <= 0.6);
}

TEST_CASE("fit_logistic separable data stays finite under the ridge guard") {
  Matrix X(4, 1);
  X << -2, -1, 1, 2;
  Vector y(4);
  y << 0, 0, 1, 1;
  const DesignMatrix Xd(X);
  const LogisticModel model = fit_logistic(Xd, y);
  CHECK(model.fit.coefficients.allFinite());
  CHECK_FALSE(model.degenerate);
  const Vector p = model.predict_probability(Xd);
  CHECK(p.minCoeff() >= constants::kProbClipLow);
  CHECK(p.maxCoeff() <= constants::kProbClipHigh);
}

TEST_CASE("fit_logistic single-class target degenerates to the clipped rate") {
  const Matrix X = oracles::random_matrix(10, 2, 63);
  const Vector y = Vector::Ones(10);
  const DesignMatrix Xd(X);
  const LogisticModel model = fit_logistic(Xd, y);
  CHECK(model.degenerate);
  const Vector p = model.predict_probability(Xd);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    CHECK(p[i] == doctest::Approx(constants::kProbClipHigh));
}

TEST_CASE("kendall_tau spec examples") {
  Vector u(4), v(4);
  u << 1, 2, 3, 4;
  v << 1, 2, 3, 4;
  CHECK(kendall_tau(u, v) == doctest::Approx(1.0));

  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 3, 2, 1;
  CHECK(kendall_tau(a, b) == doctest::Approx(-1.0));

  v << 1, 3, 2, 4;
  CHECK(kendall_tau(u, v) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("kendall_tau errors on constant rankings") {
  Vector u = Vector::Ones(5);
  const Vector v = oracles::random_vector(5, 71);
  CHECK_THROWS_AS(kendall_tau(u, v), std::domain_error);
  CHECK_THROWS_AS(kendall_tau(v, u), std::domain_error);
}

TEST_CASE("kendall_tau fast path equals pair enumeration exactly, with ties") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(stable_seed(300, s));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(199));
    Vector u(n), v(n);
    const int levels = 1 + static_cast<int>(rng.index(12));  // coarse levels force ties
    bool u_const = true, v_const = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
      v[i] = rng.bernoulli(0.5) ? u[i] : static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
      if (u[i] != u[0]) u_const = false;
      if (v[i] != v[0]) v_const = false;
    }
    if (u_const || v_const) continue;
    CHECK(kendall_tau(u, v) == oracles::naive_kendall_tau(u, v));
    CHECK(kendall_tau(u, v, KendallVariant::TauA) ==
          oracles::naive_kendall_tau(u, v, KendallVariant::TauA));
  }
}

TEST_CASE("kendall_tau symmetry and monotone invariance") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector u = oracles::random_vector(60, stable_seed(400, s));
    const Vector v = oracles::random_vector(60, stable_seed(401, s));
    const double tau = kendall_tau(u, v);
    CHECK(kendall_tau(v, u) == doctest::Approx(tau).epsilon(1e-15));
    const Vector u2 = (u.array() * 3.0 + 1.0).exp();  // strictly increasing transform
    CHECK(kendall_tau(u2, v) == doctest::Approx(tau).epsilon(1e-12));
  }
}

TEST_CASE("numeric fits are bit-deterministic") {
  const Matrix X = oracles::random_matrix(25, 4, 81);
  const Vector y = oracles::random_vector(25, 82);
  const DesignMatrix Xd(X);
  CHECK(fit_ols(Xd, y).coefficients == fit_ols(Xd, y).coefficients);
  CHECK(fit_nnls(Xd, y).coefficients == fit_nnls(Xd, y).coefficients);
  CHECK(fit_simplex_ls(Xd, y).coefficients == fit_simplex_ls(Xd, y).coefficients);
  CHECK(fit_elastic_net(Xd, y, 0.1, 0.1).coefficients ==
        fit_elastic_net(Xd, y, 0.1, 0.1).coefficients);
}
