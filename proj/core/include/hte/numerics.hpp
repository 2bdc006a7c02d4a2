#pragma once

#include <optional>

#include "hte/design_matrix.hpp"

namespace hte {

// Documented solver constants, kept in one place.
namespace constants {
inline constexpr double kRidgeJitter = 1e-10;       // normal-equation jitter for rank-deficient X
inline constexpr double kLogisticRidge = 1e-6;      // separation guard for IRLS
inline constexpr double kProbClipLow = 0.01;        // propensity clip bounds
inline constexpr double kProbClipHigh = 0.99;
inline constexpr double kNnlsTol = 1e-8;            // KKT tolerance for NNLS / simplex LS
inline constexpr double kElasticNetTol = 1e-7;      // max coefficient change per sweep
inline constexpr int kElasticNetMaxSweeps = 10000;
}  // namespace constants

struct LinearFit {
  double intercept = 0.0;
  Vector coefficients;
  bool converged = true;
  int iterations = 0;

  Vector predict(const DesignMatrix& X) const;
  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

// Weighted least squares with intercept. Minimizes sum w_i (y_i - b - x_i'beta)^2,
// solving jittered normal equations on centered data so collinear designs stay finite.
LinearFit fit_ols(const DesignMatrix& X, const Vector& y,
                  const Vector* weights = nullptr);

// min ||y - X beta||^2 s.t. beta >= 0 (Lawson-Hanson active set, no intercept).
LinearFit fit_nnls(const DesignMatrix& X, const Vector& y);

// min ||y - X alpha||^2 over the probability simplex (projected gradient with
// an exact solve on the final active face). Weights sum to 1 within 1e-8.
LinearFit fit_simplex_ls(const DesignMatrix& X, const Vector& y);

// Elastic net: (1/2n) sum w_i (y_i - b - x_i'beta)^2 + lambda1 ||beta||_1
// + (lambda2/2) ||beta||^2, penalties applied on internally standardized
// features (weighted mean/population sd); coefficients reported on the
// original scale. Cyclic coordinate descent.
LinearFit fit_elastic_net(const DesignMatrix& X, const Vector& y,
                          double lambda1, double lambda2,
                          const Vector* weights = nullptr);

// Standardization convention shared with fit_elastic_net; exposed so tests can
// verify KKT conditions in the penalized (standardized) coordinates.
struct Standardization {
  Vector mean;   // weighted column means
  Vector scale;  // weighted population sd; 1 for constant columns
};
Standardization standardize_columns(const DesignMatrix& X, const Vector* weights = nullptr);

struct LogisticModel {
  LinearFit fit;
  bool degenerate = false;  // single-class target; constant-probability fit

  // probabilities clipped to [kProbClipLow, kProbClipHigh]
  Vector predict_probability(const DesignMatrix& X) const;
};

// Ridge-guarded IRLS. y01 entries must be 0/1; a single-class target yields a
// degenerate constant fit at the clipped class rate.
LogisticModel fit_logistic(const DesignMatrix& X, const Vector& y01);

enum class KendallVariant { TauB, TauA };

// Tie-corrected Kendall rank correlation, O(n log n) merge-sort inversion
// count. Throws std::domain_error("zero-variance ranking") if either input is
// constant.
double kendall_tau(const Vector& u, const Vector& v,
                   KendallVariant variant = KendallVariant::TauB);

}  // namespace hte
