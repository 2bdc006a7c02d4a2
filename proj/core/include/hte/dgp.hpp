#pragma once

#include <array>

#include "hte/config.hpp"
#include "hte/data.hpp"

namespace hte {

// Test hook for potential-outcome oracles: overrides treatment assignment
// without changing any random draw.
enum class ForceTreatment { None, Control, Treated };

struct Generated {
  TrialDataset trial;
  EvaluationSet eval;  // same rows, with analytic CATE (and mu0/mu1)
};

// -------------------------------------------------- additive linear family ----

enum class Transform { Identity, Sin, Tanh, Square, Abs, Indicator };

double apply_transform(Transform t, double x);
Transform transform_from_name(const std::string& name);
std::string transform_name(Transform t);

struct ScenarioTerm {
  int feature = 0;  // 0-based
  double coef = 0.0;
};

struct ScenarioPairTerm {
  int f1 = 0;
  int f2 = 0;
  double coef = 0.0;
};

// Additive outcome model with per-feature transforms, second-order
// interactions, and a separate predictive (treatment-interacted) part.
struct ScenarioSpec {
  std::string name;
  int p = 0;
  double noise_sd = 1.0;
  std::vector<Transform> prognostic_transforms;  // f, per feature
  std::vector<Transform> predictive_transforms;  // g, per feature
  std::vector<ScenarioTerm> beta_singles;
  std::vector<ScenarioPairTerm> beta_pairs;
  std::vector<ScenarioTerm> delta_singles;
  std::vector<ScenarioPairTerm> delta_pairs;

  double prognostic(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  double cate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

void validate(const ScenarioSpec& spec);

// X ~ iid standard normal, A ~ Bernoulli(0.5), Y additive with Gaussian noise.
Generated gen_linear_family(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                            ForceTreatment force = ForceTreatment::None);

// frozen presets: linear-p10, slightly-nl-p10, slightly-nl-p20, highly-nl-p10
ScenarioSpec builtin_linear_scenario(const std::string& name);
std::vector<std::string> builtin_linear_scenario_names();

ScenarioSpec scenario_from_config(const ConfigFile& cfg);
ConfigFile scenario_to_config(const ScenarioSpec& spec);

// ------------------------------------------------------- PD-L1 pathway ----

// Structural coefficients of the mechanistic tumor-growth model. Features are
// x1=mutation burden, x2=immune phenotype, x3=TGF-beta, x4=baseline CD8+,
// x5=baseline PD-L1 level.
struct Pdl1Params {
  std::array<double, 3> phenotype_probs{0.35, 0.35, 0.30};  // desert, excluded, inflamed
  double mutation_log_mean = 0.0;
  double mutation_log_sd = 0.5;
  double a0 = 1.0, a1 = 0.6;  // TGF-beta on phenotype
  double b0 = 1.0, b1 = 0.8;  // baseline CD8+ on phenotype
  double c1 = 0.5, c2 = 0.8;  // post CD8+: TGF-beta and mutation x PD-L1-drop terms
  double d1 = 1.0, d2 = 0.7;  // growth: mutation up, post CD8+ down (d2 > 0)
  double sd_b = 0.3, sd_e = 0.3, sd_l = 0.6, sd_p = 0.3, sd_g = 0.5;
  std::array<double, 2> pdl1_cuts{0.8, 1.6};  // latent thresholds for levels 1 and 2
};

void validate(const Pdl1Params& params);

// Treatment lowers PD-L1 one level (floored at 0); the analytic CATE is
// -d2 * c2 * M * 1{L_pre >= 1}. All noise is treatment-independent.
Generated gen_pdl1(const Pdl1Params& params, std::size_t n, std::uint64_t seed,
                   ForceTreatment force = ForceTreatment::None);

Pdl1Params pdl1_from_config(const ConfigFile& cfg);
ConfigFile pdl1_to_config(const Pdl1Params& params);

// ------------------------------------------------ external covariate files ----

// Subsamples n_train rows of a CSV-schema file with a `tau` column as the
// training set (treatment re-randomized Bernoulli(0.5); outcome re-drawn as
// mu_A + noise_sd * N(0,1) when mu columns are present). The remainder
// becomes the evaluation set.
Generated load_external(const std::string& path, std::size_t n_train, std::uint64_t seed,
                        double noise_sd = 1.0);

}  // namespace hte
