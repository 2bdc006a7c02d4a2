#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "hte/dataset_io.hpp"
#include "hte/dgp.hpp"
#include "hte/learners.hpp"
#include "hte/random.hpp"
#include "support/oracles.hpp"

using namespace hte;

TEST_CASE("linear family: removing the predictive part kills tau") {
  ScenarioSpec spec = builtin_linear_scenario("linear-p10");
  spec.delta_singles.clear();
  spec.delta_pairs.clear();
  const Generated gen = gen_linear_family(spec, 500, 1);
  CHECK(gen.eval.true_cate.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  // with tau == 0, forcing either arm produces identical outcomes in law
  const Generated g0 = gen_linear_family(spec, 500, 2, ForceTreatment::Control);
  const Generated g1 = gen_linear_family(spec, 500, 2, ForceTreatment::Treated);
  CHECK((g0.trial.outcome - g1.trial.outcome).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("linear preset has an additive analytic tau") {
  const ScenarioSpec spec = builtin_linear_scenario("linear-p10");
  Rng rng(3);
  Eigen::RowVectorXd x(10), z(10), zero(10);
  for (int j = 0; j < 10; ++j) {
    x[j] = rng.normal();
    z[j] = rng.normal();
    zero[j] = 0.0;
  }
  const double lhs = spec.cate(x) + spec.cate(z) - spec.cate(zero);
  const double rhs = spec.cate(Eigen::RowVectorXd(x + z));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("linear family potential-outcome oracle matches mean tau") {
  for (const auto& name : builtin_linear_scenario_names()) {
    const ScenarioSpec spec = builtin_linear_scenario(name);
    const std::size_t n = 5000;
    const Generated g1 = gen_linear_family(spec, n, 7, ForceTreatment::Treated);
    const Generated g0 = gen_linear_family(spec, n, 7, ForceTreatment::Control);
    const Generated gen = gen_linear_family(spec, n, 7);

    // same seed stream: covariates and noise coincide, so the paired
    // difference equals tau exactly
    CHECK((g1.trial.covariates.values - g0.trial.covariates.values).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    const Vector paired_diff = g1.trial.outcome - g0.trial.outcome;
    CHECK((paired_diff - gen.eval.true_cate).cwiseAbs().maxCoeff() < 1e-10);

    const double dim = paired_diff.mean();
    const double mean_tau = gen.eval.true_cate.mean();
    const double se = std::sqrt((gen.eval.true_cate.array() - mean_tau).square().mean() /
                                static_cast<double>(n));
    CHECK(std::abs(dim - mean_tau) <= std::max(3.0 * se, 1e-10));
  }
}

TEST_CASE("noiseless linear scenario is exactly learnable") {
  ScenarioSpec spec = builtin_linear_scenario("linear-p10");
  spec.noise_sd = 0.0;
  const Generated gen = gen_linear_family(spec, 300, 11);
  // append the treatment column; OLS on [X | A] cannot capture the
  // interaction in general, so fit arms separately
  const auto treated = gen.trial.treated_indices();
  const auto controls = gen.trial.control_indices();
  for (const auto& rows : {treated, controls}) {
    DesignMatrix X = gen.trial.covariates.select_rows(rows);
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      y[static_cast<Eigen::Index>(i)] = gen.trial.outcome[static_cast<Eigen::Index>(rows[i])];
    const Vector fitted = OlsRegressor().fit(X, y, nullptr)->predict(X);
    CHECK((fitted - y).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("generators are seed-deterministic and CSV round-trips") {
  const ScenarioSpec spec = builtin_linear_scenario("slightly-nl-p10");
  const Generated a = gen_linear_family(spec, 100, 13);
  const Generated b = gen_linear_family(spec, 100, 13);
  CHECK(a.trial.covariates.values == b.trial.covariates.values);
  CHECK(a.trial.outcome == b.trial.outcome);

  const std::string path = (std::filesystem::temp_directory_path() / "hte_gen.csv").string();
  write_dataset_csv(path, to_csv_dataset(a.trial, &a.eval));
  const CsvDataset back = read_dataset_csv(path);
  CHECK(back.covariates.values == a.trial.covariates.values);
  CHECK(back.y == a.trial.outcome);
  CHECK(*back.tau == a.eval.true_cate);
  std::filesystem::remove(path);
}

TEST_CASE("unknown preset name throws") {
  CHECK_THROWS(builtin_linear_scenario("no-such-preset"));
}

TEST_CASE("scenario config round-trip preserves the spec") {
  for (const auto& name : builtin_linear_scenario_names()) {
    const ScenarioSpec spec = builtin_linear_scenario(name);
    const ConfigFile cfg = scenario_to_config(spec);
    const ScenarioSpec back = scenario_from_config(ConfigFile::parse_string(cfg.serialize()));
    CHECK(back.name == spec.name);
    CHECK(back.p == spec.p);
    CHECK(back.noise_sd == doctest::Approx(spec.noise_sd));
    REQUIRE(back.delta_singles.size() == spec.delta_singles.size());
    for (std::size_t i = 0; i < spec.delta_singles.size(); ++i) {
      CHECK(back.delta_singles[i].feature == spec.delta_singles[i].feature);
      CHECK(back.delta_singles[i].coef == doctest::Approx(spec.delta_singles[i].coef));
    }
    CHECK(back.predictive_transforms == spec.predictive_transforms);

    const Generated g1 = gen_linear_family(spec, 50, 17);
    const Generated g2 = gen_linear_family(back, 50, 17);
    CHECK((g1.trial.outcome - g2.trial.outcome).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("checked-in preset files match the built-in scenarios") {
  for (const auto& name : builtin_linear_scenario_names()) {
    const std::string path = std::string(HTE_PRESETS_DIR) + "/" + name + ".cfg";
    const ScenarioSpec from_file = scenario_from_config(ConfigFile::parse_file(path));
    const ScenarioSpec builtin = builtin_linear_scenario(name);
    const Generated g1 = gen_linear_family(from_file, 80, 97);
    const Generated g2 = gen_linear_family(builtin, 80, 97);
    CHECK((g1.trial.outcome - g2.trial.outcome).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((g1.eval.true_cate - g2.eval.true_cate).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  const Pdl1Params from_file =
      pdl1_from_config(ConfigFile::parse_file(std::string(HTE_PRESETS_DIR) + "/pd-l1.cfg"));
  const Generated g1 = gen_pdl1(from_file, 80, 98);
  const Generated g2 = gen_pdl1(Pdl1Params{}, 80, 98);
  CHECK((g1.trial.outcome - g2.trial.outcome).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("pd-l1: floor and interaction structure of the analytic tau") {
  const Generated gen = gen_pdl1(Pdl1Params{}, 4000, 19);
  const Pdl1Params params;
  int zero_level = 0;
  for (Eigen::Index i = 0; i < gen.eval.m(); ++i) {
    const double mutation = gen.eval.covariates.values(i, 0);
    const double pdl1_pre = gen.eval.covariates.values(i, 4);
    const double tau = gen.eval.true_cate[i];
    if (pdl1_pre == 0.0) {
      CHECK(tau == doctest::Approx(0.0));
      ++zero_level;
    } else {
      CHECK(tau == doctest::Approx(-params.d2 * params.c2 * mutation).epsilon(1e-12));
    }
    CHECK(mutation > 0.0);  // log-normal burden never hits zero
  }
  CHECK(zero_level > 0);  // the floor case actually occurs
}

TEST_CASE("pd-l1 paired potential-outcome oracle matches analytic tau to 1e-10") {
  const std::size_t n = 20000;
  const Generated g1 = gen_pdl1(Pdl1Params{}, n, 23, ForceTreatment::Treated);
  const Generated g0 = gen_pdl1(Pdl1Params{}, n, 23, ForceTreatment::Control);
  const Generated gen = gen_pdl1(Pdl1Params{}, n, 23);
  const Vector paired = g1.trial.outcome - g0.trial.outcome;
  CHECK((paired - gen.eval.true_cate).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pd-l1 evaluation set carries consistent mu0/mu1") {
  const Generated gen = gen_pdl1(Pdl1Params{}, 500, 29);
  REQUIRE(gen.eval.mu0.has_value());
  CHECK_NOTHROW(validate(gen.eval));
}

TEST_CASE("pd-l1 config round-trip") {
  Pdl1Params params;
  params.c2 = 0.9;
  params.phenotype_probs = {0.2, 0.5, 0.3};
  const ConfigFile cfg = pdl1_to_config(params);
  const Pdl1Params back = pdl1_from_config(ConfigFile::parse_string(cfg.serialize()));
  CHECK(back.c2 == doctest::Approx(0.9));
  CHECK(back.phenotype_probs[1] == doctest::Approx(0.5));
  const Generated g1 = gen_pdl1(params, 50, 31);
  const Generated g2 = gen_pdl1(back, 50, 31);
  CHECK((g1.trial.outcome - g2.trial.outcome).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pd-l1 rejects invalid parameters") {
  Pdl1Params params;
  params.phenotype_probs = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  Pdl1Params params2;
  params2.d2 = 0.0;
  CHECK_THROWS_AS(validate(params2), std::invalid_argument);
}

TEST_CASE("load_external splits, re-randomizes and stays deterministic") {
  // build a compliant file from a generator
  const ScenarioSpec spec = builtin_linear_scenario("linear-p10");
  const Generated gen = gen_linear_family(spec, 700, 37);
  const std::string path = (std::filesystem::temp_directory_path() / "hte_external.csv").string();
  write_dataset_csv(path, to_csv_dataset(gen.trial, &gen.eval));

  const Generated split = load_external(path, 500, 41);
  CHECK(split.trial.n() == 500);
  CHECK(split.eval.m() == 200);
  REQUIRE(split.eval.mu0.has_value());

  const Generated again = load_external(path, 500, 41);
  CHECK(split.trial.outcome == again.trial.outcome);
  CHECK(split.trial.treatment == again.trial.treatment);

  // remainder-of-one edge
  const Generated one = load_external(path, 699, 43);
  CHECK(one.eval.m() == 1);

  // treated fraction concentrates around 1/2
  int low = 0, high = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Generated g = load_external(path, 500, stable_seed(47, s));
    const double frac = g.trial.treatment.mean();
    if (frac < 0.4) ++low;
    if (frac > 0.6) ++high;
  }
  CHECK(low == 0);
  CHECK(high == 0);
  std::filesystem::remove(path);
}

TEST_CASE("load_external error paths") {
  const std::string path = (std::filesystem::temp_directory_path() / "hte_notau.csv").string();
  {
    std::ofstream out(path);
    out << "x1,a,y\n1,0,2\n2,1,3\n3,0,4\n";
  }
  CHECK_THROWS(load_external(path, 2, 1));  // no tau column
  std::filesystem::remove(path);

  const ScenarioSpec spec = builtin_linear_scenario("linear-p10");
  const Generated gen = gen_linear_family(spec, 50, 53);
  const std::string path2 = (std::filesystem::temp_directory_path() / "hte_small.csv").string();
  write_dataset_csv(path2, to_csv_dataset(gen.trial, &gen.eval));
  CHECK_THROWS(load_external(path2, 50, 1));  // n_train >= rows
  std::filesystem::remove(path2);
}

TEST_CASE("evaluation tau equals mu1 - mu0 for every generator") {
  for (const auto& name : builtin_linear_scenario_names()) {
    const Generated gen = gen_linear_family(builtin_linear_scenario(name), 200, 59);
    CHECK_NOTHROW(validate(gen.eval));
  }
  CHECK_NOTHROW(validate(gen_pdl1(Pdl1Params{}, 200, 61).eval));
}
