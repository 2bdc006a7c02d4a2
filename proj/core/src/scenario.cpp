#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hte/dgp.hpp"
#include "hte/random.hpp"

namespace hte {

double apply_transform(Transform t, double x) {
  switch (t) {
    case Transform::Identity: return x;
    case Transform::Sin: return std::sin(x);
    case Transform::Tanh: return std::tanh(x);
    case Transform::Square: return x * x;
    case Transform::Abs: return std::abs(x);
    case Transform::Indicator: return x > 0.0 ? 1.0 : 0.0;
  }
  throw std::logic_error("apply_transform: unknown transform");
}

Transform transform_from_name(const std::string& name) {
  if (name == "identity") return Transform::Identity;
  if (name == "sin") return Transform::Sin;
  if (name == "tanh") return Transform::Tanh;
  if (name == "square") return Transform::Square;
  if (name == "abs") return Transform::Abs;
  if (name == "indicator") return Transform::Indicator;
  throw std::runtime_error("unknown transform: " + name);
}

std::string transform_name(Transform t) {
  switch (t) {
    case Transform::Identity: return "identity";
    case Transform::Sin: return "sin";
    case Transform::Tanh: return "tanh";
    case Transform::Square: return "square";
    case Transform::Abs: return "abs";
    case Transform::Indicator: return "indicator";
  }
  throw std::logic_error("transform_name: unknown transform");
}

namespace {

double term_sum(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                const std::vector<Transform>& transforms,
                const std::vector<ScenarioTerm>& singles,
                const std::vector<ScenarioPairTerm>& pairs) {
  double acc = 0.0;
  for (const auto& t : singles) acc += t.coef * apply_transform(transforms[static_cast<std::size_t>(t.feature)], x[t.feature]);
  for (const auto& t : pairs)
    acc += t.coef * apply_transform(transforms[static_cast<std::size_t>(t.f1)], x[t.f1]) *
           apply_transform(transforms[static_cast<std::size_t>(t.f2)], x[t.f2]);
  return acc;
}

}  // namespace

double ScenarioSpec::prognostic(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return term_sum(x, prognostic_transforms, beta_singles, beta_pairs);
}

double ScenarioSpec::cate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return term_sum(x, predictive_transforms, delta_singles, delta_pairs);
}

void validate(const ScenarioSpec& spec) {
  if (spec.p < 1) throw std::invalid_argument("ScenarioSpec: p >= 1 required");
  if (spec.noise_sd < 0.0) throw std::invalid_argument("ScenarioSpec: noise_sd >= 0 required");
  if (spec.prognostic_transforms.size() != static_cast<std::size_t>(spec.p) ||
      spec.predictive_transforms.size() != static_cast<std::size_t>(spec.p))
    throw std::invalid_argument("ScenarioSpec: transform lists must cover all features");
  auto check_feature = [&](int f) {
    if (f < 0 || f >= spec.p) throw std::invalid_argument("ScenarioSpec: term feature out of range");
  };
  for (const auto& t : spec.beta_singles) check_feature(t.feature);
  for (const auto& t : spec.delta_singles) check_feature(t.feature);
  for (const auto& t : spec.beta_pairs) {
    check_feature(t.f1);
    check_feature(t.f2);
  }
  for (const auto& t : spec.delta_pairs) {
    check_feature(t.f1);
    check_feature(t.f2);
  }
}

Generated gen_linear_family(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed,
                            ForceTreatment force) {
  validate(spec);
  if (n < 1) throw std::invalid_argument("gen_linear_family: n >= 1 required");

  Rng rng(seed);
  Matrix X(static_cast<Eigen::Index>(n), spec.p);
  Vector a(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
  Vector tau(static_cast<Eigen::Index>(n)), mu0(static_cast<Eigen::Index>(n));

  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int j = 0; j < spec.p; ++j) X(r, j) = rng.normal();
    // assignment draw is always consumed so forcing keeps the noise stream
    const bool treated = rng.bernoulli(0.5);
    const double eps = rng.normal() * spec.noise_sd;

    double ai = treated ? 1.0 : 0.0;
    if (force == ForceTreatment::Control) ai = 0.0;
    if (force == ForceTreatment::Treated) ai = 1.0;

    const double prog = spec.prognostic(X.row(r));
    const double effect = spec.cate(X.row(r));
    a[r] = ai;
    tau[r] = effect;
    mu0[r] = prog;
    y[r] = prog + effect * ai + eps;
  }

  Generated out;
  out.trial = TrialDataset{DesignMatrix(X), a, y, spec.name, seed};
  out.eval = EvaluationSet{DesignMatrix(std::move(X)), tau, mu0, Vector(mu0 + tau)};
  return out;
}

// ------------------------------------------------------------- presets ----

namespace {

ScenarioSpec base_spec(const std::string& name, int p, double noise_sd) {
  ScenarioSpec spec;
  spec.name = name;
  spec.p = p;
  spec.noise_sd = noise_sd;
  spec.prognostic_transforms.assign(static_cast<std::size_t>(p), Transform::Identity);
  spec.predictive_transforms.assign(static_cast<std::size_t>(p), Transform::Identity);
  return spec;
}

void linear_prognostic_block(ScenarioSpec& spec) {
  for (int j = 0; j < 10 && j < spec.p; ++j)
    spec.beta_singles.push_back({j, 1.0 - 0.1 * static_cast<double>(j)});
}

}  // namespace

ScenarioSpec builtin_linear_scenario(const std::string& name) {
  if (name == "linear-p10") {
    ScenarioSpec spec = base_spec(name, 10, 1.7);
    linear_prognostic_block(spec);
    spec.delta_singles = {{0, 0.8}, {1, 0.6}, {2, 0.4}, {3, 0.3}, {4, 0.2}};
    return spec;
  }
  if (name == "slightly-nl-p10" || name == "slightly-nl-p20") {
    ScenarioSpec spec = base_spec(name, name == "slightly-nl-p10" ? 10 : 20, 1.0);
    linear_prognostic_block(spec);
    spec.predictive_transforms[0] = Transform::Tanh;
    spec.predictive_transforms[1] = Transform::Square;
    spec.predictive_transforms[2] = Transform::Indicator;
    spec.predictive_transforms[3] = Transform::Abs;
    spec.predictive_transforms[4] = Transform::Sin;
    spec.delta_singles = {{0, 0.8}, {1, 0.5}, {2, 0.8}, {3, 0.5}, {4, 0.6}};
    return spec;
  }
  if (name == "highly-nl-p10") {
    ScenarioSpec spec = base_spec(name, 10, 1.5);
    const Transform f[10] = {Transform::Tanh, Transform::Square, Transform::Sin, Transform::Abs,
                             Transform::Indicator, Transform::Identity, Transform::Tanh,
                             Transform::Square, Transform::Sin, Transform::Abs};
    const Transform g[10] = {Transform::Square, Transform::Tanh, Transform::Indicator,
                             Transform::Sin, Transform::Abs, Transform::Identity,
                             Transform::Tanh, Transform::Square, Transform::Sin, Transform::Abs};
    for (int j = 0; j < 10; ++j) {
      spec.prognostic_transforms[static_cast<std::size_t>(j)] = f[j];
      spec.predictive_transforms[static_cast<std::size_t>(j)] = g[j];
    }
    spec.beta_singles = {{0, 1.0}, {1, 0.8}, {2, 0.8}, {3, 0.6}, {4, 0.6},
                         {5, 0.5}, {6, 0.4}, {7, 0.4}, {8, 0.3}, {9, 0.3}};
    spec.beta_pairs = {{0, 1, 0.8}, {2, 3, 0.6}, {4, 5, 0.5}};
    spec.delta_singles = {{0, 0.5}, {1, 0.7}, {2, 0.6}, {3, 0.5}, {4, 0.4}};
    spec.delta_pairs = {{0, 1, 0.6}, {1, 2, 0.5}};
    return spec;
  }
  throw std::runtime_error("unknown scenario preset: " + name);
}

std::vector<std::string> builtin_linear_scenario_names() {
  return {"linear-p10", "slightly-nl-p10", "slightly-nl-p20", "highly-nl-p10"};
}

// ------------------------------------------------------------ config io ----

namespace {

std::vector<ScenarioTerm> parse_singles(const ConfigFile& cfg, const std::string& section,
                                        int p) {
  std::vector<ScenarioTerm> out;
  if (!cfg.has(section, "singles")) return out;
  for (const auto& item : cfg.get_list(section, "singles")) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("scenario config: expected feature:coef, got " + item);
    const int feature = std::stoi(item.substr(0, colon)) - 1;  // files are 1-based
    const double coef = std::stod(item.substr(colon + 1));
    if (feature < 0 || feature >= p)
      throw std::runtime_error("scenario config: feature out of range in " + item);
    out.push_back({feature, coef});
  }
  return out;
}

std::vector<ScenarioPairTerm> parse_pairs(const ConfigFile& cfg, const std::string& section,
                                          int p) {
  std::vector<ScenarioPairTerm> out;
  if (!cfg.has(section, "pairs")) return out;
  for (const auto& item : cfg.get_list(section, "pairs")) {
    // list items are comma-separated, so pairs use f1*f2:coef
    const std::size_t colon = item.find(':');
    const std::size_t star = item.find('*');
    if (colon == std::string::npos || star == std::string::npos || star > colon)
      throw std::runtime_error("scenario config: expected f1*f2:coef, got " + item);
    const int f1 = std::stoi(item.substr(0, star)) - 1;
    const int f2 = std::stoi(item.substr(star + 1, colon - star - 1)) - 1;
    const double coef = std::stod(item.substr(colon + 1));
    if (f1 < 0 || f1 >= p || f2 < 0 || f2 >= p)
      throw std::runtime_error("scenario config: feature out of range in " + item);
    out.push_back({f1, f2, coef});
  }
  return out;
}

std::vector<Transform> parse_transforms(const ConfigFile& cfg, const std::string& section,
                                        int p) {
  std::vector<Transform> out(static_cast<std::size_t>(p), Transform::Identity);
  if (!cfg.has(section, "transforms")) return out;
  const auto names = cfg.get_list(section, "transforms");
  if (names.size() != static_cast<std::size_t>(p))
    throw std::runtime_error("scenario config: transforms must list one entry per feature");
  for (std::size_t j = 0; j < names.size(); ++j) out[j] = transform_from_name(names[j]);
  return out;
}

std::string terms_to_string(const std::vector<ScenarioTerm>& singles) {
  std::ostringstream out;
  for (std::size_t i = 0; i < singles.size(); ++i) {
    if (i) out << ", ";
    out << (singles[i].feature + 1) << ":" << singles[i].coef;
  }
  return out.str();
}

std::string pairs_to_string(const std::vector<ScenarioPairTerm>& pairs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) out << ", ";
    out << (pairs[i].f1 + 1) << "*" << (pairs[i].f2 + 1) << ":" << pairs[i].coef;
  }
  return out.str();
}

std::string transforms_to_string(const std::vector<Transform>& transforms) {
  std::ostringstream out;
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    if (i) out << ", ";
    out << transform_name(transforms[i]);
  }
  return out.str();
}

}  // namespace

ScenarioSpec scenario_from_config(const ConfigFile& cfg) {
  const std::string kind = cfg.get_string("scenario", "kind", "linear-family");
  if (kind != "linear-family")
    throw std::runtime_error("scenario_from_config: kind must be linear-family, got " + kind);
  ScenarioSpec spec;
  spec.name = cfg.get_string("scenario", "name");
  spec.p = static_cast<int>(cfg.get_int("scenario", "p"));
  spec.noise_sd = cfg.get_double("scenario", "noise_sd", 1.0);
  spec.prognostic_transforms = parse_transforms(cfg, "prognostic", spec.p);
  spec.predictive_transforms = parse_transforms(cfg, "predictive", spec.p);
  spec.beta_singles = parse_singles(cfg, "prognostic", spec.p);
  spec.beta_pairs = parse_pairs(cfg, "prognostic", spec.p);
  spec.delta_singles = parse_singles(cfg, "predictive", spec.p);
  spec.delta_pairs = parse_pairs(cfg, "predictive", spec.p);
  validate(spec);
  return spec;
}

ConfigFile scenario_to_config(const ScenarioSpec& spec) {
  validate(spec);
  ConfigFile cfg;
  cfg.set("scenario", "kind", "linear-family");
  cfg.set("scenario", "name", spec.name);
  cfg.set("scenario", "p", std::to_string(spec.p));
  {
    std::ostringstream noise;
    noise << spec.noise_sd;
    cfg.set("scenario", "noise_sd", noise.str());
  }
  cfg.set("prognostic", "transforms", transforms_to_string(spec.prognostic_transforms));
  if (!spec.beta_singles.empty()) cfg.set("prognostic", "singles", terms_to_string(spec.beta_singles));
  if (!spec.beta_pairs.empty()) cfg.set("prognostic", "pairs", pairs_to_string(spec.beta_pairs));
  cfg.set("predictive", "transforms", transforms_to_string(spec.predictive_transforms));
  if (!spec.delta_singles.empty()) cfg.set("predictive", "singles", terms_to_string(spec.delta_singles));
  if (!spec.delta_pairs.empty()) cfg.set("predictive", "pairs", pairs_to_string(spec.delta_pairs));
  return cfg;
}

}  // namespace hte
