#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hte/dgp.hpp"
#include "hte/random.hpp"

namespace hte {

void validate(const Pdl1Params& params) {
  double psum = 0.0;
  for (double p : params.phenotype_probs) {
    if (p < 0.0) throw std::invalid_argument("Pdl1Params: negative phenotype probability");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw std::invalid_argument("Pdl1Params: phenotype probabilities must sum to 1");
  if (!(params.d2 > 0.0)) throw std::invalid_argument("Pdl1Params: d2 > 0 required");
  if (params.pdl1_cuts[0] >= params.pdl1_cuts[1])
    throw std::invalid_argument("Pdl1Params: PD-L1 cutpoints must increase");
  for (double sd : {params.sd_b, params.sd_e, params.sd_l, params.sd_p, params.sd_g,
                    params.mutation_log_sd})
    if (sd < 0.0) throw std::invalid_argument("Pdl1Params: negative noise sd");
}

Generated gen_pdl1(const Pdl1Params& params, std::size_t n, std::uint64_t seed,
                   ForceTreatment force) {
  validate(params);
  if (n < 1) throw std::invalid_argument("gen_pdl1: n >= 1 required");

  Rng rng(seed);
  Matrix X(static_cast<Eigen::Index>(n), 5);
  Vector a(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
  Vector tau(static_cast<Eigen::Index>(n)), mu0(static_cast<Eigen::Index>(n));

  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);

    const double u_phen = rng.uniform();
    int phenotype = 2;
    if (u_phen < params.phenotype_probs[0])
      phenotype = 0;
    else if (u_phen < params.phenotype_probs[0] + params.phenotype_probs[1])
      phenotype = 1;

    const double mutation =
        std::exp(params.mutation_log_mean + params.mutation_log_sd * rng.normal());
    const double tgfb = params.a0 + params.a1 * phenotype + rng.normal() * params.sd_b;
    const double cd8_pre = params.b0 + params.b1 * phenotype + rng.normal() * params.sd_e;

    const double latent = static_cast<double>(phenotype) + rng.normal() * params.sd_l;
    int pdl1_pre = 0;
    if (latent >= params.pdl1_cuts[1])
      pdl1_pre = 2;
    else if (latent >= params.pdl1_cuts[0])
      pdl1_pre = 1;

    const bool treated_draw = rng.bernoulli(0.5);
    const double eps_p = rng.normal() * params.sd_p;
    const double eps_g = rng.normal() * params.sd_g;

    double ai = treated_draw ? 1.0 : 0.0;
    if (force == ForceTreatment::Control) ai = 0.0;
    if (force == ForceTreatment::Treated) ai = 1.0;

    const int pdl1_post = std::max(pdl1_pre - static_cast<int>(ai), 0);
    const double cd8_post = cd8_pre + params.c1 * tgfb +
                            params.c2 * mutation * static_cast<double>(pdl1_pre - pdl1_post) +
                            eps_p;
    const double growth = params.d1 * mutation - params.d2 * cd8_post + eps_g;

    X(r, 0) = mutation;
    X(r, 1) = static_cast<double>(phenotype);
    X(r, 2) = tgfb;
    X(r, 3) = cd8_pre;
    X(r, 4) = static_cast<double>(pdl1_pre);
    a[r] = ai;
    y[r] = growth;
    tau[r] = pdl1_pre >= 1 ? -params.d2 * params.c2 * mutation : 0.0;
    mu0[r] = params.d1 * mutation - params.d2 * (cd8_pre + params.c1 * tgfb);
  }

  Generated out;
  out.trial = TrialDataset{DesignMatrix(X), a, y, "pd-l1", seed};
  out.eval = EvaluationSet{DesignMatrix(std::move(X)), tau, mu0, Vector(mu0 + tau)};
  return out;
}

Pdl1Params pdl1_from_config(const ConfigFile& cfg) {
  const std::string kind = cfg.get_string("scenario", "kind", "pd-l1");
  if (kind != "pd-l1")
    throw std::runtime_error("pdl1_from_config: kind must be pd-l1, got " + kind);
  Pdl1Params params;
  if (cfg.has("phenotype", "probabilities")) {
    const auto probs = cfg.get_double_list("phenotype", "probabilities");
    if (probs.size() != 3)
      throw std::runtime_error("pdl1 config: phenotype probabilities need 3 entries");
    params.phenotype_probs = {probs[0], probs[1], probs[2]};
  }
  params.mutation_log_mean = cfg.get_double("mutation", "log_mean", params.mutation_log_mean);
  params.mutation_log_sd = cfg.get_double("mutation", "log_sd", params.mutation_log_sd);
  params.a0 = cfg.get_double("structural", "a0", params.a0);
  params.a1 = cfg.get_double("structural", "a1", params.a1);
  params.b0 = cfg.get_double("structural", "b0", params.b0);
  params.b1 = cfg.get_double("structural", "b1", params.b1);
  params.c1 = cfg.get_double("structural", "c1", params.c1);
  params.c2 = cfg.get_double("structural", "c2", params.c2);
  params.d1 = cfg.get_double("structural", "d1", params.d1);
  params.d2 = cfg.get_double("structural", "d2", params.d2);
  params.sd_b = cfg.get_double("noise", "sd_b", params.sd_b);
  params.sd_e = cfg.get_double("noise", "sd_e", params.sd_e);
  params.sd_l = cfg.get_double("noise", "sd_l", params.sd_l);
  params.sd_p = cfg.get_double("noise", "sd_p", params.sd_p);
  params.sd_g = cfg.get_double("noise", "sd_g", params.sd_g);
  if (cfg.has("pdl1", "cutpoints")) {
    const auto cuts = cfg.get_double_list("pdl1", "cutpoints");
    if (cuts.size() != 2) throw std::runtime_error("pdl1 config: cutpoints needs 2 entries");
    params.pdl1_cuts = {cuts[0], cuts[1]};
  }
  validate(params);
  return params;
}

ConfigFile pdl1_to_config(const Pdl1Params& params) {
  validate(params);
  ConfigFile cfg;
  auto num = [](double v) {
    std::ostringstream out;
    out << v;
    return out.str();
  };
  cfg.set("scenario", "kind", "pd-l1");
  cfg.set("scenario", "name", "pd-l1");
  cfg.set("phenotype", "probabilities",
          num(params.phenotype_probs[0]) + ", " + num(params.phenotype_probs[1]) + ", " +
              num(params.phenotype_probs[2]));
  cfg.set("mutation", "log_mean", num(params.mutation_log_mean));
  cfg.set("mutation", "log_sd", num(params.mutation_log_sd));
  cfg.set("structural", "a0", num(params.a0));
  cfg.set("structural", "a1", num(params.a1));
  cfg.set("structural", "b0", num(params.b0));
  cfg.set("structural", "b1", num(params.b1));
  cfg.set("structural", "c1", num(params.c1));
  cfg.set("structural", "c2", num(params.c2));
  cfg.set("structural", "d1", num(params.d1));
  cfg.set("structural", "d2", num(params.d2));
  cfg.set("noise", "sd_b", num(params.sd_b));
  cfg.set("noise", "sd_e", num(params.sd_e));
  cfg.set("noise", "sd_l", num(params.sd_l));
  cfg.set("noise", "sd_p", num(params.sd_p));
  cfg.set("noise", "sd_g", num(params.sd_g));
  cfg.set("pdl1", "cutpoints", num(params.pdl1_cuts[0]) + ", " + num(params.pdl1_cuts[1]));
  return cfg;
}

}  // namespace hte
