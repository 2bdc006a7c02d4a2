#include <numeric>
#include <stdexcept>

#include "hte/dataset_io.hpp"
#include "hte/dgp.hpp"
#include "hte/random.hpp"

namespace hte {

Generated load_external(const std::string& path, std::size_t n_train, std::uint64_t seed,
                        double noise_sd) {
  const CsvDataset file = read_dataset_csv(path);
  if (!file.tau)
    throw std::runtime_error("load_external: file must contain a tau column: " + path);
  const std::size_t rows = static_cast<std::size_t>(file.covariates.rows());
  if (n_train < 1 || n_train >= rows)
    throw std::invalid_argument("load_external: need 1 <= n_train < file rows");

  Rng rng(seed);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> eval_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(eval_idx.begin(), eval_idx.end());

  // balanced re-randomization; outcome re-drawn from mu_A when available
  Vector a(static_cast<Eigen::Index>(n_train)), y(static_cast<Eigen::Index>(n_train));
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto src = static_cast<Eigen::Index>(train_idx[i]);
    const bool treated = rng.bernoulli(0.5);
    const double noise = rng.normal() * noise_sd;
    a[static_cast<Eigen::Index>(i)] = treated ? 1.0 : 0.0;
    if (file.mu0) {
      const double mu = treated ? (*file.mu1)[src] : (*file.mu0)[src];
      y[static_cast<Eigen::Index>(i)] = mu + noise;
    } else {
      y[static_cast<Eigen::Index>(i)] = file.y[src];
    }
  }

  Generated out;
  out.trial = TrialDataset{file.covariates.select_rows(train_idx), a, y, path, seed};

  EvaluationSet eval;
  eval.covariates = file.covariates.select_rows(eval_idx);
  eval.true_cate.resize(static_cast<Eigen::Index>(eval_idx.size()));
  for (std::size_t i = 0; i < eval_idx.size(); ++i)
    eval.true_cate[static_cast<Eigen::Index>(i)] =
        (*file.tau)[static_cast<Eigen::Index>(eval_idx[i])];
  if (file.mu0) {
    Vector m0(static_cast<Eigen::Index>(eval_idx.size())), m1(static_cast<Eigen::Index>(eval_idx.size()));
    for (std::size_t i = 0; i < eval_idx.size(); ++i) {
      m0[static_cast<Eigen::Index>(i)] = (*file.mu0)[static_cast<Eigen::Index>(eval_idx[i])];
      m1[static_cast<Eigen::Index>(i)] = (*file.mu1)[static_cast<Eigen::Index>(eval_idx[i])];
    }
    eval.mu0 = std::move(m0);
    eval.mu1 = std::move(m1);
  }
  out.eval = std::move(eval);
  return out;
}

}  // namespace hte
