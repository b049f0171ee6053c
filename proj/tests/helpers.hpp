#pragma once

#include <random>
#include <string>

#include "hetdiag/dataset.hpp"
#include "hetdiag/oracle.hpp"

namespace testutil {

inline std::string test_data(const std::string& name) {
  return std::string(HETDIAG_TEST_DATA_DIR) + "/" + name;
}

inline std::string bundled_data(const std::string& name) {
  return std::string(HETDIAG_DATA_DIR) + "/" + name;
}

inline hetdiag::Dataset toy8() {
  return hetdiag::load_csv(test_data("toy8.csv"), "y", "d", {"x"}).data;
}

inline hetdiag::DgpConfig toy8_config() {
  hetdiag::DgpConfig cfg;
  cfg.stratum_shares = {0.5, 0.5};
  cfg.stratum_propensities = {0.25, 0.75};
  cfg.alpha1 = 1.0;
  cfg.gamma1 = 4.0;
  cfg.alpha0 = 0.0;
  cfg.gamma0 = 0.0;
  cfg.n = 8;
  cfg.exact_counts = true;
  return cfg;
}

// Continuous design: uniform covariates, treatment from a linear propensity
// kept inside (0, 1), outcome with treatment effect varying in x. Used for
// properties that must hold on any realized sample.
inline hetdiag::Dataset random_continuous(std::uint64_t seed, Eigen::Index n,
                                          Eigen::Index k) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = unif(rng);
  }
  Eigen::VectorXd beta(k);
  for (Eigen::Index j = 0; j < k; ++j) beta(j) = 0.2 + 0.5 * unif(rng);
  const double scale = 0.8 / beta.sum();  // propensity range inside (0.1, 0.9)
  Eigen::VectorXd d(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = 0.1 + scale * x.row(i).dot(beta);
    d(i) = unif(rng) < p ? 1.0 : 0.0;
    const double effect = 1.0 + 2.0 * x(i, 0);  // heterogeneous in x1
    y(i) = 0.5 + x.row(i).sum() + d(i) * effect + 0.3 * gauss(rng);
  }
  // Degenerate draws are possible for tiny n; retry with the next seed.
  Eigen::Index n1 = static_cast<Eigen::Index>(d.sum() + 0.5);
  if (n1 == 0 || n1 == n) return random_continuous(seed + 1, n, k);
  return hetdiag::make_dataset(std::move(y), std::move(d), std::move(x));
}

// Saturated design where every stratum keeps both arms occupied, so group
// fits and stratum contrasts are all well defined.
inline hetdiag::DgpConfig random_saturated_config(std::uint64_t seed,
                                                  Eigen::Index n_min = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int s = 2 + static_cast<int>(unif(rng) * 4.0);  // 2..5 strata
  hetdiag::DgpConfig cfg;
  double total = 0.0;
  for (int i = 0; i < s; ++i) {
    const double w = 0.5 + unif(rng);
    cfg.stratum_shares.push_back(w);
    total += w;
  }
  for (auto& w : cfg.stratum_shares) w /= total;
  for (int i = 0; i < s; ++i) {
    cfg.stratum_propensities.push_back(0.15 + 0.7 * unif(rng));
  }
  cfg.alpha1 = -1.0 + 2.0 * unif(rng);
  cfg.gamma1 = -2.0 + 4.0 * unif(rng);
  cfg.alpha0 = -1.0 + 2.0 * unif(rng);
  cfg.gamma0 = -2.0 + 4.0 * unif(rng);
  cfg.noise_sd = 0.5 * unif(rng);
  cfg.n = n_min + static_cast<Eigen::Index>(unif(rng) * 300.0);
  return cfg;
}

}  // namespace testutil
