#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hetdiag/dataset.hpp"

namespace hetdiag {

// Cross-checks for the diagnostics pipeline. Everything here is computed
// from first principles (closed-form moments, stratum tables, one-off
// regressions) and shares nothing with the diagnostics code beyond the
// least-squares kernel.

struct StratumCell {
  double share;          // fraction of rows in the stratum
  double treated_share;  // fraction treated within the stratum
  double contrast;       // mean(y | d=1) - mean(y | d=0); NaN when undefined
  bool defined;          // treated_share strictly inside (0, 1)
};

struct StratumTable {
  std::vector<StratumCell> cells;
};

StratumTable empirical_strata(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& d,
                              const std::vector<int>& stratum);

// Variance-of-treatment weighting of the stratum contrasts: weight_s is
// proportional to share_s * q_s * (1 - q_s). On a saturated design this
// reproduces the regression's treatment coefficient. Strata with
// treated_share in {0, 1} carry weight zero; if every stratum is such,
// no comparison exists and the estimand is undefined.
struct StratumWeighting {
  double tau;
  std::vector<double> weights;  // aligned with the table, sums to 1
};

StratumWeighting angrist_tau(const StratumTable& table);

// Coefficient on d in y ~ [1, d, p, d * (p - c)] where c is the mean of p
// in group j. Recovers the group-j average partial linear effect through a
// single interacted regression instead of two group fits.
double interaction_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& d, int group);

// rho * var(p | d=1) and (1 - rho) * var(p | d=0) written in raw moments of
// p alone. Valid whenever the within-level treated share equals p itself,
// which holds in-sample for saturated designs.
struct MomentVariances {
  double a1;  // rho * var(p | d=1)   = E p^3 - (E p^2)^2 / E p
  double a0;  // (1-rho) * var(p|d=0) = E p^2 - E p^3 - (E p - E p^2)^2 / (1 - E p)
};

MomentVariances moment_variances(const Eigen::VectorXd& p);

// Saturated synthetic design: discrete strata with given shares and
// within-stratum treatment probabilities; outcomes follow one line per arm
// in the stratum propensity, plus optional Gaussian noise. Covariates are
// stratum indicators (first stratum omitted).
struct DgpConfig {
  std::vector<double> stratum_shares;
  std::vector<double> stratum_propensities;
  double alpha1 = 0.0;
  double gamma1 = 0.0;
  double alpha0 = 0.0;
  double gamma0 = 0.0;
  double noise_sd = 0.0;
  Eigen::Index n = 0;
  // Nearest-count allocation of strata and treated rows instead of random
  // assignment; makes small fixtures exactly reproducible.
  bool exact_counts = false;
};

struct SynthDraw {
  Dataset data;
  std::vector<int> stratum;  // row -> stratum id
  double aple;               // population values implied by the config
  double aple1;
  double aple0;
};

SynthDraw synth_dgp(const DgpConfig& cfg, std::uint64_t seed);

// Population weights under a uniform shift of every stratum propensity.
// Raising the overall treated share moves weight onto the untreated-side
// effect: w1 falls, w0 rises.
struct SweepPoint {
  double shift;
  double rho;
  double w1;
  double w0;
};

std::vector<SweepPoint> shift_intercept_sweep(const DgpConfig& cfg,
                                              const std::vector<double>& shifts);

}  // namespace hetdiag
