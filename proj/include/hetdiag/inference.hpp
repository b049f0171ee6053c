#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "hetdiag/dataset.hpp"

namespace hetdiag {

struct BootstrapResult {
  Eigen::MatrixXd replicates;  // one row per successful replicate
  Eigen::VectorXd se;          // column-wise sample standard deviation
  int reps_requested = 0;
  int n_failed = 0;
  std::uint64_t seed = 0;
};

using Statistic = std::function<Eigen::VectorXd(const Dataset&)>;

// Pairs bootstrap: rows are resampled with replacement and the statistic is
// recomputed on each resample. Replicate r draws from its own generator
// seeded by (seed, r), so results do not depend on evaluation order and the
// replicate loop can run on any number of threads. Resamples on which the
// statistic fails a data or assumption check are skipped and counted;
// exceeding reps / 2 failures aborts.
BootstrapResult pairs_bootstrap(const Statistic& stat, const Dataset& ds,
                                int reps, std::uint64_t seed, int threads = 0);

}  // namespace hetdiag
