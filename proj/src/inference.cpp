#include "hetdiag/inference.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace hetdiag {

namespace {

// splitmix64, the usual way to expand a seed into decorrelated streams.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Bounded draw by multiply-shift; avoids distribution objects so the draw
// sequence is pinned by this file alone.
Eigen::Index draw_index(std::mt19937_64& rng, Eigen::Index n) {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(n);
  return static_cast<Eigen::Index>(wide >> 64);
}

// Failures of this kind mean the resample happened to be degenerate; the
// replicate is dropped. Anything else is a caller bug and propagates.
bool replicate_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::assumption2:
    case ErrorCode::rank_deficient:
    case ErrorCode::degenerate_group:
    case ErrorCode::identity_broken:
    case ErrorCode::no_variation:
      return true;
    default:
      return false;
  }
}

}  // namespace

BootstrapResult pairs_bootstrap(const Statistic& stat, const Dataset& ds,
                                int reps, std::uint64_t seed, int threads) {
  if (reps < 2) {
    throw Error(ErrorCode::bad_config,
                "need at least 2 bootstrap replicates, got " +
                    std::to_string(reps));
  }
  validate(ds);
  const Eigen::Index n = ds.n();

  auto resample = [&](int r) {
    std::mt19937_64 rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(r))));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[i] = draw_index(rng, n);
    return take_rows(ds, idx);
  };

  std::vector<char> ok(static_cast<std::size_t>(reps), 0);

  // Walk replicates in order until one succeeds; that fixes the statistic's
  // width. Failures seen on the way are recorded like any other.
  Eigen::Index width = -1;
  Eigen::MatrixXd rows;  // replicate index -> statistic values
  int first_done = reps;
  for (int r = 0; r < reps; ++r) {
    try {
      Eigen::VectorXd v = stat(resample(r));
      width = v.size();
      rows.resize(reps, width);
      rows.row(r) = v.transpose();
      ok[static_cast<std::size_t>(r)] = 1;
      first_done = r;
      break;
    } catch (const Error& e) {
      if (!replicate_failure(e.code())) throw;
    }
  }
  if (first_done == reps) {
    throw Error(ErrorCode::too_many_failures,
                "all " + std::to_string(reps) +
                    " bootstrap replicates failed the assumption checks; the "
                    "resampled data cannot support this statistic");
  }

  std::exception_ptr hard_error;
  std::mutex err_mu;
  std::atomic<bool> stop{false};
  auto run_range = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      if (stop.load(std::memory_order_relaxed)) return;
      try {
        Eigen::VectorXd v = stat(resample(r));
        if (v.size() != width) {
          throw Error(ErrorCode::bad_config,
                      "statistic changed width across replicates");
        }
        rows.row(r) = v.transpose();
        ok[static_cast<std::size_t>(r)] = 1;
      } catch (const Error& e) {
        if (replicate_failure(e.code())) continue;
        std::lock_guard<std::mutex> lock(err_mu);
        if (!hard_error) hard_error = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!hard_error) hard_error = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const int remaining = reps - (first_done + 1);
  int n_threads = threads > 0
                      ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, std::max(remaining, 1));
  if (remaining > 0) {
    if (n_threads == 1) {
      run_range(first_done + 1, reps);
    } else {
      std::vector<std::thread> pool;
      const int span = (remaining + n_threads - 1) / n_threads;
      for (int t = 0; t < n_threads; ++t) {
        const int lo = first_done + 1 + t * span;
        const int hi = std::min(reps, lo + span);
        if (lo < hi) pool.emplace_back(run_range, lo, hi);
      }
      for (auto& th : pool) th.join();
    }
  }
  if (hard_error) std::rethrow_exception(hard_error);

  BootstrapResult out;
  out.reps_requested = reps;
  out.seed = seed;
  int kept = 0;
  for (char f : ok) kept += f;
  out.n_failed = reps - kept;
  if (out.n_failed > reps / 2 || kept < 2) {
    throw Error(ErrorCode::too_many_failures,
                std::to_string(out.n_failed) + " of " + std::to_string(reps) +
                    " bootstrap replicates failed the assumption checks; the "
                    "resampled data cannot support this statistic");
  }

  out.replicates.resize(kept, width);
  for (int r = 0, i = 0; r < reps; ++r) {
    if (ok[static_cast<std::size_t>(r)]) out.replicates.row(i++) = rows.row(r);
  }
  Eigen::RowVectorXd mean = out.replicates.colwise().mean();
  out.se = ((out.replicates.rowwise() - mean).colwise().squaredNorm() /
            static_cast<double>(kept - 1))
               .array()
               .sqrt()
               .transpose();
  return out;
}

}  // namespace hetdiag
