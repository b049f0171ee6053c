#include "hetdiag/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "hetdiag/linproj.hpp"

namespace hetdiag {

namespace {

void check_config(const DgpConfig& cfg) {
  const std::size_t s = cfg.stratum_shares.size();
  if (s < 2 || cfg.stratum_propensities.size() != s) {
    throw Error(ErrorCode::bad_config,
                "need at least two strata with one propensity each");
  }
  double total = 0.0;
  for (double sh : cfg.stratum_shares) {
    if (!(sh > 0.0)) {
      throw Error(ErrorCode::bad_config, "stratum shares must be positive");
    }
    total += sh;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw Error(ErrorCode::bad_config,
                "stratum shares sum to " + std::to_string(total) +
                    ", expected 1");
  }
  for (double q : cfg.stratum_propensities) {
    if (!(q > 0.0 && q < 1.0)) {
      throw Error(ErrorCode::bad_config,
                  "stratum propensities must lie strictly inside (0, 1)");
    }
  }
  if (cfg.n < static_cast<Eigen::Index>(2 * s)) {
    throw Error(ErrorCode::bad_config,
                "n must be at least twice the number of strata");
  }
  if (cfg.noise_sd < 0.0 || !std::isfinite(cfg.noise_sd)) {
    throw Error(ErrorCode::bad_config, "noise_sd must be nonnegative");
  }
}

// Population moments of p for a saturated design: p takes value q_s with
// probability share_s.
struct PopMoments {
  double ep, ep2, ep3;
};

PopMoments population_moments(const std::vector<double>& shares,
                              const std::vector<double>& props) {
  PopMoments m{0.0, 0.0, 0.0};
  for (std::size_t s = 0; s < shares.size(); ++s) {
    const double q = props[s];
    m.ep += shares[s] * q;
    m.ep2 += shares[s] * q * q;
    m.ep3 += shares[s] * q * q * q;
  }
  return m;
}

// Largest-remainder allocation of n into bins proportional to shares.
std::vector<Eigen::Index> apportion(const std::vector<double>& shares,
                                    Eigen::Index n) {
  const std::size_t s = shares.size();
  std::vector<Eigen::Index> counts(s);
  std::vector<std::pair<double, std::size_t>> rem(s);
  Eigen::Index used = 0;
  for (std::size_t i = 0; i < s; ++i) {
    const double exact = shares[i] * static_cast<double>(n);
    counts[i] = static_cast<Eigen::Index>(std::floor(exact));
    used += counts[i];
    rem[i] = {exact - std::floor(exact), i};
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (Eigen::Index i = 0; i < n - used; ++i) ++counts[rem[i].second];
  return counts;
}

}  // namespace

StratumTable empirical_strata(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& d,
                              const std::vector<int>& stratum) {
  const Eigen::Index n = y.size();
  if (d.size() != n || static_cast<Eigen::Index>(stratum.size()) != n) {
    throw Error(ErrorCode::schema, "y, d and stratum disagree on row count");
  }
  struct Acc {
    Eigen::Index n = 0, n1 = 0;
    double sum1 = 0.0, sum0 = 0.0;
  };
  std::map<int, Acc> acc;
  for (Eigen::Index i = 0; i < n; ++i) {
    Acc& a = acc[stratum[i]];
    ++a.n;
    if (d(i) == 1.0) { ++a.n1; a.sum1 += y(i); } else { a.sum0 += y(i); }
  }
  StratumTable t;
  for (const auto& [id, a] : acc) {
    StratumCell cell;
    cell.share = static_cast<double>(a.n) / static_cast<double>(n);
    cell.treated_share = static_cast<double>(a.n1) / static_cast<double>(a.n);
    cell.defined = a.n1 > 0 && a.n1 < a.n;
    cell.contrast = cell.defined
                        ? a.sum1 / static_cast<double>(a.n1) -
                              a.sum0 / static_cast<double>(a.n - a.n1)
                        : std::numeric_limits<double>::quiet_NaN();
    t.cells.push_back(cell);
  }
  return t;
}

StratumWeighting angrist_tau(const StratumTable& table) {
  double total = 0.0;
  for (const auto& c : table.cells) {
    if (c.defined) total += c.share * c.treated_share * (1.0 - c.treated_share);
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::no_variation,
                "every stratum is all-treated or all-untreated; no "
                "within-stratum comparison exists");
  }
  StratumWeighting out;
  out.tau = 0.0;
  for (const auto& c : table.cells) {
    const double w =
        c.defined ? c.share * c.treated_share * (1.0 - c.treated_share) / total
                  : 0.0;
    out.weights.push_back(w);
    if (c.defined) out.tau += w * c.contrast;
  }
  return out;
}

double interaction_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& d, int group) {
  if (group != 0 && group != 1) {
    throw Error(ErrorCode::bad_config, "group must be 0 or 1");
  }
  const Eigen::Index n = y.size();
  if (p.size() != n || d.size() != n) {
    throw Error(ErrorCode::schema, "y, p and d disagree on the row count");
  }
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) == static_cast<double>(group)) { sum += p(i); ++count; }
  }
  if (count == 0) {
    throw Error(ErrorCode::degenerate_group,
                "no rows in the centering group");
  }
  const double center = sum / static_cast<double>(count);
  Eigen::MatrixXd z(n, 4);
  z.col(0).setOnes();
  z.col(1) = d;
  z.col(2) = p;
  z.col(3) = d.array() * (p.array() - center);
  return fit_ols(y, z).coef(1);
}

MomentVariances moment_variances(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw Error(ErrorCode::schema, "p is empty");
  const double ep = p.mean();
  const double ep2 = p.array().square().mean();
  const double ep3 = p.array().cube().mean();
  if (!(ep > 0.0 && ep < 1.0)) {
    throw Error(ErrorCode::degenerate_group,
                "mean of p must lie strictly inside (0, 1)");
  }
  MomentVariances v;
  v.a1 = ep3 - ep2 * ep2 / ep;
  v.a0 = ep2 - ep3 - (ep - ep2) * (ep - ep2) / (1.0 - ep);
  return v;
}

SynthDraw synth_dgp(const DgpConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  const std::size_t s = cfg.stratum_shares.size();
  const Eigen::Index n = cfg.n;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Stratum id and treatment per row. Exact mode fills strata in order,
  // treated rows first, so a noiseless config maps to one fixed table.
  std::vector<int> stratum;
  std::vector<double> dvec;
  stratum.reserve(static_cast<std::size_t>(n));
  dvec.reserve(static_cast<std::size_t>(n));
  if (cfg.exact_counts) {
    const auto counts = apportion(cfg.stratum_shares, n);
    for (std::size_t k = 0; k < s; ++k) {
      const Eigen::Index ns = counts[k];
      const Eigen::Index t = std::llround(cfg.stratum_propensities[k] *
                                          static_cast<double>(ns));
      for (Eigen::Index i = 0; i < ns; ++i) {
        stratum.push_back(static_cast<int>(k));
        dvec.push_back(i < t ? 1.0 : 0.0);
      }
    }
  } else {
    std::vector<double> cum(s);
    double acc = 0.0;
    for (std::size_t k = 0; k < s; ++k) { acc += cfg.stratum_shares[k]; cum[k] = acc; }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = unif(rng);
      std::size_t k = 0;
      while (k + 1 < s && u > cum[k]) ++k;
      stratum.push_back(static_cast<int>(k));
      dvec.push_back(unif(rng) < cfg.stratum_propensities[k] ? 1.0 : 0.0);
    }
  }

  Dataset ds;
  ds.y.resize(n);
  ds.d.resize(n);
  ds.x.resize(n, static_cast<Eigen::Index>(s - 1));
  ds.x.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = stratum[static_cast<std::size_t>(i)];
    const double q = cfg.stratum_propensities[static_cast<std::size_t>(k)];
    const double base = dvec[static_cast<std::size_t>(i)] == 1.0
                            ? cfg.alpha1 + cfg.gamma1 * q
                            : cfg.alpha0 + cfg.gamma0 * q;
    ds.d(i) = dvec[static_cast<std::size_t>(i)];
    ds.y(i) = base + (cfg.noise_sd > 0.0 ? cfg.noise_sd * gauss(rng) : 0.0);
    if (k > 0) ds.x(i, k - 1) = 1.0;
  }
  for (std::size_t k = 1; k < s; ++k) {
    ds.covariate_names.push_back("s" + std::to_string(k + 1));
  }

  const auto m =
      population_moments(cfg.stratum_shares, cfg.stratum_propensities);
  const double da = cfg.alpha1 - cfg.alpha0;
  const double dg = cfg.gamma1 - cfg.gamma0;

  SynthDraw draw;
  draw.data = std::move(ds);
  draw.stratum = std::move(stratum);
  draw.aple = da + dg * m.ep;
  draw.aple1 = da + dg * (m.ep2 / m.ep);           // E(p | d=1) = Ep^2 / Ep
  draw.aple0 = da + dg * ((m.ep - m.ep2) / (1.0 - m.ep));
  return draw;
}

std::vector<SweepPoint> shift_intercept_sweep(
    const DgpConfig& cfg, const std::vector<double>& shifts) {
  check_config(cfg);
  if (shifts.empty()) {
    throw Error(ErrorCode::bad_config, "no shifts supplied");
  }
  std::vector<SweepPoint> out;
  for (double shift : shifts) {
    std::vector<double> props = cfg.stratum_propensities;
    for (double& q : props) {
      q += shift;
      if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::bad_config,
                    "shift " + std::to_string(shift) +
                        " pushes a stratum propensity outside (0, 1)");
      }
    }
    const auto m = population_moments(cfg.stratum_shares, props);
    // Group moments of p from the raw ones, then the weight formula.
    const double rho = m.ep;
    const double mean1 = m.ep2 / m.ep;
    const double mean0 = (m.ep - m.ep2) / (1.0 - m.ep);
    const double var1 = m.ep3 / m.ep - mean1 * mean1;
    const double var0 = (m.ep2 - m.ep3) / (1.0 - m.ep) - mean0 * mean0;
    const double a1 = rho * var1;
    const double a0 = (1.0 - rho) * var0;
    out.push_back({shift, rho, a0 / (a0 + a1), a1 / (a0 + a1)});
  }
  return out;
}

}  // namespace hetdiag
