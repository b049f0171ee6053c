#include "hetdiag/diagnostics.hpp"

#include <cmath>
#include <string>

namespace hetdiag {

namespace {

// Assumption check: the propensity projection must vary within both groups,
// otherwise the reweighting identity divides by zero.
constexpr double kVarianceFloor = 1e-12;

// var(p) / var(d) is the R^2 of the treatment projection and cannot exceed
// one; values at rounding level mean the covariates carry no signal at all,
// in which case the within-group floors above would compare noise to noise.
constexpr double kSignalFloor = 1e-20;

// Consistency gate on |tau_ols - (w1 aple1 + w0 aple0)|, relative to the
// scale of tau_ols. The identity is exact in exact arithmetic; anything
// above this signals a numerical breakdown, not heterogeneity.
constexpr double kIdentityTol = 1e-6;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

double overall_variance(const Eigen::VectorXd& p) {
  const double m = p.mean();
  return (p.array() - m).square().mean();
}

void check_group_variation(double var_p_1, double var_p_0, double var_p,
                           double var_d) {
  if (!(var_p > kSignalFloor * var_d)) {
    throw Error(ErrorCode::assumption2,
                "the propensity projection has (numerically) no variation: "
                "the covariates carry no signal about treatment, so the "
                "weighted decomposition of the treatment coefficient is "
                "undefined");
  }
  const double floor = kVarianceFloor * var_p;
  if (var_p_1 < floor || var_p_0 < floor) {
    const char* side = var_p_1 <= var_p_0 ? "treated" : "untreated";
    throw Error(ErrorCode::assumption2,
                std::string("the propensity projection has (numerically) no "
                            "variation within the ") +
                    side +
                    " group, so the weighted decomposition of the treatment "
                    "coefficient is undefined");
  }
}

}  // namespace

PropensityFit propensity_lpm(const Eigen::VectorXd& d,
                             const Eigen::MatrixXd& x) {
  auto fit = fit_ols(d, with_intercept(x));
  return {fit.fitted, fit.coef};
}

GroupMoments group_moments(const Eigen::VectorXd& p, const Eigen::VectorXd& d) {
  if (p.size() != d.size()) {
    throw Error(ErrorCode::schema, "p and d disagree on the row count");
  }
  const Eigen::Index n = p.size();
  Eigen::Index n1 = 0;
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) == 1.0) { ++n1; s1 += p(i); } else { s0 += p(i); }
  }
  const Eigen::Index n0 = n - n1;
  if (n1 == 0 || n0 == 0) {
    throw Error(ErrorCode::degenerate_group,
                n1 == 0 ? "no treated rows" : "no untreated rows");
  }

  GroupMoments m;
  m.rho = static_cast<double>(n1) / static_cast<double>(n);
  m.mean_p_1 = s1 / static_cast<double>(n1);
  m.mean_p_0 = s0 / static_cast<double>(n0);

  double q1 = 0.0, q0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c1 = p(i) - m.mean_p_1;
    const double c0 = p(i) - m.mean_p_0;
    if (d(i) == 1.0) q1 += c1 * c1; else q0 += c0 * c0;
  }
  m.var_p_1 = q1 / static_cast<double>(n1);
  m.var_p_0 = q0 / static_cast<double>(n0);

  check_group_variation(m.var_p_1, m.var_p_0, overall_variance(p),
                        m.rho * (1.0 - m.rho));
  return m;
}

OlsWeights ols_weights(const GroupMoments& m) {
  const double a1 = m.rho * m.var_p_1;
  const double a0 = (1.0 - m.rho) * m.var_p_0;
  OlsWeights w;
  w.w1 = a0 / (a1 + a0);
  w.w0 = a1 / (a1 + a0);
  w.delta = m.rho - w.w1;
  w.w0_star = m.rho;
  w.delta_star = 2.0 * m.rho - 1.0;
  return w;
}

ApleComponents aple_components(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& p,
                               const Eigen::VectorXd& d) {
  if (y.size() != p.size() || y.size() != d.size()) {
    throw Error(ErrorCode::schema, "y, p and d disagree on the row count");
  }
  const Eigen::Index n = y.size();
  std::vector<Eigen::Index> treated, untreated;
  for (Eigen::Index i = 0; i < n; ++i) {
    (d(i) == 1.0 ? treated : untreated).push_back(i);
  }
  if (treated.empty() || untreated.empty()) {
    throw Error(ErrorCode::degenerate_group,
                treated.empty() ? "no treated rows" : "no untreated rows");
  }

  const double var_p = overall_variance(p);
  const double rho = static_cast<double>(treated.size()) / static_cast<double>(n);
  const double var_d = rho * (1.0 - rho);
  auto group_line = [&](const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd yg(rows.size());
    Eigen::MatrixXd zg(rows.size(), 2);
    double mean = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) mean += p(rows[i]);
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double c = p(rows[i]) - mean;
      var += c * c;
    }
    var /= static_cast<double>(rows.size());
    if (!(var_p > kSignalFloor * var_d) || var < kVarianceFloor * var_p) {
      throw Error(ErrorCode::assumption2,
                  "the propensity projection is constant within a treatment "
                  "group; the group effect line is undefined");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      yg(static_cast<Eigen::Index>(i)) = y(rows[i]);
      zg(static_cast<Eigen::Index>(i), 0) = 1.0;
      zg(static_cast<Eigen::Index>(i), 1) = p(rows[i]);
    }
    return fit_ols(yg, zg).coef;
  };

  const Eigen::VectorXd c1 = group_line(treated);
  const Eigen::VectorXd c0 = group_line(untreated);
  return {c1(0), c1(1), c0(0), c0(1)};
}

ApleEffects aple_effects(const ApleComponents& c, const GroupMoments& m,
                         double mean_p) {
  const double da = c.alpha1 - c.alpha0;
  const double dg = c.gamma1 - c.gamma0;
  return {da + dg * mean_p, da + dg * m.mean_p_1, da + dg * m.mean_p_0};
}

DiagnosticsReport diagnose(const Dataset& ds) {
  validate(ds);

  // Main regression y ~ [1, d, x]; the coefficient on d is the object the
  // rest of the report explains.
  Eigen::MatrixXd z(ds.n(), ds.n_covariates() + 2);
  z.col(0).setOnes();
  z.col(1) = ds.d;
  z.rightCols(ds.n_covariates()) = ds.x;
  auto main = fit_ols(ds.y, z);

  auto prop = propensity_lpm(ds.d, ds.x);
  auto moments = group_moments(prop.p, ds.d);
  auto weights = ols_weights(moments);
  auto components = aple_components(ds.y, prop.p, ds.d);
  auto effects = aple_effects(components, moments, prop.p.mean());

  DiagnosticsReport r;
  r.tau_ols = main.coef(1);
  r.se_tau_robust = std::sqrt(main.vcov_robust(1, 1));
  r.weights = weights;
  r.moments = moments;
  r.aple = effects.aple;
  r.aple1 = effects.aple1;
  r.aple0 = effects.aple0;
  r.components = components;
  r.n = ds.n();
  r.outcome_name = ds.outcome_name;
  r.treatment_name = ds.treatment_name;

  r.identity_residual =
      std::abs(r.tau_ols - (weights.w1 * r.aple1 + weights.w0 * r.aple0));
  if (r.identity_residual > kIdentityTol * (1.0 + std::abs(r.tau_ols))) {
    throw Error(ErrorCode::identity_broken,
                "tau_ols fails to match w1 * aple1 + w0 * aple0 (residual " +
                    std::to_string(r.identity_residual) +
                    "); the fit is numerically unreliable");
  }

  // Coefficient table in reporting order: treatment, covariates, intercept.
  const Eigen::Index kk = main.coef.size();
  Eigen::VectorXd se = main.vcov_robust.diagonal().array().sqrt();
  r.main_fit.names.push_back(ds.treatment_name);
  for (const auto& c : ds.covariate_names) r.main_fit.names.push_back(c);
  r.main_fit.names.push_back("(intercept)");
  r.main_fit.coef.resize(kk);
  r.main_fit.se_robust.resize(kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    const Eigen::Index src = j + 1 < kk ? j + 1 : 0;
    r.main_fit.coef(j) = main.coef(src);
    r.main_fit.se_robust(j) = se(src);
  }
  return r;
}

BiasDecomposition decompose_bias(const DiagnosticsReport& r, BiasTarget t) {
  BiasDecomposition b;
  b.target = t;
  b.gap = r.aple0 - r.aple1;
  if (t == BiasTarget::ate) {
    b.target_value = r.aple;
    b.multiplier = r.weights.delta;
  } else {
    b.target_value = r.aple1;
    b.multiplier = r.weights.w0;
  }
  b.bias = b.multiplier * b.gap;
  return b;
}

double diff_in_means_check(const Eigen::VectorXd& y, const Eigen::VectorXd& d,
                           const ApleComponents& c, const GroupMoments& m,
                           const OlsWeights& w) {
  if (y.size() != d.size()) {
    throw Error(ErrorCode::schema, "y and d disagree on the row count");
  }
  double s1 = 0.0, s0 = 0.0;
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (d(i) == 1.0) { s1 += y(i); ++n1; } else { s0 += y(i); }
  }
  const Eigen::Index n0 = y.size() - n1;
  if (n1 == 0 || n0 == 0) {
    throw Error(ErrorCode::degenerate_group,
                n1 == 0 ? "no treated rows" : "no untreated rows");
  }
  const double raw = s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
  return raw - (w.w0 * c.gamma1 + w.w1 * c.gamma0) * (m.mean_p_1 - m.mean_p_0);
}

}  // namespace hetdiag
