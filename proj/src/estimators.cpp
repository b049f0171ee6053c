#include "hetdiag/estimators.hpp"

#include <cmath>
#include <string>

#include "hetdiag/linproj.hpp"

namespace hetdiag {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

}  // namespace

RaEstimates regression_adjustment(const Dataset& ds) {
  validate(ds);
  const Eigen::Index n = ds.n();
  const Eigen::Index n1 = ds.n_treated();
  const Eigen::Index n0 = n - n1;

  Eigen::MatrixXd z = with_intercept(ds.x);
  Eigen::MatrixXd z1(n1, z.cols()), z0(n0, z.cols());
  Eigen::VectorXd y1(n1), y0(n0);
  for (Eigen::Index i = 0, i1 = 0, i0 = 0; i < n; ++i) {
    if (ds.d(i) == 1.0) {
      z1.row(i1) = z.row(i);
      y1(i1++) = ds.y(i);
    } else {
      z0.row(i0) = z.row(i);
      y0(i0++) = ds.y(i);
    }
  }

  RaEstimates ra;
  ra.coef_treated = fit_ols(y1, z1).coef;
  ra.coef_untreated = fit_ols(y0, z0).coef;

  // Predicted effect for every row under either arm, then group averages.
  Eigen::VectorXd te = z * (ra.coef_treated - ra.coef_untreated);
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    (ds.d(i) == 1.0 ? s1 : s0) += te(i);
  }
  ra.att = s1 / static_cast<double>(n1);
  ra.atu = s0 / static_cast<double>(n0);
  const double rho = static_cast<double>(n1) / static_cast<double>(n);
  ra.ate = rho * ra.att + (1.0 - rho) * ra.atu;
  return ra;
}

double wls_correction(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& d, const GroupMoments& m,
                      const OlsWeights& w) {
  if (y.size() != p.size() || y.size() != d.size()) {
    throw Error(ErrorCode::schema, "y, p and d disagree on the row count");
  }
  const Eigen::Index n = y.size();
  const double w_treated = (1.0 - m.rho) / w.w0;
  const double w_untreated = m.rho / w.w1;
  Eigen::VectorXd wt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    wt(i) = d(i) == 1.0 ? w_treated : w_untreated;
  }
  Eigen::MatrixXd z(n, 3);
  z.col(0).setOnes();
  z.col(1) = d;
  z.col(2) = p;
  return fit_wls(y, z, wt).coef(1);
}

double wls_correction(const Dataset& ds) {
  validate(ds);
  auto prop = propensity_lpm(ds.d, ds.x);
  auto m = group_moments(prop.p, ds.d);
  auto w = ols_weights(m);
  return wls_correction(ds.y, prop.p, ds.d, m, w);
}

double downweight_untreated(const Dataset& ds, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::bad_config,
                "downweighting factor k must be positive, got " +
                    std::to_string(k));
  }
  validate(ds);
  const Eigen::Index n = ds.n();
  Eigen::MatrixXd z(n, ds.n_covariates() + 2);
  z.col(0).setOnes();
  z.col(1) = ds.d;
  z.rightCols(ds.n_covariates()) = ds.x;
  Eigen::VectorXd wt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    wt(i) = ds.d(i) == 1.0 ? 1.0 : 1.0 / k;
  }
  return fit_wls(ds.y, z, wt).coef(1);
}

}  // namespace hetdiag
