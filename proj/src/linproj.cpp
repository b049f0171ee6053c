#include "hetdiag/linproj.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetdiag {

namespace {

// Numerical rank cutoff, relative to the largest column norm of the
// (possibly row-scaled) design.
constexpr double kRankTol = 1e-10;

// HC1: (n/(n-k)) (Z'Z)^-1 Z' diag(r^2) Z (Z'Z)^-1, computed from the QR
// factorization Z P = Q R so the cross-product is never formed directly:
// (Z'Z)^-1 = P R^-1 R^-T P'.
Eigen::MatrixXd sandwich_hc1(
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
    const Eigen::MatrixXd& z, const Eigen::VectorXd& r) {
  const Eigen::Index n = z.rows();
  const Eigen::Index k = z.cols();
  Eigen::MatrixXd rinv =
      qr.matrixR()
          .topLeftCorner(k, k)
          .triangularView<Eigen::Upper>()
          .solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd bread = qr.colsPermutation() * (rinv * rinv.transpose()) *
                          qr.colsPermutation().transpose();
  Eigen::MatrixXd meat =
      z.transpose() * (z.array().colwise() * r.array().square()).matrix();
  const double scale =
      n > k ? static_cast<double>(n) / static_cast<double>(n - k) : 0.0;
  Eigen::MatrixXd v = scale * bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

ProjectionFit solve_least_squares(const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& z,
                                  const Eigen::VectorXd* w) {
  if (y.size() != z.rows()) {
    throw Error(ErrorCode::schema, "response and design row counts differ");
  }
  if (z.cols() == 0) {
    throw Error(ErrorCode::schema, "design matrix has no columns");
  }

  const Eigen::Index n = z.rows();
  const Eigen::Index k = z.cols();

  Eigen::MatrixXd zs;
  Eigen::VectorXd ys;
  if (w != nullptr) {
    Eigen::VectorXd sw = w->array().sqrt();
    zs = sw.asDiagonal() * z;
    ys = sw.asDiagonal() * y;
  } else {
    zs = z;
    ys = y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zs);
  qr.setThreshold(kRankTol);
  if (qr.rank() < k) {
    // The trailing pivot positions are the columns the factorization could
    // not separate from the span of the earlier ones.
    std::vector<std::ptrdiff_t> bad;
    const auto& piv = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < k; ++i) bad.push_back(piv(i));
    std::sort(bad.begin(), bad.end());
    std::string which;
    for (auto c : bad) which += (which.empty() ? "" : ", ") + std::to_string(c);
    throw RankError("design matrix is rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " +
                        std::to_string(k) + "; dependent columns: " + which +
                        ")",
                    std::move(bad));
  }

  ProjectionFit fit;
  fit.coef = qr.solve(ys);
  fit.fitted = z * fit.coef;
  fit.residuals = y - fit.fitted;
  fit.n = n;
  fit.k = k;
  fit.design = z;
  if (w != nullptr) fit.weights = *w;

  // Robust covariance on the row-scaled problem; for weighted fits this is
  // the sandwich of the transformed regression.
  Eigen::VectorXd rs = ys - zs * fit.coef;
  fit.vcov_robust = sandwich_hc1(qr, zs, rs);
  return fit;
}

}  // namespace

ProjectionFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
  return solve_least_squares(y, z, nullptr);
}

ProjectionFit fit_wls(const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                      const Eigen::VectorXd& w) {
  if (w.size() != z.rows()) {
    throw Error(ErrorCode::schema, "weight and design row counts differ");
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw Error(ErrorCode::nonpositive_weight,
                  "weight " + std::to_string(w(i)) + " at row " +
                      std::to_string(i) + " is not a positive finite number");
    }
  }
  return solve_least_squares(y, z, &w);
}

Eigen::MatrixXd hc1_vcov(const ProjectionFit& fit) {
  if (fit.design.rows() != fit.n || fit.residuals.size() != fit.n) {
    throw Error(ErrorCode::schema, "fit does not carry design and residuals");
  }
  Eigen::MatrixXd zs = fit.design;
  Eigen::VectorXd rs = fit.residuals;
  if (fit.weights.size() == fit.n) {
    Eigen::VectorXd sw = fit.weights.array().sqrt();
    zs = sw.asDiagonal() * zs;
    rs = sw.asDiagonal() * rs;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zs);
  qr.setThreshold(kRankTol);
  return sandwich_hc1(qr, zs, rs);
}

}  // namespace hetdiag
