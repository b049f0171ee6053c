#pragma once

#include <Eigen/Dense>

#include "hetdiag/errors.hpp"

namespace hetdiag {

// Result of a least-squares projection. The design matrix is retained so
// the robust covariance can be recomputed or audited after the fact.
struct ProjectionFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd vcov_robust;  // HC1 sandwich, symmetric PSD
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  Eigen::MatrixXd design;
  Eigen::VectorXd weights;  // empty for unweighted fits
};

// Least squares of y on z via column-pivoted QR. No intercept is added;
// callers construct the design explicitly. Throws RankError when the
// numerical rank of z falls below z.cols().
ProjectionFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& z);

// Weighted least squares minimizing sum_i w_i (y_i - z_i b)^2 with strictly
// positive finite weights, one per row.
ProjectionFit fit_wls(const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                      const Eigen::VectorXd& w);

// Heteroskedasticity-robust covariance with the n/(n-k) small-sample
// scaling. Recomputes from the retained design and residuals; fits carry
// the same matrix in vcov_robust.
Eigen::MatrixXd hc1_vcov(const ProjectionFit& fit);

}  // namespace hetdiag
