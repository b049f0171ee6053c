#pragma once

#include <Eigen/Dense>

#include "hetdiag/dataset.hpp"
#include "hetdiag/diagnostics.hpp"

namespace hetdiag {

// Regression adjustment: one outcome line per arm, fitted on the
// covariates, then averaged contrasts of the two predictions.
struct RaEstimates {
  double ate;
  double att;
  double atu;
  Eigen::VectorXd coef_treated;    // y ~ [1, x] on treated rows
  Eigen::VectorXd coef_untreated;  // y ~ [1, x] on untreated rows
};

RaEstimates regression_adjustment(const Dataset& ds);

// Weighted least squares of y on [1, d, p] with weights (1 - rho) / w0 on
// treated rows and rho / w1 on untreated rows. The coefficient on d equals
// the aple, undoing the variance weighting of the plain fit.
double wls_correction(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& d, const GroupMoments& m,
                      const OlsWeights& w);

// Convenience over the full pipeline starting from a dataset.
double wls_correction(const Dataset& ds);

// Coefficient on d in the weighted fit of y on [1, d, x] with untreated
// rows carrying weight 1/k. k = 1 reproduces the plain fit exactly.
double downweight_untreated(const Dataset& ds, double k);

}  // namespace hetdiag
