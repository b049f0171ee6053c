#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hetdiag/dataset.hpp"
#include "hetdiag/linproj.hpp"

namespace hetdiag {

// Linear-probability projection of the treatment on [1, x]. The fitted
// values play the role of propensity scores everywhere downstream.
struct PropensityFit {
  Eigen::VectorXd p;
  Eigen::VectorXd coef;
};

// First and second moments of p within each treatment group. Variances use
// the group size as denominator; the in-sample decomposition below is exact
// only under that convention.
struct GroupMoments {
  double rho;       // share of treated rows
  double mean_p_1;
  double mean_p_0;
  double var_p_1;
  double var_p_0;
};

// The implicit weights the treatment coefficient places on the two
// group-specific effects, with the equal-variance benchmarks.
struct OlsWeights {
  double w1;
  double w0;
  double delta;       // rho - w1
  double w0_star;     // benchmark when both group variances agree: rho
  double delta_star;  // likewise: 2 rho - 1
};

// Intercepts and slopes of the group-wise projections of y on [1, p].
struct ApleComponents {
  double alpha1;
  double gamma1;
  double alpha0;
  double gamma0;
};

// Average partial linear effects: the sample analogues reported as ATE,
// ATT and ATU. Each evaluates the fitted effect line
// (alpha1 - alpha0) + (gamma1 - gamma0) * p at a different mean of p.
struct ApleEffects {
  double aple;   // at mean(p) over all rows
  double aple1;  // at mean(p) over treated rows
  double aple0;  // at mean(p) over untreated rows
};

struct CoefficientTable {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se_robust;
};

struct DiagnosticsReport {
  double tau_ols = 0.0;        // coefficient on d in y ~ [1, d, x]
  double se_tau_robust = 0.0;  // HC1 standard error of tau_ols
  OlsWeights weights;
  GroupMoments moments;
  double aple = 0.0;
  double aple1 = 0.0;
  double aple0 = 0.0;
  double identity_residual = 0.0;  // |tau_ols - (w1 aple1 + w0 aple0)|
  ApleComponents components;
  CoefficientTable main_fit;
  Eigen::Index n = 0;
  std::string outcome_name;
  std::string treatment_name;
};

enum class BiasTarget { ate, att };

// tau_ols = target_value + multiplier * gap, where gap = aple0 - aple1.
struct BiasDecomposition {
  BiasTarget target;
  double target_value;
  double multiplier;  // delta against the ATE analogue, w0 against the ATT
  double gap;
  double bias;
};

PropensityFit propensity_lpm(const Eigen::VectorXd& d, const Eigen::MatrixXd& x);

GroupMoments group_moments(const Eigen::VectorXd& p, const Eigen::VectorXd& d);

OlsWeights ols_weights(const GroupMoments& m);

ApleComponents aple_components(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& p,
                               const Eigen::VectorXd& d);

ApleEffects aple_effects(const ApleComponents& c, const GroupMoments& m,
                         double mean_p);

// Full pipeline: main fit, propensity projection, moments, weights, group
// effect lines and the exact reweighting identity check.
DiagnosticsReport diagnose(const Dataset& ds);

BiasDecomposition decompose_bias(const DiagnosticsReport& r, BiasTarget t);

// Recovers tau_ols from the raw difference in mean outcomes:
// [mean(y|d=1) - mean(y|d=0)] - (w0 gamma1 + w1 gamma0) (mean_p_1 - mean_p_0).
double diff_in_means_check(const Eigen::VectorXd& y, const Eigen::VectorXd& d,
                           const ApleComponents& c, const GroupMoments& m,
                           const OlsWeights& w);

}  // namespace hetdiag
