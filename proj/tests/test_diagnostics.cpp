#include <doctest.h>

#include <random>

#include "hetdiag/diagnostics.hpp"
#include "helpers.hpp"

using namespace hetdiag;

TEST_CASE("toy fixture: propensity projection hits the stratum shares") {
  auto ds = testutil::toy8();
  auto prop = propensity_lpm(ds.d, ds.x);
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double want = ds.x(i, 0) == 0.0 ? 0.25 : 0.75;
    CHECK(prop.p(i) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(prop.p.mean() == doctest::Approx(ds.d.mean()).epsilon(1e-12));
}

TEST_CASE("toy fixture: moments, weights, components, effects") {
  auto ds = testutil::toy8();
  auto prop = propensity_lpm(ds.d, ds.x);
  auto m = group_moments(prop.p, ds.d);
  CHECK(m.rho == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.mean_p_1 == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(m.mean_p_0 == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(m.var_p_1 == doctest::Approx(0.046875).epsilon(1e-12));
  CHECK(m.var_p_0 == doctest::Approx(0.046875).epsilon(1e-12));

  auto w = ols_weights(m);
  CHECK(w.w1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.w0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.delta == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.w0_star == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.delta_star == doctest::Approx(0.0).epsilon(1e-12));

  auto c = aple_components(ds.y, prop.p, ds.d);
  CHECK(c.alpha1 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c.gamma1 == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(c.alpha0 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(c.gamma0 == doctest::Approx(0.0).epsilon(1e-10));

  auto e = aple_effects(c, m, prop.p.mean());
  CHECK(e.aple == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(e.aple1 == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(e.aple0 == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("toy fixture: full report and bias decomposition") {
  auto ds = testutil::toy8();
  auto r = diagnose(ds);
  CHECK(r.tau_ols == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.aple == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.identity_residual < 1e-10);
  CHECK(r.n == 8);

  auto ate = decompose_bias(r, BiasTarget::ate);
  CHECK(ate.multiplier == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ate.gap == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(ate.bias == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(r.tau_ols ==
        doctest::Approx(ate.target_value + ate.bias).epsilon(1e-10));

  auto att = decompose_bias(r, BiasTarget::att);
  CHECK(att.multiplier == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(att.target_value == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(r.tau_ols ==
        doctest::Approx(att.target_value + att.bias).epsilon(1e-10));
}

TEST_CASE("toy fixture: difference in means minus the correction term") {
  auto ds = testutil::toy8();
  auto prop = propensity_lpm(ds.d, ds.x);
  auto m = group_moments(prop.p, ds.d);
  auto w = ols_weights(m);
  auto c = aple_components(ds.y, prop.p, ds.d);
  // Raw gap is 3.5; the correction removes the selection-on-p part.
  CHECK(diff_in_means_check(ds.y, ds.d, c, m, w) ==
        doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("aple mixes as rho aple1 + (1-rho) aple0") {
  auto ds = testutil::random_continuous(21, 300, 2);
  auto prop = propensity_lpm(ds.d, ds.x);
  auto m = group_moments(prop.p, ds.d);
  auto c = aple_components(ds.y, prop.p, ds.d);
  auto e = aple_effects(c, m, prop.p.mean());
  CHECK(e.aple ==
        doctest::Approx(m.rho * e.aple1 + (1.0 - m.rho) * e.aple0)
            .epsilon(1e-10));
}

TEST_CASE("reweighting identity holds on random continuous designs") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto ds = testutil::random_continuous(seed, 500, 3);
    auto r = diagnose(ds);
    CHECK(r.identity_residual <= 1e-8 * (1.0 + std::abs(r.tau_ols)));
    CHECK(r.weights.w1 > 0.0);
    CHECK(r.weights.w1 < 1.0);
    CHECK(r.weights.w0 == doctest::Approx(1.0 - r.weights.w1).epsilon(1e-12));
    CHECK(r.weights.delta > -1.0);
    CHECK(r.weights.delta < 1.0);
  }
}

TEST_CASE("equal group variances collapse the weights to the benchmarks") {
  // 16 rows over two strata: shares 10/6, within-stratum treated counts 1/3.
  // Both group variances of p equal 0.03 while rho = 0.25.
  Eigen::VectorXd y(16), d(16);
  Eigen::MatrixXd x(16, 1);
  for (Eigen::Index i = 0; i < 16; ++i) {
    const bool b = i >= 10;
    x(i, 0) = b ? 1.0 : 0.0;
    d(i) = (i == 0 || (b && i <= 12)) ? 1.0 : 0.0;
    y(i) = 2.0 * d(i) + 3.0 * x(i, 0) + static_cast<double>(i % 3);
  }
  auto ds = make_dataset(y, d, x);
  auto prop = propensity_lpm(ds.d, ds.x);
  auto m = group_moments(prop.p, ds.d);
  CHECK(m.rho == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.var_p_1 == doctest::Approx(0.03).epsilon(1e-10));
  CHECK(m.var_p_0 == doctest::Approx(0.03).epsilon(1e-10));
  auto w = ols_weights(m);
  CHECK(w.w0 == doctest::Approx(w.w0_star).epsilon(1e-10));
  CHECK(w.delta == doctest::Approx(w.delta_star).epsilon(1e-10));
  CHECK(w.w0 == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(w.delta == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("homogeneous effects make all three analogues agree") {
  // A constant treatment shift on top of an outcome that depends on the
  // covariates only through the treatment projection, so both group effect
  // lines are exact and the analogues collapse to the shift.
  auto base = testutil::random_continuous(22, 400, 2);
  auto prop = propensity_lpm(base.d, base.x);
  Eigen::VectorXd y =
      (1.0 + 2.0 * base.d.array() + 3.0 * prop.p.array()).matrix();
  auto ds = make_dataset(y, base.d, base.x);
  auto r = diagnose(ds);
  CHECK(r.tau_ols == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.aple == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.aple1 == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.aple0 == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("shared slope and intercept zero out the components gap") {
  auto base = testutil::random_continuous(23, 300, 2);
  auto prop = propensity_lpm(base.d, base.x);
  Eigen::VectorXd y = 0.5 + 3.0 * prop.p.array();  // same line in both arms
  auto c = aple_components(y, prop.p, base.d);
  CHECK(c.alpha1 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(c.alpha0 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(c.gamma1 == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(c.gamma0 == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("zero outcome zeroes every component") {
  auto base = testutil::random_continuous(24, 200, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(base.n());
  auto prop = propensity_lpm(base.d, base.x);
  auto c = aple_components(y, prop.p, base.d);
  CHECK(c.alpha1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.gamma1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.alpha0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.gamma0 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("covariates orthogonal to treatment fail the variation check") {
  // A constant-ish covariate gives the propensity projection no signal, so
  // p collapses to a single value and the within-group variances vanish.
  Eigen::VectorXd y(8), d(8);
  Eigen::MatrixXd x(8, 1);
  y << 1, 2, 3, 4, 5, 6, 7, 8;
  d << 1, 0, 1, 0, 1, 0, 1, 0;
  x << 1, 1, 2, 2, 3, 3, 4, 4;  // same distribution in both arms
  auto ds = make_dataset(y, d, x);
  auto prop = propensity_lpm(ds.d, ds.x);
  try {
    group_moments(prop.p, ds.d);
    FAIL("expected an assumption failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::assumption2);
  }
  CHECK_THROWS_AS(diagnose(ds), Error);
}

TEST_CASE("group moments reject one-arm data") {
  Eigen::VectorXd p(4), d(4);
  p << 0.1, 0.2, 0.3, 0.4;
  d << 1, 1, 1, 1;
  CHECK_THROWS_AS(group_moments(p, d), Error);
}

TEST_CASE("outcome rescaling scales effects and leaves weights alone") {
  auto ds = testutil::random_continuous(25, 400, 2);
  auto r1 = diagnose(ds);
  Eigen::VectorXd y2 = 10.0 * ds.y;
  auto ds2 = make_dataset(y2, ds.d, ds.x);
  auto r2 = diagnose(ds2);
  CHECK(r2.tau_ols == doctest::Approx(10.0 * r1.tau_ols).epsilon(1e-10));
  CHECK(r2.aple1 == doctest::Approx(10.0 * r1.aple1).epsilon(1e-10));
  CHECK(r2.weights.w1 == doctest::Approx(r1.weights.w1).epsilon(1e-12));
  CHECK(r2.weights.delta == doctest::Approx(r1.weights.delta).epsilon(1e-12));
}

TEST_CASE("affine covariate rescaling changes nothing") {
  auto ds = testutil::random_continuous(26, 400, 3);
  auto r1 = diagnose(ds);
  Eigen::MatrixXd x2 = ds.x;
  x2.col(0) = 100.0 * ds.x.col(0).array() - 7.0;
  x2.col(2) = -0.01 * ds.x.col(2).array() + 3.0;
  auto ds2 = make_dataset(ds.y, ds.d, x2);
  auto r2 = diagnose(ds2);
  CHECK(r2.tau_ols == doctest::Approx(r1.tau_ols).epsilon(1e-8));
  CHECK(r2.weights.w1 == doctest::Approx(r1.weights.w1).epsilon(1e-8));
  CHECK(r2.aple == doctest::Approx(r1.aple).epsilon(1e-8));
  CHECK(r2.aple0 == doctest::Approx(r1.aple0).epsilon(1e-8));
}

TEST_CASE("row order does not matter") {
  auto ds = testutil::toy8();
  std::vector<Eigen::Index> perm{7, 2, 5, 0, 3, 6, 1, 4};
  auto shuffled = take_rows(ds, perm);
  auto a = diagnose(ds);
  auto b = diagnose(shuffled);
  CHECK(a.tau_ols == doctest::Approx(b.tau_ols).epsilon(1e-12));
  CHECK(a.weights.w1 == doctest::Approx(b.weights.w1).epsilon(1e-12));
  CHECK(a.aple0 == doctest::Approx(b.aple0).epsilon(1e-12));
}
