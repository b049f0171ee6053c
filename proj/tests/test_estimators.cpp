#include <doctest.h>

#include <cmath>

#include "hetdiag/estimators.hpp"
#include "hetdiag/linproj.hpp"
#include "hetdiag/oracle.hpp"
#include "helpers.hpp"

using namespace hetdiag;

TEST_CASE("toy fixture: regression adjustment recovers the stratum gaps") {
  auto ds = testutil::toy8();
  auto ra = regression_adjustment(ds);
  CHECK(ra.att == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(ra.atu == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(ra.ate == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("adjustment estimates mix as rho att + (1-rho) atu") {
  for (std::uint64_t seed : {31, 32, 33}) {
    auto ds = testutil::random_continuous(seed, 350, 3);
    auto ra = regression_adjustment(ds);
    const double rho = ds.d.mean();
    CHECK(ra.ate ==
          doctest::Approx(rho * ra.att + (1.0 - rho) * ra.atu).epsilon(1e-10));
  }
}

TEST_CASE("exactly linear homogeneous outcomes are recovered exactly") {
  auto base = testutil::random_continuous(34, 300, 2);
  Eigen::VectorXd y(base.n());
  for (Eigen::Index i = 0; i < base.n(); ++i) {
    y(i) = 2.0 - 1.5 * base.d(i) + base.x(i, 0) + 0.25 * base.x(i, 1);
  }
  auto ds = make_dataset(y, base.d, base.x);
  auto ra = regression_adjustment(ds);
  CHECK(ra.ate == doctest::Approx(-1.5).epsilon(1e-9));
  CHECK(ra.att == doctest::Approx(-1.5).epsilon(1e-9));
  CHECK(ra.atu == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("on saturated designs adjustment equals stratum-mean contrasts") {
  for (std::uint64_t seed : {35, 36, 37, 38}) {
    auto cfg = testutil::random_saturated_config(seed);
    cfg.exact_counts = true;  // keeps both arms present in every stratum
    auto draw = synth_dgp(cfg, seed);
    auto ra = regression_adjustment(draw.data);

    // Brute force: per-stratum arm means, weighted by arm row counts.
    auto table = empirical_strata(draw.data.y, draw.data.d, draw.stratum);
    double att = 0.0, atu = 0.0, w1 = 0.0, w0 = 0.0;
    const double n = static_cast<double>(draw.data.n());
    for (const auto& cell : table.cells) {
      REQUIRE(cell.defined);
      const double n1 = cell.share * n * cell.treated_share;
      const double n0 = cell.share * n * (1.0 - cell.treated_share);
      att += n1 * cell.contrast;
      atu += n0 * cell.contrast;
      w1 += n1;
      w0 += n0;
    }
    att /= w1;
    atu /= w0;
    CHECK(ra.att == doctest::Approx(att).epsilon(1e-8));
    CHECK(ra.atu == doctest::Approx(atu).epsilon(1e-8));
  }
}

TEST_CASE("toy fixture: weighted correction returns the overall analogue") {
  auto ds = testutil::toy8();
  CHECK(wls_correction(ds) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("weighted correction equals the aple on random designs") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    auto ds = testutil::random_continuous(seed, 400, 3);
    auto prop = propensity_lpm(ds.d, ds.x);
    auto m = group_moments(prop.p, ds.d);
    auto w = ols_weights(m);
    auto c = aple_components(ds.y, prop.p, ds.d);
    auto e = aple_effects(c, m, prop.p.mean());
    const double tau_w = wls_correction(ds.y, prop.p, ds.d, m, w);
    CHECK(tau_w ==
          doctest::Approx(e.aple).epsilon(1e-8));
  }
}

TEST_CASE("downweighting with k = 1 is exactly the plain fit") {
  auto ds = testutil::toy8();
  Eigen::MatrixXd z(ds.n(), 3);
  z.col(0).setOnes();
  z.col(1) = ds.d;
  z.col(2) = ds.x.col(0);
  const double plain = fit_ols(ds.y, z).coef(1);
  CHECK(downweight_untreated(ds, 1.0) == plain);
}

TEST_CASE("downweighting leaves exactly homogeneous data unchanged") {
  auto base = testutil::random_continuous(39, 250, 2);
  Eigen::VectorXd y(base.n());
  for (Eigen::Index i = 0; i < base.n(); ++i) {
    y(i) = 1.0 + 2.0 * base.d(i) + 3.0 * base.x(i, 0) + base.x(i, 1);
  }
  auto ds = make_dataset(y, base.d, base.x);
  for (double k : {1.0, 2.0, 5.0, 10.0, 50.0}) {
    CHECK(downweight_untreated(ds, k) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("downweighting moves continuously in k") {
  auto ds = testutil::random_continuous(40, 300, 2);
  const double at2 = downweight_untreated(ds, 2.0);
  const double nearby = downweight_untreated(ds, 2.0 + 1e-7);
  CHECK(std::abs(nearby - at2) <= 1e-5 * (1.0 + std::abs(at2)));
}

TEST_CASE("nonpositive k is rejected") {
  auto ds = testutil::toy8();
  CHECK_THROWS_AS(downweight_untreated(ds, 0.0), Error);
  CHECK_THROWS_AS(downweight_untreated(ds, -2.0), Error);
  CHECK_THROWS_AS(downweight_untreated(ds, std::nan("")), Error);
}
