#include <doctest.h>

#include <cmath>

#include "octest/chi2.hpp"
#include "octest/errors.hpp"

using namespace octest;

TEST_SUITE("chi2") {

TEST_CASE("reference quantiles of the df=3 distribution") {
  CHECK(std::abs(chi2_quantile_df3(0.95) - 7.8147) < 0.001);
  CHECK(std::abs(chi2_quantile_df3(0.5) - 2.3660) < 0.001);
  CHECK(chi2_quantile_df3(1e-9) < 1e-2);  // -> 0 as prob -> 0
}

TEST_CASE("quantile inverts the CDF to contract precision") {
  for (int i = 1; i < 200; ++i) {
    const double p = i / 200.0;
    const double x = chi2_quantile_df3(p);
    CHECK(std::abs(chi2_cdf_df3(x) - p) < 1e-10);
  }
}

TEST_CASE("CDF basics") {
  CHECK(chi2_cdf_df3(0.0) == 0.0);
  CHECK(chi2_cdf_df3(-1.0) == 0.0);
  CHECK(chi2_cdf_df3(1e6) == doctest::Approx(1.0));
  // Monotone.
  double prev = 0;
  for (int i = 1; i <= 100; ++i) {
    const double v = chi2_cdf_df3(0.3 * i);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(chi2_quantile_df3(0.0), DomainError);
  CHECK_THROWS_AS(chi2_quantile_df3(1.0), DomainError);
  CHECK_THROWS_AS(chi2_quantile_df3(-0.5), DomainError);
}

}  // TEST_SUITE
