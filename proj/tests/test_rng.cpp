#include <doctest.h>

#include <cmath>
#include <vector>

#include "hessmc/rng.hpp"

using namespace hessmc;

TEST_SUITE_BEGIN("rng");

TEST_CASE("inverse normal cdf hits known quantiles") {
  using detail::inv_normal_cdf;
  CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0));
  CHECK(inv_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inv_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(inv_normal_cdf(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-10));
  // round trip through erfc
  for (double z : {-3.7, -1.2, 0.3, 2.9}) {
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(inv_normal_cdf(p) == doctest::Approx(z).epsilon(1e-10));
  }
}

TEST_CASE("streams are deterministic and distinct") {
  GaussianStream a(SeedSpec{42, 0});
  GaussianStream b(SeedSpec{42, 0});
  GaussianStream c(SeedSpec{42, 1});
  GaussianStream d(SeedSpec{43, 0});
  CHECK(a.normal(7, 11) == b.normal(7, 11));
  CHECK(a.normal(7, 11) != c.normal(7, 11));
  CHECK(a.normal(7, 11) != d.normal(7, 11));
  CHECK(a.normal(7, 11) != a.normal(7, 12));
  CHECK(a.normal(7, 11) != a.normal(8, 11));
}

TEST_CASE("moments of a large sample") {
  GaussianStream g(SeedSpec{2024, 3});
  const long n = 400000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = g.normal(i / 1000, i % 1000);
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  s1 /= n;
  s2 /= n;
  s3 /= n;
  s4 /= n;
  CHECK(std::fabs(s1) < 3.0 / std::sqrt((double)n));
  CHECK(s2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::fabs(s3) < 3.0 * std::sqrt(15.0 / n));
  CHECK(s4 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_SUITE_END();
