#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "acerac/rng.hpp"

using acerac::Rng;

TEST_CASE("same seed and stream reproduce, different streams differ") {
  Rng a(7, 2), b(7, 2), c(7, 3), d(8, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }
}

TEST_CASE("uniform and normal moments") {
  Rng rng(3);
  const int N = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / N == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / N) < 4.0 / std::sqrt(N));
  CHECK(sn2 / N == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("index is uniform") {
  Rng rng(4);
  const int k = 7, N = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < N; ++i) ++counts[rng.index(k)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - N / double(k)) * (c - N / double(k)) / (N / double(k));
  const boost::math::chi_squared dist(k - 1);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
  CHECK_THROWS(rng.index(0));
}
