#include <cmath>
#include <set>

#include "doctest.h"
#include "gibbsdc/geometry.hpp"
#include "gibbsdc/rng.hpp"

using namespace gibbsdc;

TEST_SUITE("rng") {
  TEST_CASE("identical keys give identical streams") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a(), y = b(), z = c();
      CHECK(x == y);
      differs |= x != z;
    }
    CHECK(differs);
  }

  TEST_CASE("uniform stays in the open unit interval") {
    RngStream r(1, 2);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  }

  TEST_CASE("poisson moments in both regimes") {
    for (double mean : {0.7, 5.0, 80.0}) {
      RngStream r(3, static_cast<std::uint64_t>(mean * 10));
      const int n = 40000;
      double s = 0.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(r.poisson(mean));
        s += k;
        s2 += k * k;
      }
      const double m = s / n, v = s2 / n - m * m;
      CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
      CHECK(std::abs(v / mean - 1.0) < 0.06);
    }
  }

  TEST_CASE("children are distinct streams and reproducible") {
    const RngStream root(9, 1);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t t = 0; t < 50; ++t) {
      RngStream c = root.child(t), d = root.child(t);
      const auto x = c();
      CHECK(x == d());
      firsts.insert(x);
    }
    CHECK(firsts.size() == 50);
  }

  TEST_CASE("hash_point depends on exact coordinates and mark") {
    CHECK(hash_point(Point(0.1, 0.2), 0.5) == hash_point(Point(0.1, 0.2), 0.5));
    CHECK(hash_point(Point(0.1, 0.2), 0.5) != hash_point(Point(0.1, 0.2), 0.25));
    CHECK(hash_point(Point(0.1, 0.2)) != hash_point(Point(0.2, 0.1)));
    CHECK(hash_point(Point(0.1, 0.2)) != hash_point(Point(std::nextafter(0.1, 1.0), 0.2)));
  }

  TEST_CASE("normal draws have unit variance") {
    RngStream r(5, 5);
    const int n = 50000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = r.normal();
      s += z;
      s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.03);
  }
}
