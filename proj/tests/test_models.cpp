#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gibbsdc/models.hpp"
#include "gibbsdc/rng.hpp"

using namespace gibbsdc;

namespace {

std::vector<Point> random_points(std::size_t n, std::uint64_t seed, double side) {
  RngStream r(seed, 1);
  std::vector<Point> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back(side * r.uniform(), side * r.uniform());
  return v;
}

// Pair energy of a Strauss configuration: beta times the number of pairs within r0.
double strauss_pairs(const std::vector<Point>& pts, double r0) {
  double c = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (distance(pts[i], pts[j]) <= r0) c += 1.0;
  return c;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("kappa examples") {
    const auto hs = InteractionModel::hard_sphere(1.0, 0.3);
    CHECK(hs.kappa(Point(0, 0), PointPattern(2, {Point(0.1, 0)})) == 0.0);
    CHECK(hs.kappa(Point(0, 0), PointPattern(2, {Point(0.31, 0)})) == 1.0);
    const auto st = InteractionModel::strauss(2.0, 0.3, std::log(2.0));
    CHECK(st.kappa(Point(0, 0), PointPattern(2, {Point(0.2, 0)})) == doctest::Approx(1.0));
    const auto po = InteractionModel::poisson(1.7);
    CHECK(po.kappa(Point(0, 0), PointPattern(2, {Point(0.01, 0)})) == 1.7);
    CHECK(po.kappa_max() == 1.7);
  }

  TEST_CASE("area interaction against the lens formula") {
    const double r0 = 0.3, gamma = 0.5, R = r0 / 2.0;
    const auto m = InteractionModel::area(1.0, r0, gamma);
    const double v0 = std::numbers::pi * R * R;
    const double k0 = m.kappa(Point(0, 0), PointPattern(2));
    CHECK(k0 == doctest::Approx(std::pow(gamma, -v0)).epsilon(1e-3));
    const double d = r0 / 2.0;
    const double lens = 2.0 * R * R * std::acos(d / (2.0 * R)) - 0.5 * d * std::sqrt(4.0 * R * R - d * d);
    const double k1 = m.kappa(Point(0, 0), PointPattern(2, {Point(d, 0)}));
    CHECK(k1 == doctest::Approx(std::pow(gamma, -(v0 - lens))).epsilon(1e-3));

    // Finer lattice as the grid oracle.
    auto fine = InteractionModel::area(1.0, r0, gamma, r0 / 1000.0);
    const double kf = fine.kappa(Point(0, 0), PointPattern(2, {Point(d, 0)}));
    CHECK(kf == doctest::Approx(std::pow(gamma, -(v0 - lens))).epsilon(2e-4));
    CHECK(k1 <= m.kappa_max());
    CHECK(k0 <= m.kappa_max());
  }

  TEST_CASE("kappa stays in [0, kappa_max] and is local") {
    const std::vector<InteractionModel> models = {
        InteractionModel::strauss(1.0, 0.3, 0.7), InteractionModel::hard_sphere(1.0, 0.3),
        InteractionModel::area(1.0, 0.3, 0.4), InteractionModel::poisson(1.0, 0.3)};
    for (const auto& m : models) {
      for (int t = 0; t < 30; ++t) {
        const auto pts = random_points(12, 100 + t, 1.0);
        const Point x(0.5, 0.5);
        std::vector<Point> near;
        for (const auto& p : pts)
          if (distance(p, x) <= m.r0) near.push_back(p);
        const double k = m.kappa(x, PointPattern(2, pts));
        CHECK(k >= 0.0);
        CHECK(k <= m.kappa_max());
        CHECK(k == m.kappa(x, PointPattern(2, near)));
      }
    }
  }

  TEST_CASE("repulsive models are monotone under additions") {
    for (const auto& m : {InteractionModel::strauss(1.0, 0.3, 0.7), InteractionModel::hard_sphere(1.0, 0.3)}) {
      auto pts = random_points(8, 7, 0.8);
      for (std::size_t n = 0; n < pts.size(); ++n) {
        std::vector<Point> a(pts.begin(), pts.begin() + static_cast<long>(n));
        std::vector<Point> b(pts.begin(), pts.begin() + static_cast<long>(n + 1));
        CHECK(m.kappa(Point(0.4, 0.4), PointPattern(2, b)) <= m.kappa(Point(0.4, 0.4), PointPattern(2, a)));
      }
    }
  }

  TEST_CASE("configuration density") {
    const auto po = InteractionModel::poisson(1.5);
    CHECK(configuration_density(po, PointPattern(2, random_points(4, 1, 1.0)), PointPattern(2)) ==
          doctest::Approx(std::pow(1.5, 4)));
    const auto hs = InteractionModel::hard_sphere(1.0, 0.3);
    CHECK(configuration_density(hs, PointPattern(2, {Point(0, 0), Point(0.2, 0)}), PointPattern(2)) == 0.0);

    const auto st = InteractionModel::strauss(1.2, 0.3, 0.8);
    const std::vector<Point> phi = {Point(0, 0), Point(0.2, 0.1), Point(0.35, 0.2)};
    const std::vector<Point> psi = {Point(-0.25, 0.0), Point(0.5, 0.4)};
    std::vector<Point> all = phi;
    all.insert(all.end(), psi.begin(), psi.end());
    const double oracle = std::pow(1.2, 3) * std::exp(-0.8 * (strauss_pairs(all, 0.3) - strauss_pairs(psi, 0.3)));
    CHECK(configuration_density(st, PointPattern(2, phi), PointPattern(2, psi)) == doctest::Approx(oracle));
  }

  TEST_CASE("configuration density does not depend on enumeration order") {
    for (const auto& m : {InteractionModel::strauss(1.0, 0.3, 0.7), InteractionModel::area(1.0, 0.3, 0.4)}) {
      auto pts = random_points(6, 77, 0.6);
      const double ref = configuration_density(m, PointPattern(2, pts), PointPattern(2));
      for (int t = 0; t < 10; ++t) {
        std::rotate(pts.begin(), pts.begin() + 1, pts.end());
        if (t % 3 == 0) std::swap(pts[0], pts[3]);
        const double v = configuration_density(m, PointPattern(2, pts), PointPattern(2));
        if (m.kind == ModelKind::area_interaction)
          CHECK(v == ref);
        else
          CHECK(std::abs(v - ref) <= 1e-12 * ref);
      }
    }
  }

  TEST_CASE("validation names the field") {
    auto bad = InteractionModel::strauss(1.0, -1.0, 0.5);
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("r0"), std::invalid_argument);
    auto g = InteractionModel::area(1.0, 0.3, 0.0);
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("gamma"), std::invalid_argument);
    CHECK(parse_model_kind("hard_sphere") == ModelKind::hard_sphere);
    CHECK_THROWS(parse_model_kind("ising"));
  }
}
