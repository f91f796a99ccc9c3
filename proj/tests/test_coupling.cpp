#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gibbsdc/coupling.hpp"
#include "gibbsdc/harness.hpp"
#include "gibbsdc/percolation.hpp"

using namespace gibbsdc;

namespace {

const OrderMap kRadial = OrderMap::distance_to(Point());

PointPattern carrier_for(const Region& q, double kmax, std::uint64_t seed) {
  RngStream r(seed, 17);
  return sample_marked_poisson(q, kmax, r, 2);
}

}  // namespace

TEST_SUITE("coupling") {
  TEST_CASE("anchor lattice and order") {
    const auto g = GridAnchor::for_range(0.3, 2);
    CHECK(g.delta == doctest::Approx(0.3 / (2.0 * std::sqrt(2.0))));
    // Q_{2 delta} fits in B_{r0}.
    CHECK(std::sqrt(2.0) * g.delta <= 0.3 + 1e-15);
    CHECK(g.precedes(Point(1.0, 0.0), Point(0.5, 0.5)));
    CHECK(g.precedes(Point(-1.0, 0.0), Point(1.0, 0.0)));
    const auto anchors = g.enumerate(Box{Point(-1, -1), Point(1, 1)}, 0.3);
    for (std::size_t i = 1; i < anchors.size(); ++i) CHECK_FALSE(g.precedes(anchors[i], anchors[i - 1]));
    // Every point of the box is within r0 of an anchor.
    RngStream r(1, 1);
    for (int t = 0; t < 200; ++t) {
      const Point p(r.uniform(-1, 1), r.uniform(-1, 1));
      double best = 1e9;
      for (const auto& a : anchors) best = std::min(best, distance(a, p));
      CHECK(best <= 0.3);
    }
  }

  TEST_CASE("identical boundaries give identical outputs") {
    const auto m = InteractionModel::hard_sphere(1.0, 0.3);
    const Region q = Region::cube(3.0, 2);
    const Region b = Region::box(Point(1.5, -0.5), Point(2.5, 0.5), 2);
    const auto psi = lattice_in_box(Box{Point(1.5, -0.5), Point(2.5, 0.5)}, 0.15, 2);
    for (int i = 0; i < 10; ++i) {
      const auto carrier = carrier_for(q, 1.0, static_cast<std::uint64_t>(i));
      const RngStream keys(3, static_cast<std::uint64_t>(i));
      const auto c = cluster_coupling(m, q, b, psi, psi, carrier, kRadial, RetentionMode::exact(), keys);
      CHECK(same_points(c.out_psi, c.out_psi_prime));
      CHECK(c.disagreement.empty());
      const auto r = radial_coupling_pair(m, q, b, psi, psi, carrier, GridAnchor::for_range(0.3, 2),
                                          RetentionMode::exact(), keys);
      CHECK(same_points(r.out_psi, r.out_psi_prime));
    }
  }

  TEST_CASE("empty carrier sweeps the window with full steps") {
    const auto m = InteractionModel::strauss(1.0, 0.3, 1.0);
    const Region q = Region::cube(2.0, 2);
    const auto res = radial_coupling(m, q, Region::nothing(2), PointPattern(2), PointPattern::marked(2),
                                     GridAnchor::for_range(0.3, 2), RetentionMode::exact(), RngStream(1, 1));
    CHECK(res.outputs[0].empty());
    CHECK_FALSE(res.state.steps.empty());
    for (const auto& s : res.state.steps) {
      CHECK(s.candidate == -1);
      CHECK(s.rho == doctest::Approx(0.3));
    }
  }

  TEST_CASE("radial steps decide at most one carrier point within range") {
    const auto m = InteractionModel::hard_sphere(1.0, 0.3);
    const Region q = Region::cube(4.0, 2);
    const Region b = Region::box(Point(2.0, -0.5), Point(3.0, 0.5), 2);
    const auto carrier = carrier_for(q, 1.0, 5);
    const auto res = radial_coupling(m, q, b, PointPattern(2), carrier, GridAnchor::for_range(0.3, 2),
                                     RetentionMode::exact(), RngStream(2, 2));
    std::size_t decided = 0;
    for (const auto& s : res.state.steps) {
      CHECK(s.rho <= 0.3 + 1e-15);
      if (s.candidate >= 0) {
        ++decided;
        CHECK(distance(s.v, carrier[static_cast<std::size_t>(s.candidate)]) == doctest::Approx(s.rho));
      }
    }
    CHECK(decided == carrier.size());
    CHECK(res.state.decided == carrier.size());
  }

  TEST_CASE("disagreement stays in clusters touching B") {
    const Box bb{Point(2.0, -0.5), Point(3.0, 0.5)};
    for (const auto& m : {InteractionModel::hard_sphere(1.0, 0.3), InteractionModel::strauss(1.0, 0.3, 1.0)}) {
      for (auto algo : {CouplingAlgo::radial, CouplingAlgo::cluster}) {
        const auto e = coupling_experiment(m, algo, 4.0, bb, 40, 9);
        CHECK(e.violations == 0);
        for (const auto& row : e.rows)
          if (!row.cluster.agrees) CHECK(row.cluster.touches_b);
      }
    }
  }

  TEST_CASE("coupled outputs have the Gibbs law on a tiny window") {
    // Hard-sphere law on [0, 0.3]^2 with r0 = 0.3, alpha0 = 30 (see the sampler suite).
    const double area = 0.09, i2 = area * area * (1.0 - (std::numbers::pi - 13.0 / 6.0));
    const double t[3] = {1.0, 30.0 * area, 900.0 * i2 / 2.0};
    const double z = t[0] + t[1] + t[2];
    const auto m = InteractionModel::hard_sphere(30.0, 0.3);
    const Region q = Region::box(Point(0, 0), Point(0.3, 0.3), 2);
    const Region b = Region::box(Point(5, 5), Point(6, 6), 2);
    const int n = 8000;
    std::vector<double> radial(3, 0.0), cluster(3, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto carrier = carrier_for(q, 30.0, 1000 + static_cast<std::uint64_t>(i));
      const RngStream keys(4, static_cast<std::uint64_t>(i));
      const auto r = radial_coupling(m, q, b, PointPattern(2), carrier, GridAnchor::for_range(0.3, 2),
                                     RetentionMode::exact(), keys);
      radial[std::min<std::size_t>(r.outputs[0].size(), 2)] += 1.0 / n;
      const auto c = cluster_coupling(m, q, b, PointPattern(2), PointPattern(2), carrier, kRadial,
                                      RetentionMode::exact(), keys);
      cluster[std::min<std::size_t>(c.out_psi.size(), 2)] += 1.0 / n;
    }
    for (int k = 0; k < 3; ++k) {
      const double p = t[k] / z, tol = 4.0 * std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(radial[static_cast<std::size_t>(k)] - p) < tol);
      CHECK(std::abs(cluster[static_cast<std::size_t>(k)] - p) < tol);
    }
  }

  TEST_CASE("nested windows") {
    const auto m = InteractionModel::hard_sphere(1.0, 0.3);
    const Region a = Region::cube(2.0, 2);
    const auto same = radial_consistency_check(m, Region::everything(2), PointPattern(2), a, 8.0, 8.0,
                                               RetentionMode::exact(), RngStream(5, 5));
    CHECK(same.equal_on_a);
    const auto sparse = InteractionModel::hard_sphere(1e-6, 0.3);
    const auto empty = radial_consistency_check(sparse, Region::everything(2), PointPattern(2), a, 8.0, 12.0,
                                                RetentionMode::exact(), RngStream(5, 6));
    CHECK(empty.event);
    CHECK(empty.equal_on_a);
    for (int i = 0; i < 10; ++i) {
      const auto r = radial_consistency_check(m, Region::everything(2), PointPattern(2), a, 8.0, 12.0,
                                              RetentionMode::exact(), RngStream(6, static_cast<std::uint64_t>(i)));
      CHECK(r.implication_holds());
    }
  }

  TEST_CASE("infinite-volume approximation") {
    const Region a = Region::cube(2.0, 2);
    CHECK(smallest_admissible_window(a, 0.3, 2) == 4.0);
    const auto sparse = InteractionModel::hard_sphere(1e-6, 0.3);
    const auto e = infinite_volume_approx(sparse, a, PointPattern(2), Region::everything(2), 20.0,
                                          RetentionMode::exact(), RngStream(1, 2));
    CHECK(e.certified);
    CHECK(e.n_star == 4.0);
    // Poisson: the output on A is the carrier on A.
    const auto po = InteractionModel::poisson(1.0, 0.3);
    for (int i = 0; i < 5; ++i) {
      const RngStream rng(8, static_cast<std::uint64_t>(i));
      const auto r = infinite_volume_approx(po, a, PointPattern(2), Region::everything(2), 30.0,
                                            RetentionMode::exact(), rng);
      REQUIRE(r.certified);
      const std::uint64_t cs = mix(rng.seed(), mix(rng.stream(), static_cast<std::uint64_t>(StreamPurpose::carrier)));
      const auto carrier = sample_carrier(a, 1.0, cs, 2);
      CHECK(same_points(r.on_a, carrier.unmarked()));
    }
  }
}
