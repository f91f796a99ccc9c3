#include "gibbsdc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "gibbsdc/percolation.hpp"
#include "gibbsdc/spatial_hash.hpp"

namespace gibbsdc {

namespace {

// Thinning state for one boundary condition: psi, the points kept so far, and the output.
struct BoundaryRun {
  SpatialHash psi_hash;
  SpatialHash kept;
  ConfigView base;
  ConfigView view;
  PointPattern out;

  BoundaryRun(const PointPattern& psi, double r0, int dim)
      : psi_hash(r0, dim), kept(r0, dim), out(dim) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi_hash.insert(psi[i], i);
    base = ConfigView{&psi_hash, nullptr, nullptr};
    view = ConfigView{&kept, nullptr, &base};
  }
};

// Decides carrier points against several boundary conditions with shared keyed randomness.
class MultiDecider {
 public:
  MultiDecider(const InteractionModel& m, const std::vector<PointPattern>& psis,
               const RetentionMode& mode, const RngStream& rng, const SamplerBudget& budget)
      : m_(m), mode_(mode), rng_(rng), engine_(m, rng.seed(), budget) {
    for (const auto& psi : psis) runs_.push_back(std::make_unique<BoundaryRun>(psi, m.r0, m.dim));
  }

  void decide(const Point& x, double u, const Region& remainder) {
    const std::uint64_t key = candidate_key(rng_, x, u);
    for (auto& run : runs_) {
      const double upper = engine_.kappa_at(x, run->view);
      if (u > upper) continue;
      if (!m_.constant() && u > engine_.estimate(x, upper, remainder, run->view, mode_, key)) continue;
      run->kept.insert(x, run->out.size());
      run->out.add(x);
    }
  }

  std::vector<PointPattern> outputs() const {
    std::vector<PointPattern> v;
    for (const auto& r : runs_) v.push_back(r->out);
    return v;
  }

 private:
  const InteractionModel& m_;
  RetentionMode mode_;
  RngStream rng_;
  RetentionEngine engine_;
  std::vector<std::unique_ptr<BoundaryRun>> runs_;
};

struct Carrier {
  std::vector<Point> pts;
  std::vector<double> marks;
  SpatialHash hash;
  std::vector<char> decided;

  Carrier(const PointPattern& phi_star, const Region& q, double r0, int dim) : hash(r0, dim) {
    if (!phi_star.empty() && !phi_star.has_marks())
      throw std::invalid_argument("coupling needs a marked carrier");
    for (std::size_t i = 0; i < phi_star.size(); ++i) {
      if (!q.contains(phi_star[i])) continue;
      hash.insert(phi_star[i], pts.size());
      pts.push_back(phi_star[i]);
      marks.push_back(phi_star.mark(i));
    }
    decided.assign(pts.size(), 0);
  }
};

const Box& bounded_box(const std::optional<Box>& b) {
  if (!b) throw GeometryError("coupling window must be bounded");
  return *b;
}

}  // namespace

// ---------------------------------------------------------------- certificate

void certify(CouplingTrace& trace, const PointPattern& carrier, const Region& b, double r0) {
  const PointPattern pts = carrier.unmarked();
  const ClusterPartition cp = boolean_clusters(pts, r0);
  trace.clusters.clear();
  trace.disagreement.clear();
  trace.confined = true;
  for (const auto& p : trace.out_psi.points())
    if (!pts.contains(p)) trace.confined = false;
  for (const auto& p : trace.out_psi_prime.points())
    if (!pts.contains(p)) trace.confined = false;
  const auto members = cp.members();
  for (int c = 0; c < cp.count; ++c) {
    ClusterFlag f;
    f.cluster_id = c;
    f.size = members[static_cast<std::size_t>(c)].size();
    f.dist_to_b = std::numeric_limits<double>::infinity();
    for (std::size_t i : members[static_cast<std::size_t>(c)]) {
      const Point& p = pts[i];
      const bool in_a = trace.out_psi.contains(p), in_b = trace.out_psi_prime.contains(p);
      if (in_a != in_b) {
        f.agrees = false;
        trace.disagreement.push_back(p);
      }
      f.dist_to_b = std::min(f.dist_to_b, b.is_nothing() ? std::numeric_limits<double>::infinity()
                                                         : b.distance_to(p));
    }
    f.touches_b = f.dist_to_b <= r0;
    if (!f.agrees && !f.touches_b) trace.confined = false;
    trace.clusters.push_back(f);
  }
}

// ---------------------------------------------------------------- cluster coupling

CouplingTrace cluster_coupling(const InteractionModel& m, const Region& q, const Region& b,
                               const PointPattern& psi, const PointPattern& psi_prime,
                               const PointPattern& phi_star, const OrderMap& iota0,
                               const RetentionMode& mode, const RngStream& rng,
                               const SamplerBudget& budget) {
  const double r0 = m.r0;
  const Box qbox = bounded_box(q.bbox());
  Carrier car(phi_star, q, r0, m.dim);
  const std::size_t n = car.pts.size();
  MultiDecider decider(m, {psi, psi_prime}, mode, rng, budget);

  // Explored sets S_g, indexed by generation g.  Generation 1 is B_{r0}(B) n Q; later generations
  // add r0-balls about carrier points or an iota0-prefix.
  SpatialHash balls(r0, m.dim);
  std::vector<int> ball_gen;
  std::vector<std::pair<int, Point>> prefixes;
  const bool has_b = !b.is_nothing();
  auto in_dil_b = [&](const Point& p) { return has_b && b.distance_to(p) <= r0; };
  auto explored = [&](const Point& p, int g) {
    if (g < 1) return false;
    if (in_dil_b(p)) return true;
    bool hit = false;
    balls.for_each_near(p, r0, [&](const Point&, std::size_t id) {
      if (ball_gen[id] <= g) hit = true;
    });
    if (hit) return true;
    for (auto it = prefixes.rbegin(); it != prefixes.rend(); ++it)
      if (it->first <= g) return iota0.compare(p, it->second) <= 0;
    return false;
  };

  int gen = 1;
  Point current_y;
  // Remainder of the candidate current_y decided in increment `gen`.
  const Region remainder = Region::predicate(
      [&](const Point& p) {
        if (!q.contains(p) || explored(p, gen - 1)) return false;
        return !(explored(p, gen) && iota0.compare(p, current_y) <= 0);
      },
      qbox, m.dim);

  auto by_iota = [&](std::size_t a, std::size_t c) { return iota0.less(car.pts[a], car.pts[c]); };
  auto decide_all = [&](std::vector<std::size_t>& cands) {
    std::sort(cands.begin(), cands.end(), by_iota);
    for (std::size_t i : cands) {
      car.decided[i] = 1;
      current_y = car.pts[i];
      decider.decide(car.pts[i], car.marks[i], remainder);
    }
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), by_iota);
  std::size_t scan = 0;

  CouplingTrace trace;
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i)
    if (in_dil_b(car.pts[i])) frontier.push_back(i);
  decide_all(frontier);
  trace.increments = 1;

  for (;;) {
    std::vector<std::size_t> cands;
    if (!frontier.empty()) {
      ++gen;
      for (std::size_t x : frontier) {
        balls.insert(car.pts[x], ball_gen.size());
        ball_gen.push_back(gen);
      }
      for (std::size_t x : frontier)
        car.hash.for_each_near(car.pts[x], r0, [&](const Point&, std::size_t j) {
          if (!car.decided[j] && std::find(cands.begin(), cands.end(), j) == cands.end())
            cands.push_back(j);
        });
    } else {
      while (scan < n && car.decided[order[scan]]) ++scan;
      if (scan == n) break;
      ++gen;
      prefixes.emplace_back(gen, car.pts[order[scan]]);
      cands.push_back(order[scan]);
    }
    decide_all(cands);
    frontier = std::move(cands);
    ++trace.increments;
  }

  auto outs = decider.outputs();
  trace.out_psi = outs[0];
  trace.out_psi_prime = outs[1];
  certify(trace, phi_star.filter([&](const Point& p) { return q.contains(p); }), b, r0);
  return trace;
}

// ---------------------------------------------------------------- anchors

GridAnchor GridAnchor::for_range(double r0, int dim) {
  return {r0 / (2.0 * std::sqrt(static_cast<double>(dim))), dim};
}

bool GridAnchor::precedes(const Point& a, const Point& b) const {
  const double sa = sup_norm(a, dim), sb = sup_norm(b, dim);
  if (sa != sb) return sa > sb;
  return lex_less(a, b);
}

std::vector<Point> GridAnchor::enumerate(const Box& box, double r0) const {
  std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<long>(std::ceil((box.lo[i] - r0) / delta));
    hi[i] = static_cast<long>(std::floor((box.hi[i] + r0) / delta));
  }
  const Region rb = Region::box(box.lo, box.hi, dim);
  std::vector<std::array<long, 3>> idx;
  for (long i = lo[0]; i <= hi[0]; ++i)
    for (long j = lo[1]; j <= hi[1]; ++j)
      for (long k = lo[2]; k <= hi[2]; ++k) {
        const Point p(delta * static_cast<double>(i), delta * static_cast<double>(j),
                      delta * static_cast<double>(k));
        if (rb.distance_to(p) <= r0) idx.push_back({i, j, k});
      }
  // Order by integer sup-norm (descending), then lexicographically; exact on the lattice.
  std::sort(idx.begin(), idx.end(), [](const auto& a, const auto& b) {
    const long sa = std::max({std::labs(a[0]), std::labs(a[1]), std::labs(a[2])});
    const long sb = std::max({std::labs(b[0]), std::labs(b[1]), std::labs(b[2])});
    if (sa != sb) return sa > sb;
    return a < b;
  });
  std::vector<Point> out;
  out.reserve(idx.size());
  for (const auto& a : idx)
    out.emplace_back(delta * static_cast<double>(a[0]), delta * static_cast<double>(a[1]),
                     delta * static_cast<double>(a[2]));
  return out;
}

// ---------------------------------------------------------------- radial coupling

RadialResult radial_coupling_multi(const InteractionModel& m, const Region& q, const Region& b,
                                   const std::vector<PointPattern>& psis,
                                   const PointPattern& phi_star, const GridAnchor& anchors,
                                   const RetentionMode& mode, const RngStream& rng,
                                   const SamplerBudget& budget) {
  const double r0 = m.r0;
  const Box qbox = bounded_box(q.bbox());
  Carrier car(phi_star, q, r0, m.dim);
  MultiDecider decider(m, psis, mode, rng, budget);
  const bool has_b = !b.is_nothing();
  auto in_dil_b = [&](const Point& p) { return has_b && b.distance_to(p) <= r0; };

  // Explored set S: union of balls B(v, rho), the clipped ones intersected with B_{r0}(B).
  struct Ball {
    double rho2;
    bool clipped;
  };
  SpatialHash ball_index(r0, m.dim);
  std::vector<Ball> balls;
  auto explored = [&](const Point& p) {
    bool hit = false;
    ball_index.for_each_near(p, r0, [&](const Point& c, std::size_t id) {
      if (hit) return;
      const Ball& bl = balls[id];
      if (distance2(p, c) <= bl.rho2 && (!bl.clipped || in_dil_b(p))) hit = true;
    });
    return hit;
  };
  const Region remainder =
      Region::predicate([&](const Point& p) { return q.contains(p) && !explored(p); }, qbox, m.dim);

  RadialResult res;
  StoppingState& st = res.state;

  // One exploration step from v: Z is V up to its closest carrier point (or all of V).
  auto step = [&](const Point& v, bool clipped, bool from_anchor) -> long {
    long best = -1;
    double best_d2 = 0.0;
    car.hash.for_each_near(v, r0, [&](const Point& p, std::size_t j) {
      if (car.decided[j] || (clipped && !in_dil_b(p))) return;
      const double d2 = distance2(p, v);
      if (best < 0 || d2 < best_d2 || (d2 == best_d2 && lex_less(p, car.pts[static_cast<std::size_t>(best)]))) {
        best = static_cast<long>(j);
        best_d2 = d2;
      }
    });
    const double rho2 = best < 0 ? r0 * r0 : best_d2;
    ball_index.insert(v, balls.size());
    balls.push_back({rho2, clipped});
    st.steps.push_back({v, std::sqrt(rho2), best, from_anchor, clipped});
    if (best >= 0) {
      const auto j = static_cast<std::size_t>(best);
      car.decided[j] = 1;
      ++st.decided;
      decider.decide(car.pts[j], car.marks[j], remainder);
    }
    return best;
  };

  auto follow = [&](std::vector<long> found) {
    std::size_t k = 0;
    while (k < found.size()) {
      const long r = step(car.pts[static_cast<std::size_t>(found[k])], false, false);
      if (r >= 0)
        found.push_back(r);
      else
        ++k;
    }
  };

  const std::vector<Point> grid = anchors.enumerate(qbox, r0);

  // Priority sweep of B_{r0}(B): every carrier point within r0 of B is decided before anything
  // farther away, so later clusters never see the perturbation through their remainders.
  if (has_b) {
    std::vector<long> found;
    for (const Point& v : grid) {
      if (b.distance_to(v) > 2.0 * r0) continue;
      for (;;) {
        const long r = step(v, true, true);
        if (r < 0) break;
        found.push_back(r);
      }
    }
    if (!found.empty()) ++st.clusters_started;
    follow(std::move(found));
  }

  for (const Point& v : grid) {
    for (;;) {
      const long r = step(v, false, true);
      if (r < 0) break;
      ++st.clusters_started;
      follow({r});
    }
  }
  res.outputs = decider.outputs();
  return res;
}

RadialResult radial_coupling(const InteractionModel& m, const Region& q, const Region& b,
                             const PointPattern& psi, const PointPattern& phi_star,
                             const GridAnchor& anchors, const RetentionMode& mode,
                             const RngStream& rng, const SamplerBudget& budget) {
  return radial_coupling_multi(m, q, b, {psi}, phi_star, anchors, mode, rng, budget);
}

CouplingTrace radial_coupling_pair(const InteractionModel& m, const Region& q, const Region& b,
                                   const PointPattern& psi, const PointPattern& psi_prime,
                                   const PointPattern& phi_star, const GridAnchor& anchors,
                                   const RetentionMode& mode, const RngStream& rng,
                                   const SamplerBudget& budget) {
  RadialResult r = radial_coupling_multi(m, q, b, {psi, psi_prime}, phi_star, anchors, mode, rng, budget);
  CouplingTrace trace;
  trace.out_psi = r.outputs[0];
  trace.out_psi_prime = r.outputs[1];
  trace.increments = r.state.steps.size();
  certify(trace, phi_star.filter([&](const Point& p) { return q.contains(p); }), b, m.r0);
  return trace;
}

// ---------------------------------------------------------------- nested windows

namespace {

std::uint64_t carrier_seed(const RngStream& rng) {
  return mix(rng.seed(), mix(rng.stream(), static_cast<std::uint64_t>(StreamPurpose::carrier)));
}

Region window(double side, const Region& u, int dim) {
  const Region c = Region::cube(side, dim);
  return u.kind() == Region::Kind::everything ? c : (c & u);
}

}  // namespace

ConsistencyResult radial_consistency_check(const InteractionModel& m, const Region& u,
                                           const PointPattern& psi, const Region& a, double n,
                                           double m_side, const RetentionMode& mode,
                                           const RngStream& rng, const SamplerBudget& budget) {
  if (m_side < n) throw std::invalid_argument("window sizes must satisfy n <= m");
  const int d = m.dim;
  const Region qn = window(n, u, d), qm = window(m_side, u, d);
  const PointPattern carrier_m = sample_carrier(qm, m.kappa_max(), carrier_seed(rng), d);
  const PointPattern carrier_n = carrier_m.filter([&](const Point& p) { return qn.contains(p); });
  const GridAnchor anchors = GridAnchor::for_range(m.r0, d);

  ConsistencyResult res;
  const Region inner = Region::cube(n - 4.0 * m.r0, d);
  res.event = !connects(a, inner.complement(), carrier_n.unmarked(), m.r0);
  const auto rn = radial_coupling(m, qn, Region::cube(n, d).complement(), psi, carrier_n, anchors,
                                  mode, rng, budget);
  const auto rm = radial_coupling(m, qm, Region::cube(m_side, d).complement(), psi, carrier_m,
                                  anchors, mode, rng, budget);
  auto on_a = [&](const PointPattern& p) { return p.filter([&](const Point& x) { return a.contains(x); }); };
  res.equal_on_a = same_points(on_a(rn.outputs[0]), on_a(rm.outputs[0]));
  return res;
}

double smallest_admissible_window(const Region& a, double r0, int dim) {
  const auto bb = a.bbox();
  if (!bb) throw GeometryError("A must be bounded");
  double e = 0.0;
  for (int i = 0; i < dim; ++i) e = std::max({e, std::abs(bb->lo[i]), std::abs(bb->hi[i])});
  return std::floor(2.0 * e + 6.0 * r0) + 1.0;
}

InfiniteVolumeResult infinite_volume_approx(const InteractionModel& m, const Region& a,
                                            const PointPattern& psi, const Region& u, double n_max,
                                            const RetentionMode& mode, const RngStream& rng,
                                            const SamplerBudget& budget) {
  const int d = m.dim;
  const GridAnchor anchors = GridAnchor::for_range(m.r0, d);
  InfiniteVolumeResult res;
  res.on_a = PointPattern(d);
  for (double n = smallest_admissible_window(a, m.r0, d); n <= n_max; n += 1.0) {
    const Region qn = window(n, u, d);
    const PointPattern carrier = sample_carrier(qn, m.kappa_max(), carrier_seed(rng), d);
    const Region outside = Region::cube(n - 4.0 * m.r0, d).complement();
    if (connects(a, outside, carrier.unmarked(), m.r0)) continue;
    const auto r = radial_coupling(m, qn, Region::cube(n, d).complement(), psi, carrier, anchors,
                                   mode, rng, budget);
    res.on_a = r.outputs[0].filter([&](const Point& x) { return a.contains(x); });
    res.n_star = n;
    res.certified = true;
    return res;
  }
  res.n_star = n_max;
  return res;
}

}  // namespace gibbsdc
