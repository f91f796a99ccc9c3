#include "gibbsdc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gibbsdc/parallel.hpp"

namespace gibbsdc {

namespace {

Box require_bbox(const Region& q) {
  const auto bb = q.bbox();
  if (!bb) throw GeometryError("sampling window must be bounded");
  return *bb;
}

Point uniform_in(const Box& b, int dim, RngStream& rng) {
  Point p;
  for (int i = 0; i < dim; ++i) p[i] = rng.uniform(b.lo[i], b.hi[i]);
  return p;
}

// Uniform location in Q by rejection from its bounding box.
Point uniform_in_region(const Region& q, const Box& b, int dim, RngStream& rng) {
  for (int tries = 0; tries < 1'000'000; ++tries) {
    const Point p = uniform_in(b, dim, rng);
    if (q.contains(p)) return p;
  }
  throw BudgetExceeded("could not place a uniform point in the window");
}

}  // namespace

RetentionMode RetentionMode::plugin(int m) {
  if (m < 1) throw std::invalid_argument("plugin sample count must be >= 1");
  return {Kind::plugin_estimate, m};
}

PointPattern sample_marked_poisson(const Region& q, double kappa_max, RngStream& rng, int dim) {
  const Box b = require_bbox(q);
  PointPattern out = PointPattern::marked(dim);
  const double vol = b.volume(dim);
  if (vol <= 0.0 || kappa_max <= 0.0) return out;
  const std::uint64_t n = rng.poisson(kappa_max * vol);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point p = uniform_in(b, dim, rng);
    const double u = rng.uniform(0.0, kappa_max);
    if (q.contains(p) && !out.contains(p)) out.add(p, u);
  }
  return out;
}

PointPattern sample_carrier(const Region& q, double kappa_max, std::uint64_t seed, int dim) {
  const Box b = require_bbox(q);
  PointPattern out = PointPattern::marked(dim);
  std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<long>(std::floor(b.lo[i]));
    hi[i] = static_cast<long>(std::ceil(b.hi[i])) - 1;
    if (hi[i] < lo[i]) hi[i] = lo[i];
  }
  const RngStream root(seed, static_cast<std::uint64_t>(StreamPurpose::carrier));
  for (long i = lo[0]; i <= hi[0]; ++i)
    for (long j = lo[1]; j <= hi[1]; ++j)
      for (long k = lo[2]; k <= hi[2]; ++k) {
        const std::uint64_t cell = mix(mix(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)),
                                       static_cast<std::uint64_t>(k));
        RngStream rng = root.child(cell);
        const std::uint64_t n = rng.poisson(kappa_max);
        for (std::uint64_t t = 0; t < n; ++t) {
          Point p(static_cast<double>(i) + rng.uniform(), static_cast<double>(j) + rng.uniform());
          if (dim == 3) p[2] = static_cast<double>(k) + rng.uniform();
          const double u = rng.uniform(0.0, kappa_max);
          if (q.contains(p) && !out.contains(p)) out.add(p, u);
        }
      }
  return out;
}

PointPattern rejection_sample_gibbs(const InteractionModel& m, const Region& q,
                                    const PointPattern& psi, RngStream& rng,
                                    const SamplerBudget& budget) {
  const double kmax = m.kappa_max();
  for (std::uint64_t it = 0; it < budget.rejection_iterations; ++it) {
    RngStream proposal = rng.child(StreamPurpose::rejection, it);
    PointPattern phi = sample_marked_poisson(q, kmax, proposal, m.dim).unmarked();
    const double ratio =
        configuration_density(m, phi, psi) / std::pow(kmax, static_cast<double>(phi.size()));
    if (proposal.uniform() <= ratio) return phi;
  }
  throw BudgetExceeded("rejection sampler exceeded its iteration budget");
}

// ---------------------------------------------------------------- retention

RetentionEngine::RetentionEngine(const InteractionModel& m, std::uint64_t seed,
                                 const SamplerBudget& budget)
    : model_(m), seed_(seed), budget_(budget) {}

double RetentionEngine::kappa_at(const Point& x, const ConfigView& boundary) {
  scratch_.clear();
  boundary.gather(x, model_.r0, scratch_);
  return model_.kappa(x, scratch_);
}

bool RetentionEngine::in_remainder(const Point& p, const Region& base, const Exclusion* excl) const {
  for (const Exclusion* e = excl; e; e = e->parent)
    if (distance2(p, e->center) <= e->radius2) return false;
  return base.contains(p);
}

double RetentionEngine::draw(const Point& x, double upper, const Region& base,
                             const Exclusion* excl, const ConfigView& boundary, std::uint64_t key) {
  if (upper == 0.0 || model_.constant()) return upper;
  if (++work_ - call_start_ > budget_.retention_work)
    throw BudgetExceeded("retention recursion exceeded its work budget");

  const int d = model_.dim;
  const double r0 = model_.r0;
  const double kmax = model_.kappa_max();
  RngStream rng(seed_, key);
  Box b{x, x};
  b = b.expanded(r0, d);
  const std::uint64_t n = rng.poisson(kmax * b.volume(d));
  struct Fresh {
    Point p;
    double u;
    double d2;
  };
  std::vector<Fresh> fresh;
  const double r02 = r0 * r0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point p = uniform_in(b, d, rng);
    const double u = rng.uniform(0.0, kmax);
    const double d2 = distance2(p, x);
    if (d2 <= r02 && in_remainder(p, base, excl)) fresh.push_back({p, u, d2});
  }
  if (fresh.empty()) return upper;
  std::sort(fresh.begin(), fresh.end(), [](const Fresh& a, const Fresh& c) {
    if (a.d2 != c.d2) return a.d2 < c.d2;
    return lex_less(a.p, c.p);
  });

  std::vector<Point> kept;
  const ConfigView local{nullptr, &kept, &boundary};
  for (const Fresh& y : fresh) {
    const double ub = kappa_at(y.p, local);
    if (y.u > ub) continue;
    const Exclusion e{x, y.d2, excl};
    const double p = draw(y.p, ub, base, &e, local, mix(key, hash_point(y.p, y.u)));
    if (y.u <= p) kept.push_back(y.p);
  }
  if (kept.empty()) return upper;
  return kappa_at(x, local);
}

double RetentionEngine::estimate(const Point& x, double upper, const Region& remainder,
                                 const ConfigView& boundary, const RetentionMode& mode,
                                 std::uint64_t key) {
  call_start_ = work_;
  switch (mode.kind) {
    case RetentionMode::Kind::terminal_only:
      if (!remainder.is_nothing())
        throw std::invalid_argument("terminal_only retention needs an empty remainder");
      return upper;
    case RetentionMode::Kind::exact_recursive:
      return draw(x, upper, remainder, nullptr, boundary, key);
    case RetentionMode::Kind::plugin_estimate: {
      double s = 0.0;
      for (int j = 0; j < mode.samples; ++j) {
        call_start_ = work_;
        s += draw(x, upper, remainder, nullptr, boundary, mix(key, static_cast<std::uint64_t>(j)));
      }
      return s / mode.samples;
    }
  }
  return upper;
}

std::uint64_t candidate_key(const RngStream& rng, const Point& x, double u) {
  return mix(mix(rng.stream(), static_cast<std::uint64_t>(StreamPurpose::retention)), hash_point(x, u));
}

double retention_probability(const InteractionModel& m, const Point& x, const Region& remainder,
                             const PointPattern& psi_prime, const RetentionMode& mode,
                             const RngStream& rng, const SamplerBudget& budget) {
  SpatialHash hash(m.r0, m.dim);
  for (std::size_t i = 0; i < psi_prime.size(); ++i) hash.insert(psi_prime[i], i);
  const ConfigView view{&hash, nullptr, nullptr};
  RetentionEngine engine(m, rng.seed(), budget);
  const double upper = engine.kappa_at(x, view);
  return engine.estimate(x, upper, remainder, view, mode, candidate_key(rng, x, 0.0));
}

PointPattern standard_thinning(const InteractionModel& m, const Region& q, const PointPattern& psi,
                               const OrderMap& iota, const PointPattern& phi_star,
                               const RetentionMode& mode, const RngStream& rng,
                               const SamplerBudget& budget) {
  if (!phi_star.empty() && !phi_star.has_marks())
    throw std::invalid_argument("standard_thinning needs a marked carrier");
  std::vector<std::size_t> order(phi_star.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return iota.less(phi_star[a], phi_star[b]); });

  SpatialHash psi_hash(m.r0, m.dim), kept(m.r0, m.dim);
  for (std::size_t i = 0; i < psi.size(); ++i) psi_hash.insert(psi[i], i);
  const ConfigView base{&psi_hash, nullptr, nullptr};
  const ConfigView view{&kept, nullptr, &base};
  RetentionEngine engine(m, rng.seed(), budget);

  PointPattern out(m.dim);
  for (std::size_t idx : order) {
    const Point& x = phi_star[idx];
    const double u = phi_star.mark(idx);
    const double upper = engine.kappa_at(x, view);
    if (u > upper) continue;
    bool keep = true;
    if (!m.constant()) {
      const Region remainder = q & Region::order_cut(iota, x, true);
      keep = u <= engine.estimate(x, upper, remainder, view, mode, candidate_key(rng, x, u));
    }
    if (keep) {
      kept.insert(x, out.size());
      out.add(x);
    }
  }
  return out;
}

// ---------------------------------------------------------------- routes

RouteSpec parse_route(const std::string& s) {
  if (s == "rejection") return {SamplingRoute::rejection, 1};
  if (s == "thinning-exact") return {SamplingRoute::thinning_exact, 1};
  if (s == "infinite-volume") return {SamplingRoute::infinite_volume, 1};
  if (s == "auto") return {SamplingRoute::automatic, 1};
  const std::string prefix = "thinning-plugin:";
  if (s.rfind(prefix, 0) == 0) {
    const int m = std::stoi(s.substr(prefix.size()));
    if (m < 1) throw std::invalid_argument("route: plugin sample count must be >= 1");
    return {SamplingRoute::thinning_plugin, m};
  }
  throw std::invalid_argument("route: unknown sampling route '" + s + "'");
}

std::string to_string(const RouteSpec& r) {
  switch (r.route) {
    case SamplingRoute::rejection:
      return "rejection";
    case SamplingRoute::thinning_exact:
      return "thinning-exact";
    case SamplingRoute::thinning_plugin:
      return "thinning-plugin:" + std::to_string(r.plugin_samples);
    case SamplingRoute::infinite_volume:
      return "infinite-volume";
    case SamplingRoute::automatic:
      return "auto";
  }
  return "?";
}

PointPattern sample_window(const InteractionModel& m, const Region& q, const PointPattern& psi,
                           const RouteSpec& route, const RngStream& rng,
                           const SamplerBudget& budget) {
  SamplingRoute r = route.route;
  if (r == SamplingRoute::automatic) {
    const double load = m.kappa_max() * require_bbox(q).volume(m.dim);
    r = load <= 8.0 ? SamplingRoute::rejection : SamplingRoute::thinning_exact;
  }
  switch (r) {
    case SamplingRoute::rejection: {
      RngStream s = rng.child(StreamPurpose::rejection, 0);
      return rejection_sample_gibbs(m, q, psi, s, budget);
    }
    case SamplingRoute::thinning_exact:
    case SamplingRoute::thinning_plugin: {
      const PointPattern carrier = sample_carrier(q, m.kappa_max(), mix(rng.seed(), rng.stream()), m.dim);
      const RetentionMode mode = r == SamplingRoute::thinning_exact
                                     ? RetentionMode::exact()
                                     : RetentionMode::plugin(route.plugin_samples);
      return standard_thinning(m, q, psi, OrderMap::distance_to(Point()), carrier, mode, rng, budget);
    }
    default:
      throw std::invalid_argument("sample_window: route needs the coupling module");
  }
}

// ---------------------------------------------------------------- GNZ

double GnzResult::z() const {
  const double se = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
  if (se == 0.0) return lhs == rhs ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(lhs - rhs) / se;
}

GnzResult gnz_balance(const InteractionModel& m, const Region& q, const PointPattern& psi,
                      const TestFunction& f, std::size_t reps, std::size_t points_per_rep,
                      const RouteSpec& route, std::uint64_t seed) {
  const Box b = require_bbox(q);
  const double vol = measure(q);
  std::vector<double> lhs(reps), rhs(reps);
  const RngStream root(seed, static_cast<std::uint64_t>(StreamPurpose::gnz));
  parallel_for(reps, [&](std::size_t rep) {
    const RngStream rs = root.child(rep);
    const PointPattern x = sample_window(m, q, psi, route, rs);
    double l = 0.0;
    for (const auto& p : x.points()) l += f(p, x);
    lhs[rep] = l;
    RngStream loc = rs.child(StreamPurpose::gnz, 1);
    std::vector<Point> with_psi = x.points();
    with_psi.insert(with_psi.end(), psi.points().begin(), psi.points().end());
    double r = 0.0;
    for (std::size_t j = 0; j < points_per_rep; ++j) {
      const Point u = uniform_in_region(q, b, m.dim, loc);
      if (x.contains(u)) continue;
      PointPattern xu = x;
      xu.add(u);
      r += f(u, xu) * m.kappa(u, with_psi);
    }
    rhs[rep] = vol * r / static_cast<double>(std::max<std::size_t>(points_per_rep, 1));
  });
  auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
    const double n = static_cast<double>(v.size());
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  GnzResult res;
  mean_se(lhs, res.lhs, res.lhs_se);
  mean_se(rhs, res.rhs, res.rhs_se);
  return res;
}

}  // namespace gibbsdc
