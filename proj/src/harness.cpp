#include "gibbsdc/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "gibbsdc/parallel.hpp"
#include "gibbsdc/percolation.hpp"

namespace gibbsdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void mean_var(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : kNaN;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- table

std::vector<double> ExperimentTable::windows() const {
  std::vector<double> w;
  for (const auto& r : rows)
    if (std::find(w.begin(), w.end(), r.n) == w.end()) w.push_back(r.n);
  return w;
}

std::vector<double> ExperimentTable::values(double n) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.n == n && r.flag.empty()) v.push_back(r.value);
  return v;
}

std::vector<WindowSummary> ExperimentTable::summarize() const {
  std::vector<WindowSummary> out;
  for (double n : windows()) {
    WindowSummary s;
    s.n = n;
    for (const auto& r : rows)
      if (r.n == n && !r.flag.empty()) ++s.excluded;
    const auto v = values(n);
    s.used = v.size();
    if (v.empty()) {
      s.mean = s.variance = s.normalized_variance = s.ks = kNaN;
    } else {
      mean_var(v, s.mean, s.variance);
      s.normalized_variance = s.variance / std::pow(n, dim);
      s.ks = kNaN;
      if (v.size() >= 2 && s.variance > 0.0) s.ks = ks_distance(standardize(v));
    }
    out.push_back(s);
  }
  return out;
}

void ExperimentTable::write_csv(std::ostream& os) const {
  os << "n,rep,seed,value,flag\n";
  for (const auto& r : rows)
    os << fmt(r.n) << ',' << r.rep << ',' << r.seed << ',' << fmt(r.value) << ',' << r.flag << '\n';
}

std::uint64_t replicate_seed(std::uint64_t master, double n, std::size_t rep) {
  return mix(mix(master, std::bit_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(rep));
}

// ---------------------------------------------------------------- replicates

ExperimentTable replicate_functional(const InteractionModel& m, const WindowFunctional& h,
                                     const std::vector<double>& n_list, std::size_t reps,
                                     std::uint64_t seed, const HarnessOptions& options) {
  m.validate();
  if (reps == 0) throw std::invalid_argument("reps: must be positive");
  ExperimentTable table;
  table.dim = m.dim;
  table.rows.resize(n_list.size() * reps);
  const PointPattern empty(m.dim);
  parallel_for(table.rows.size(), [&](std::size_t idx) {
    ExperimentRow& row = table.rows[idx];
    row.n = n_list[idx / reps];
    row.rep = idx % reps;
    row.seed = replicate_seed(seed, row.n, row.rep);
    const double side = row.n + 2.0 * options.margin;
    const Region outer = Region::cube(side, m.dim);
    const RngStream rng(row.seed, static_cast<std::uint64_t>(StreamPurpose::replicate));
    RouteSpec route = options.route;
    if (route.route == SamplingRoute::automatic)
      route.route = m.kappa_max() * std::pow(side, m.dim) <= 8.0 ? SamplingRoute::rejection
                                                                : SamplingRoute::infinite_volume;
    try {
      PointPattern x(m.dim);
      if (route.route == SamplingRoute::infinite_volume) {
        const auto res = infinite_volume_approx(m, outer, empty, Region::everything(m.dim),
                                                side + options.extra_window, RetentionMode::exact(),
                                                rng, options.budget);
        if (!res.certified) {
          row.flag = "uncertified";
          return;
        }
        x = res.on_a;
      } else {
        x = sample_window(m, outer, empty, route, rng, options.budget);
      }
      row.value = h(x, Region::cube(row.n, m.dim));
    } catch (const InfiniteScore&) {
      row.flag = "infinite";
    } catch (const BudgetExceeded&) {
      row.flag = "budget";
    }
  });
  return table;
}

double default_margin(const InteractionModel& m, const ScoreSpec& spec, ScoreVariant variant) {
  if (variant == ScoreVariant::restricted || !spec.per_point()) return 0.0;
  const double lambda = m.kappa_max();
  if (spec.kind == ScoreSpec::Kind::voronoi_perimeter) return std::max(m.r0, 3.0 / std::sqrt(lambda));
  const double k = spec.k;
  const double dk = m.dim == 2 ? std::sqrt(k / (std::numbers::pi * lambda))
                               : std::cbrt(k / (unit_ball_volume(3) * lambda));
  return std::max(m.r0, 3.0 * dk);
}

ExperimentTable replicate_functional(const InteractionModel& m, const ScoreSpec& spec,
                                     ScoreVariant variant, const std::vector<double>& n_list,
                                     std::size_t reps, std::uint64_t seed, HarnessOptions options) {
  spec.validate(m.dim);
  if (options.margin < 0.0) options.margin = default_margin(m, spec, variant);
  return replicate_functional(
      m, [&](const PointPattern& x, const Region& q) { return score_sum(x, spec, q, variant); },
      n_list, reps, seed, options);
}

// ---------------------------------------------------------------- statistics

std::vector<VarianceRow> variance_scaling(const ExperimentTable& table) {
  const auto sums = table.summarize();
  if (sums.size() < 2) throw std::invalid_argument("variance_scaling: need at least two windows");
  std::vector<VarianceRow> out;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    VarianceRow r{sums[i].n, sums[i].normalized_variance, kNaN};
    if (i > 0) {
      const double prev = sums[i - 1].normalized_variance;
      r.relative_change = prev == 0.0 ? (r.normalized_variance == 0.0 ? 0.0 : kNaN)
                                      : std::abs(r.normalized_variance - prev) / prev;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("standardize: need at least two values");
  double mean = 0.0, var = 0.0;
  mean_var(values, mean, var);
  if (!(var > 0.0)) throw std::invalid_argument("standardize: zero variance");
  const double sd = std::sqrt(var);
  std::vector<double> z;
  z.reserve(values.size());
  for (double x : values) z.push_back((x - mean) / sd);
  return z;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance(std::vector<double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("ks_distance: need at least two samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // Empirical CDF jumps at tied values only once, to the count of values <= x.
    std::size_t j = i;
    while (j + 1 < samples.size() && samples[j + 1] == samples[i]) ++j;
    const double f = normal_cdf(samples[i]);
    d = std::max({d, static_cast<double>(j + 1) / n - f, f - static_cast<double>(i) / n});
    i = j;
  }
  return d;
}

// ---------------------------------------------------------------- decay

std::vector<DecayExperimentRow> disagreement_decay_experiment(const InteractionModel& m,
                                                              const std::vector<double>& distances,
                                                              std::size_t reps, std::uint64_t seed,
                                                              const DecayExperimentOptions& opt) {
  m.validate();
  if (m.dim != 2) throw std::invalid_argument("decay experiment: d must be 2");
  const double mg = opt.margin;
  const GridAnchor anchors = GridAnchor::for_range(m.r0, 2);
  const Region a = Region::box(Point(0.0, 0.0), Point(1.0, 1.0), 2);
  std::vector<DecayExperimentRow> out;
  for (double s : distances) {
    const Region q = Region::box(Point(-mg, -mg), Point(1.0 + s, 1.0 + mg), 2);
    const Box bbox{Point(1.0 + s, 0.0), Point(2.0 + s, 1.0)};
    const Region b = Region::box(bbox.lo, bbox.hi, 2);
    const PointPattern lattice = lattice_in_box(bbox, opt.lattice_spacing, 2);
    const PointPattern empty(2);
    std::vector<char> disagree(reps), connect(reps), confined(reps), control(reps);
    parallel_for(reps, [&](std::size_t rep) {
      const std::uint64_t rs = replicate_seed(seed, s, rep);
      const PointPattern carrier =
          sample_carrier(q, m.kappa_max(), mix(rs, static_cast<std::uint64_t>(StreamPurpose::carrier)), 2);
      const RngStream rng(rs, static_cast<std::uint64_t>(StreamPurpose::replicate));
      auto res = radial_coupling_multi(m, q, b, {empty, lattice, empty}, carrier, anchors, opt.mode,
                                       rng, opt.budget);
      auto on_a = [&](const PointPattern& p) { return p.filter([&](const Point& x) { return a.contains(x); }); };
      disagree[rep] = !same_points(on_a(res.outputs[0]), on_a(res.outputs[1]));
      control[rep] = !same_points(on_a(res.outputs[0]), on_a(res.outputs[2]));
      connect[rep] = connects(a, b, carrier.unmarked(), m.r0);
      CouplingTrace trace;
      trace.out_psi = res.outputs[0];
      trace.out_psi_prime = res.outputs[1];
      certify(trace, carrier, b, m.r0);
      confined[rep] = trace.confined;
    });
    DecayExperimentRow row;
    row.s = s;
    row.reps = reps;
    std::size_t nd = 0, nc = 0;
    for (std::size_t i = 0; i < reps; ++i) {
      nd += disagree[i];
      nc += connect[i];
      if (disagree[i] && !connect[i]) ++row.dominance_violations;
      if (!confined[i]) ++row.confinement_violations;
      row.control_disagreements += control[i];
    }
    const double nr = static_cast<double>(reps);
    row.p_disagree = static_cast<double>(nd) / nr;
    row.p_connect = static_cast<double>(nc) / nr;
    row.se_disagree = std::sqrt(row.p_disagree * (1.0 - row.p_disagree) / nr);
    row.se_connect = std::sqrt(row.p_connect * (1.0 - row.p_connect) / nr);
    out.push_back(row);
  }
  return out;
}

void write_decay_csv(std::ostream& os, const std::vector<DecayExperimentRow>& rows) {
  os << "s,p_disagree,se_disagree,p_connect,se_connect,reps,dominance_violations,"
        "confinement_violations,control_disagreements\n";
  for (const auto& r : rows)
    os << fmt(r.s) << ',' << fmt(r.p_disagree) << ',' << fmt(r.se_disagree) << ','
       << fmt(r.p_connect) << ',' << fmt(r.se_connect) << ',' << r.reps << ','
       << r.dominance_violations << ',' << r.confinement_violations << ','
       << r.control_disagreements << '\n';
}

// ---------------------------------------------------------------- coupling runs

CouplingAlgo parse_coupling_algo(const std::string& s) {
  if (s == "radial") return CouplingAlgo::radial;
  if (s == "cluster") return CouplingAlgo::cluster;
  throw std::invalid_argument("algo: expected radial or cluster, got " + s);
}

PointPattern lattice_in_box(const Box& box, double spacing, int dim) {
  if (!(spacing > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  PointPattern out(dim);
  std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<long>(std::ceil(box.lo[i] / spacing - 0.5));
    hi[i] = static_cast<long>(std::floor(box.hi[i] / spacing - 0.5));
  }
  for (long i = lo[0]; i <= hi[0]; ++i)
    for (long j = lo[1]; j <= hi[1]; ++j)
      for (long k = lo[2]; k <= hi[2]; ++k) {
        Point p(spacing * (static_cast<double>(i) + 0.5), spacing * (static_cast<double>(j) + 0.5));
        if (dim == 3) p[2] = spacing * (static_cast<double>(k) + 0.5);
        if (box.contains(p, dim)) out.add(p);
      }
  return out;
}

CouplingExperiment coupling_experiment(const InteractionModel& m, CouplingAlgo algo, double n,
                                       const Box& bbox, std::size_t reps, std::uint64_t seed,
                                       const RetentionMode& mode, double lattice_spacing,
                                       const SamplerBudget& budget) {
  m.validate();
  const int d = m.dim;
  const Region q = Region::cube(n, d);
  const Region b = Region::box(bbox.lo, bbox.hi, d);
  const PointPattern lattice = lattice_in_box(bbox, lattice_spacing, d);
  for (const auto& p : lattice.points())
    if (q.contains(p)) throw std::invalid_argument("perturb-box: B must lie outside the window");
  const PointPattern empty(d);
  const GridAnchor anchors = GridAnchor::for_range(m.r0, d);
  const OrderMap iota0 = OrderMap::distance_to(Point());
  std::vector<CouplingTrace> traces(reps);
  parallel_for(reps, [&](std::size_t rep) {
    const std::uint64_t rs = replicate_seed(seed, n, rep);
    const PointPattern carrier =
        sample_carrier(q, m.kappa_max(), mix(rs, static_cast<std::uint64_t>(StreamPurpose::carrier)), d);
    const RngStream rng(rs, static_cast<std::uint64_t>(StreamPurpose::replicate));
    traces[rep] = algo == CouplingAlgo::radial
                      ? radial_coupling_pair(m, q, b, empty, lattice, carrier, anchors, mode, rng, budget)
                      : cluster_coupling(m, q, b, empty, lattice, carrier, iota0, mode, rng, budget);
  });
  CouplingExperiment e;
  e.reps = reps;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto& t = traces[rep];
    if (!t.confined) ++e.violations;
    if (!t.disagreement.empty()) ++e.disagreeing_runs;
    for (const auto& c : t.clusters) e.rows.push_back({rep, c});
  }
  return e;
}

void write_coupling_csv(std::ostream& os, const CouplingExperiment& e) {
  os << "rep,cluster_id,agrees,dist_to_B\n";
  for (const auto& r : e.rows)
    os << r.rep << ',' << r.cluster.cluster_id << ',' << (r.cluster.agrees ? 1 : 0) << ','
       << fmt(r.cluster.dist_to_b) << '\n';
}

}  // namespace gibbsdc
