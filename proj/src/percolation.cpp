#include "gibbsdc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gibbsdc/parallel.hpp"
#include "gibbsdc/rng.hpp"
#include "gibbsdc/sampler.hpp"
#include "gibbsdc/spatial_hash.hpp"

namespace gibbsdc {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent, rank;
  explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> ClusterPartition::members() const {
  std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < label.size(); ++i) m[static_cast<std::size_t>(label[i])].push_back(i);
  return m;
}

ClusterPartition boolean_clusters(const PointPattern& phi, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("connection radius must be > 0");
  const std::size_t n = phi.size();
  UnionFind uf(n);
  SpatialHash grid(r, phi.dim());
  for (std::size_t i = 0; i < n; ++i) grid.insert(phi[i], i);
  for (std::size_t i = 0; i < n; ++i)
    grid.for_each_near(phi[i], r, [&](const Point&, std::size_t j) {
      if (j > i) uf.unite(i, j);
    });
  ClusterPartition cp;
  cp.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  // Labels follow the first occurrence in pattern order.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.find(i);
    if (root_label[root] < 0) {
      root_label[root] = cp.count++;
      cp.bbox.push_back(Box{phi[i], phi[i]});
    }
    const int l = root_label[root];
    cp.label[i] = l;
    Box& b = cp.bbox[static_cast<std::size_t>(l)];
    for (int k = 0; k < 3; ++k) {
      b.lo[k] = std::min(b.lo[k], phi[i][k]);
      b.hi[k] = std::max(b.hi[k], phi[i][k]);
    }
  }
  return cp;
}

bool connects(const Region& a, const Region& b, const PointPattern& phi,
              const ClusterPartition& clusters, double r0) {
  if (dist(a, b) <= r0) return true;
  std::vector<char> near_a(static_cast<std::size_t>(clusters.count), 0);
  std::vector<char> near_b(static_cast<std::size_t>(clusters.count), 0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto l = static_cast<std::size_t>(clusters.label[i]);
    if (!near_a[l] && a.distance_to(phi[i]) <= r0) near_a[l] = 1;
    if (!near_b[l] && b.distance_to(phi[i]) <= r0) near_b[l] = 1;
    if (near_a[l] && near_b[l]) return true;
  }
  return false;
}

bool connects(const Region& a, const Region& b, const PointPattern& phi, double r0) {
  return connects(a, b, phi, boolean_clusters(phi, r0), r0);
}

std::vector<DecayRow> decay_curve(double alpha0, double r0, const Region& a,
                                  const std::vector<double>& distances, double margin,
                                  std::size_t reps, std::uint64_t seed, int dim) {
  const auto abox = a.bbox();
  if (!abox) throw GeometryError("decay_curve needs a bounded A");
  const double smax = distances.empty() ? 0.0 : *std::max_element(distances.begin(), distances.end());
  const Box wb = abox->expanded(smax + margin, dim);
  const Region window = Region::box(wb.lo, wb.hi, dim);
  std::vector<Region> shells;
  for (double s : distances) shells.push_back(s > 0.0 ? a.dilate(s).complement() : a.complement());

  std::vector<std::vector<char>> hit(reps, std::vector<char>(distances.size(), 0));
  const RngStream root(seed, static_cast<std::uint64_t>(StreamPurpose::replicate));
  parallel_for(reps, [&](std::size_t rep) {
    RngStream rng = root.child(rep);
    const PointPattern phi = sample_marked_poisson(window, alpha0, rng, dim).unmarked();
    const ClusterPartition cp = boolean_clusters(phi, r0);
    for (std::size_t k = 0; k < distances.size(); ++k)
      hit[rep][k] = (distances[k] <= r0 || connects(a, shells[k], phi, cp, r0)) ? 1 : 0;
  });

  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    std::size_t c = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) c += static_cast<std::size_t>(hit[rep][k]);
    const double p = reps ? static_cast<double>(c) / static_cast<double>(reps) : 0.0;
    rows.push_back({distances[k], p, reps ? std::sqrt(p * (1.0 - p) / static_cast<double>(reps)) : 0.0, reps});
  }
  return rows;
}

LogLinearFit fit_log_decay(const std::vector<DecayRow>& rows) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::array<double, 3>> pts;  // x, y, w
  for (const auto& r : rows) {
    if (r.p_hat <= 0.0 || r.p_hat >= 1.0) continue;
    const double w = r.p_hat * static_cast<double>(r.reps) / (1.0 - r.p_hat);
    const double y = std::log(r.p_hat);
    pts.push_back({r.s, y, w});
    sw += w;
    sx += w * r.s;
    sy += w * y;
    sxx += w * r.s * r.s;
    sxy += w * r.s * y;
  }
  LogLinearFit fit;
  fit.used = pts.size();
  if (pts.size() < 2) return fit;
  const double den = sw * sxx - sx * sx;
  fit.slope = (sw * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / sw;
  const double ybar = sy / sw;
  double ss_res = 0, ss_tot = 0;
  for (const auto& p : pts) {
    const double e = p[1] - (fit.intercept + fit.slope * p[0]);
    ss_res += p[2] * e * e;
    ss_tot += p[2] * (p[1] - ybar) * (p[1] - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace gibbsdc
