#include "gibbsdc/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gibbsdc/spatial_hash.hpp"

namespace gibbsdc {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument("spec: bad value for " + key + ": " + v);
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_number(key, v);
  if (x != std::floor(x)) throw std::invalid_argument("spec: " + key + " must be an integer");
  return static_cast<int>(x);
}

}  // namespace

// ---------------------------------------------------------------- spec

ScoreSpec ScoreSpec::parse(const std::string& text) {
  ScoreSpec s;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("spec: expected key=value, got " + item);
      params[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  std::vector<std::string> allowed;
  if (name == "knn-length") {
    s.kind = Kind::knn_length;
    allowed = {"k"};
  } else if (name == "knn-large") {
    s.kind = Kind::knn_large_edge;
    allowed = {"k", "a"};
  } else if (name == "voronoi") {
    s.kind = Kind::voronoi_perimeter;
  } else if (name == "mst") {
    s.kind = Kind::mst_total;
  } else if (name == "betti") {
    s.kind = Kind::betti;
    allowed = {"q", "r", "s"};
  } else {
    throw std::invalid_argument("spec: unknown functional " + name);
  }
  for (const auto& [k, v] : params) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw std::invalid_argument("spec: unknown parameter " + k + " for " + name);
    if (k == "k") s.k = parse_int(k, v);
    if (k == "a") s.a = parse_number(k, v);
    if (k == "q") s.q = parse_int(k, v);
    if (k == "r") s.r = parse_number(k, v);
    if (k == "s") s.s = parse_number(k, v);
  }
  return s;
}

std::string ScoreSpec::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::knn_length:
      os << "knn-length:k=" << k;
      break;
    case Kind::knn_large_edge:
      os << "knn-large:k=" << k << ",a=" << a;
      break;
    case Kind::voronoi_perimeter:
      os << "voronoi";
      break;
    case Kind::mst_total:
      os << "mst";
      break;
    case Kind::betti:
      os << "betti:q=" << q << ",r=" << r << ",s=" << s;
      break;
  }
  return os.str();
}

void ScoreSpec::validate(int dim) const {
  if ((kind == Kind::knn_length || kind == Kind::knn_large_edge) && k < 1)
    throw std::invalid_argument("spec: k must be >= 1");
  if (kind == Kind::knn_large_edge && !(a > 0.0)) throw std::invalid_argument("spec: a must be > 0");
  if (kind == Kind::betti) {
    if (q != 0 && q != 1) throw std::invalid_argument("spec: q must be 0 or 1");
    if (!(r >= 0.0 && r <= s)) throw std::invalid_argument("spec: need 0 <= r <= s");
    if (q == 1 && dim != 2) throw std::invalid_argument("spec: betti q=1 needs d=2");
  }
  if (kind == Kind::voronoi_perimeter && dim != 2) throw std::invalid_argument("spec: voronoi needs d=2");
}

bool ScoreSpec::per_point() const { return kind != Kind::mst_total && kind != Kind::betti; }

// ---------------------------------------------------------------- kNN

std::vector<std::vector<std::size_t>> knn_lists(const PointPattern& phi, int k) {
  const std::size_t n = phi.size();
  const int d = phi.dim();
  std::vector<std::vector<std::size_t>> out(n);
  if (n == 0 || k < 1) return out;
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  if (want == 0) return out;

  Box bb{phi[0], phi[0]};
  for (const auto& p : phi.points())
    for (int i = 0; i < d; ++i) {
      bb.lo[i] = std::min(bb.lo[i], p[i]);
      bb.hi[i] = std::max(bb.hi[i], p[i]);
    }
  double extent = 0.0, vol = 1.0;
  for (int i = 0; i < d; ++i) {
    const double len = bb.hi[i] - bb.lo[i];
    extent = std::max(extent, len);
    vol *= std::max(len, 1e-12);
  }
  const double spacing = std::pow(vol * static_cast<double>(want + 1) / static_cast<double>(n), 1.0 / d);
  // Degenerate (e.g. collinear) patterns have no volume; fall back to a per-axis share of the extent.
  const double per_axis = extent / (2.0 * std::ceil(std::pow(static_cast<double>(n), 1.0 / d)));
  const double cell = std::max({spacing, per_axis, 1e-12});
  SpatialHash grid(cell, d);
  for (std::size_t i = 0; i < n; ++i) grid.insert(phi[i], i);

  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    double r = cell;
    for (;;) {
      cand.clear();
      grid.for_each_near(phi[i], r, [&](const Point& p, std::size_t j) {
        if (j != i) cand.emplace_back(distance2(p, phi[i]), j);
      });
      if (cand.size() >= want || r > 2.0 * extent + cell) break;
      r *= 2.0;
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(want), cand.end());
    for (std::size_t t = 0; t < want; ++t) out[i].push_back(cand[t].second);
  }
  return out;
}

std::vector<double> knn_scores(const PointPattern& phi, int k) {
  const std::size_t n = phi.size();
  if (n <= static_cast<std::size_t>(k)) return std::vector<double>(n, kInfiniteScore);
  const auto lists = knn_lists(phi, k);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : lists[i]) edges.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<double> s(n, 0.0);
  for (const auto& [a, b] : edges) {
    const double len = distance(phi[a], phi[b]);
    s[a] += 0.5 * len;
    s[b] += 0.5 * len;
  }
  return s;
}

double knn_score(const PointPattern& phi, std::size_t i, int k) { return knn_scores(phi, k).at(i); }

double knn_total_length(const PointPattern& phi, int k) {
  const auto s = knn_scores(phi, k);
  return std::accumulate(s.begin(), s.end(), 0.0);
}

double kth_nn_distance(const PointPattern& phi, std::size_t i, int k) {
  if (phi.size() <= static_cast<std::size_t>(k)) return kInfiniteScore;
  std::vector<double> d2;
  d2.reserve(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j)
    if (j != i) d2.push_back(distance2(phi[i], phi[j]));
  std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
  return std::sqrt(d2[static_cast<std::size_t>(k - 1)]);
}

int knn_large_edge(const PointPattern& phi, std::size_t i, int k, double a) {
  return kth_nn_distance(phi, i, k) >= a ? 1 : 0;
}

double knn_stabilization_radius(const PointPattern& phi, std::size_t i, int k) {
  if (phi.dim() != 2) throw std::invalid_argument("stabilization radius: d must be 2");
  std::array<std::vector<double>, 6> cones;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    if (j == i) continue;
    double th = std::atan2(phi[j][1] - phi[i][1], phi[j][0] - phi[i][0]);
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    const auto c = std::min<std::size_t>(5, static_cast<std::size_t>(th / (std::numbers::pi / 3.0)));
    cones[c].push_back(distance(phi[i], phi[j]));
  }
  double rho = 0.0;
  for (auto& c : cones) {
    if (c.size() < static_cast<std::size_t>(k)) return kInfiniteScore;
    std::nth_element(c.begin(), c.begin() + (k - 1), c.end());
    rho = std::max(rho, c[static_cast<std::size_t>(k - 1)]);
  }
  return 2.0 * rho;
}

// ---------------------------------------------------------------- Voronoi

double VoronoiCell::perimeter() const {
  if (!bounded) return kInfiniteScore;
  double p = 0.0;
  for (std::size_t j = 0; j < vertices.size(); ++j)
    p += distance(vertices[j], vertices[(j + 1) % vertices.size()]);
  return p;
}

namespace {

constexpr std::size_t kFrame = static_cast<std::size_t>(-1);

// Clips a counter-clockwise polygon to {p : (p - mid) . nrm <= 0}; the new edge gets `label`.
void clip(std::vector<Point>& poly, std::vector<std::size_t>& labels, const Point& mid,
          const Point& nrm, std::size_t label) {
  auto side = [&](const Point& p) { return (p[0] - mid[0]) * nrm[0] + (p[1] - mid[1]) * nrm[1]; };
  std::vector<Point> out;
  std::vector<std::size_t> out_labels;
  const std::size_t m = poly.size();
  for (std::size_t j = 0; j < m; ++j) {
    const Point& s = poly[j];
    const Point& e = poly[(j + 1) % m];
    const double fs = side(s), fe = side(e);
    auto cross = [&] {
      const double t = fs / (fs - fe);
      return Point(s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1]));
    };
    if (fs <= 0.0) {
      out.push_back(s);
      out_labels.push_back(labels[j]);
      if (fe > 0.0) {
        out.push_back(cross());
        out_labels.push_back(label);
      }
    } else if (fe <= 0.0) {
      out.push_back(cross());
      out_labels.push_back(labels[j]);
    }
  }
  poly.swap(out);
  labels.swap(out_labels);
}

bool surrounded(const PointPattern& phi, std::size_t i) {
  std::vector<double> ang;
  for (std::size_t j = 0; j < phi.size(); ++j)
    if (j != i) ang.push_back(std::atan2(phi[j][1] - phi[i][1], phi[j][0] - phi[i][0]));
  if (ang.size() < 3) return false;
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2.0 * std::numbers::pi - ang.back();
  for (std::size_t j = 1; j < ang.size(); ++j) gap = std::max(gap, ang[j] - ang[j - 1]);
  return gap < std::numbers::pi;
}

}  // namespace

VoronoiCell voronoi_cell(const PointPattern& phi, std::size_t i) {
  if (phi.dim() != 2) throw std::invalid_argument("voronoi: d must be 2");
  VoronoiCell cell;
  if (!surrounded(phi, i)) return cell;
  const Point x = phi[i];
  std::vector<std::pair<double, std::size_t>> others;
  for (std::size_t j = 0; j < phi.size(); ++j)
    if (j != i) others.emplace_back(distance2(phi[j], x), j);
  std::sort(others.begin(), others.end());
  double frame = 4.0 * std::sqrt(others.back().first) + 1.0;
  for (int attempt = 0; attempt < 60; ++attempt, frame *= 2.0) {
    std::vector<Point> poly{Point(x[0] - frame, x[1] - frame), Point(x[0] + frame, x[1] - frame),
                            Point(x[0] + frame, x[1] + frame), Point(x[0] - frame, x[1] + frame)};
    std::vector<std::size_t> labels(4, kFrame);
    double reach2 = 2.0 * frame * frame;
    for (const auto& [d2, j] : others) {
      if (d2 > 4.0 * reach2) break;
      const Point& y = phi[j];
      clip(poly, labels, Point(0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])),
           Point(y[0] - x[0], y[1] - x[1]), j);
      reach2 = 0.0;
      for (const auto& v : poly) reach2 = std::max(reach2, distance2(v, x));
    }
    if (std::find(labels.begin(), labels.end(), kFrame) != labels.end()) continue;
    cell.bounded = true;
    cell.vertices = std::move(poly);
    cell.neighbour = std::move(labels);
    return cell;
  }
  return cell;
}

double voronoi_score(const PointPattern& phi, std::size_t i) {
  return 0.5 * voronoi_cell(phi, i).perimeter();
}

// ---------------------------------------------------------------- MST

std::vector<Edge> mst_edges(const PointPattern& phi) {
  const std::size_t n = phi.size();
  std::vector<Edge> tree;
  if (n < 2) return tree;
  if (n <= 2000) {
    std::vector<Edge> all;
    all.reserve(n * (n - 1) / 2);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) all.push_back({u, v, distance(phi[u], phi[v])});
    std::sort(all.begin(), all.end(), [](const Edge& a, const Edge& b) {
      if (a.length != b.length) return a.length < b.length;
      return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
    UnionFind uf(n);
    for (const auto& e : all)
      if (uf.unite(e.u, e.v)) {
        tree.push_back(e);
        if (tree.size() == n - 1) break;
      }
    return tree;
  }
  std::vector<double> best(n, kInfiniteScore);
  std::vector<std::size_t> from(n, 0);
  std::vector<char> in(n, 0);
  std::size_t cur = 0;
  in[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in[v]) continue;
      const double d = distance(phi[cur], phi[v]);
      if (d < best[v]) {
        best[v] = d;
        from[v] = cur;
      }
      if (next == n || best[v] < best[next]) next = v;
    }
    in[next] = 1;
    tree.push_back({std::min(from[next], next), std::max(from[next], next), best[next]});
    cur = next;
  }
  return tree;
}

double mst_total_length(const PointPattern& phi) {
  double s = 0.0;
  for (const auto& e : mst_edges(phi)) s += e.length;
  return s;
}

// ---------------------------------------------------------------- persistence

namespace {

// Radius of the smallest ball containing the triangle abc.
double enclosing_radius(const Point& a, const Point& b, const Point& c) {
  const double ab = distance2(a, b), bc = distance2(b, c), ca = distance2(c, a);
  const double longest = std::max({ab, bc, ca});
  // Obtuse or right: the longest edge is a diameter of the smallest ball.
  if (2.0 * longest >= ab + bc + ca) return 0.5 * std::sqrt(longest);
  const double la = std::sqrt(bc), lb = std::sqrt(ca), lc = std::sqrt(ab);
  const double s = 0.5 * (la + lb + lc);
  const double area = std::sqrt(std::max(0.0, s * (s - la) * (s - lb) * (s - lc)));
  return la * lb * lc / (4.0 * area);
}

struct Simplex {
  int dim;
  double value;
  std::array<std::size_t, 3> v;
};

}  // namespace

PersistenceDiagram persistence_diagram(const PointPattern& phi, double max_value, int max_dim) {
  const std::size_t n = phi.size();
  if (max_dim >= 1 && phi.dim() != 2) throw std::invalid_argument("persistence: q = 1 needs d = 2");
  std::vector<Simplex> cx;
  for (std::size_t i = 0; i < n; ++i) cx.push_back({0, 0.0, {i, 0, 0}});
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * distance(phi[i], phi[j]);
      if (v <= max_value) {
        cx.push_back({1, v, {i, j, 0}});
        adj[i].push_back(j);
      }
    }
  if (max_dim >= 1)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < adj[i].size(); ++a)
        for (std::size_t b = a + 1; b < adj[i].size(); ++b) {
          const std::size_t j = adj[i][a], k = adj[i][b];
          if (!std::binary_search(adj[j].begin(), adj[j].end(), k)) continue;
          const double v = enclosing_radius(phi[i], phi[j], phi[k]);
          if (v <= max_value) cx.push_back({2, v, {i, j, k}});
        }
  std::sort(cx.begin(), cx.end(), [](const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.v < b.v;
  });

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_pos;
  std::vector<std::size_t> vertex_pos(n);
  for (std::size_t p = 0; p < cx.size(); ++p) {
    if (cx[p].dim == 0) vertex_pos[cx[p].v[0]] = p;
    if (cx[p].dim == 1) edge_pos[{cx[p].v[0], cx[p].v[1]}] = p;
  }
  std::vector<std::vector<std::size_t>> col(cx.size());
  for (std::size_t p = 0; p < cx.size(); ++p) {
    const auto& s = cx[p];
    if (s.dim == 1) col[p] = {vertex_pos[s.v[0]], vertex_pos[s.v[1]]};
    if (s.dim == 2)
      col[p] = {edge_pos.at({s.v[0], s.v[1]}), edge_pos.at({s.v[0], s.v[2]}), edge_pos.at({s.v[1], s.v[2]})};
    std::sort(col[p].begin(), col[p].end());
  }

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(cx.size(), none);
  std::vector<char> paired(cx.size(), 0);
  PersistenceDiagram diagram;
  std::vector<std::size_t> tmp;
  for (std::size_t p = 0; p < cx.size(); ++p) {
    auto& c = col[p];
    while (!c.empty() && owner[c.back()] != none) {
      const auto& o = col[owner[c.back()]];
      tmp.clear();
      std::set_symmetric_difference(c.begin(), c.end(), o.begin(), o.end(), std::back_inserter(tmp));
      c.swap(tmp);
    }
    if (c.empty()) continue;
    owner[c.back()] = p;
    paired[c.back()] = paired[p] = 1;
    const auto& born = cx[c.back()];
    if (cx[p].value > born.value) diagram.push_back({born.dim, born.value, cx[p].value});
  }
  for (std::size_t p = 0; p < cx.size(); ++p)
    if (!paired[p] && col[p].empty() && cx[p].dim <= max_dim)
      diagram.push_back({cx[p].dim, cx[p].value, kInfiniteScore});
  return diagram;
}

int persistent_betti(const PointPattern& phi, int q, double r, double s) {
  if (!(r >= 0.0 && r <= s)) throw std::invalid_argument("betti: need 0 <= r <= s");
  if (q == 0) {
    UnionFind uf(phi.size());
    int comps = static_cast<int>(phi.size());
    const double reach2 = 4.0 * s * s;
    for (std::size_t i = 0; i < phi.size(); ++i)
      for (std::size_t j = i + 1; j < phi.size(); ++j)
        if (distance2(phi[i], phi[j]) <= reach2 && uf.unite(i, j)) --comps;
    return comps;
  }
  if (q != 1) throw std::invalid_argument("betti: q must be 0 or 1");
  int count = 0;
  for (const auto& pr : persistence_diagram(phi, s, 1))
    if (pr.dim == 1 && pr.birth <= r && pr.death > s) ++count;
  return count;
}

// ---------------------------------------------------------------- score sums

double score(const ScoreSpec& spec, const PointPattern& phi, std::size_t i) {
  switch (spec.kind) {
    case ScoreSpec::Kind::knn_length:
      return knn_score(phi, i, spec.k);
    case ScoreSpec::Kind::knn_large_edge:
      return knn_large_edge(phi, i, spec.k, spec.a);
    case ScoreSpec::Kind::voronoi_perimeter:
      return voronoi_score(phi, i);
    default:
      throw std::invalid_argument("score: " + spec.to_string() + " is not a per-point score");
  }
}

ScoreVariant parse_variant(const std::string& s) {
  if (s == "full") return ScoreVariant::full;
  if (s == "restricted") return ScoreVariant::restricted;
  throw std::invalid_argument("variant: expected full or restricted, got " + s);
}

namespace {

double whole_pattern(const ScoreSpec& spec, const PointPattern& phi) {
  if (spec.kind == ScoreSpec::Kind::mst_total) return mst_total_length(phi);
  return persistent_betti(phi, spec.q, spec.r, spec.s);
}

[[noreturn]] void infinite_at(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "infinite score at (" << p[0] << ", " << p[1] << ", " << p[2] << ")";
  throw InfiniteScore(os.str(), p);
}

}  // namespace

double score_sum(const PointPattern& phi, const ScoreSpec& spec, const Region& q,
                 ScoreVariant variant) {
  const PointPattern inside = phi.filter([&](const Point& p) { return q.contains(p); });
  if (!spec.per_point()) return whole_pattern(spec, inside);
  const PointPattern& base = variant == ScoreVariant::full ? phi : inside;
  std::vector<double> values;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < base.size(); ++i)
    if (q.contains(base[i])) idx.push_back(i);
  if (spec.kind == ScoreSpec::Kind::knn_length) {
    const auto all = knn_scores(base, spec.k);
    for (std::size_t i : idx) values.push_back(all[i]);
  } else {
    for (std::size_t i : idx) values.push_back(score(spec, base, i));
  }
  double total = 0.0;
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (std::isinf(values[t])) infinite_at(base[idx[t]]);
    total += values[t];
  }
  return total;
}

double functional_value(const ScoreSpec& spec, const PointPattern& phi) {
  return score_sum(phi, spec, Region::everything(phi.dim()), ScoreVariant::restricted);
}

double add_one_cost(const Functional& h, const PointPattern& phi, const Point& y) {
  if (phi.contains(y)) throw std::invalid_argument("add_one_cost: y already in the pattern");
  PointPattern plus = phi.unmarked();
  plus.add(y);
  return h(plus) - h(phi);
}

double add_one_cost(const ScoreSpec& spec, const PointPattern& phi, const Point& y) {
  return add_one_cost([&](const PointPattern& p) { return functional_value(spec, p); }, phi, y);
}

}  // namespace gibbsdc
