#include "gibbsdc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace gibbsdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using NodePtr = std::shared_ptr<const Region::Node>;

Region make(Region::Node n) { return Region(std::make_shared<const Region::Node>(std::move(n))); }

double signed_distance_convex(const Region& r, const Point& p) {
  const auto& n = r.node();
  const int d = n.dim;
  if (n.kind == Region::Kind::ball) return distance(p, n.a) - n.r;
  if (n.kind == Region::Kind::box) {
    double outside2 = 0.0, inside = kInf;
    bool in = true;
    for (int i = 0; i < d; ++i) {
      const double lo = n.a[i], hi = n.b[i];
      if (p[i] < lo) {
        outside2 += (lo - p[i]) * (lo - p[i]);
        in = false;
      } else if (p[i] > hi) {
        outside2 += (p[i] - hi) * (p[i] - hi);
        in = false;
      } else {
        inside = std::min(inside, std::min(p[i] - lo, hi - p[i]));
      }
    }
    return in ? -inside : std::sqrt(outside2);
  }
  throw NotComputable("signed distance needs a box or a ball");
}

double box_minus_ball_distance(const Region::Node& bx, const Region::Node& bl, const Point& p) {
  const Point lo = bx.a, hi = bx.b, c = bl.a;
  const double r = bl.r;
  std::vector<Point> cand;
  cand.push_back(Point(std::clamp(p[0], lo[0], hi[0]), std::clamp(p[1], lo[1], hi[1])));
  const double dp = std::hypot(p[0] - c[0], p[1] - c[1]);
  if (dp > 0.0) cand.push_back(Point(c[0] + r * (p[0] - c[0]) / dp, c[1] + r * (p[1] - c[1]) / dp));
  cand.push_back(Point(c[0] + r, c[1]));
  cand.push_back(Point(c[0] - r, c[1]));
  cand.push_back(Point(c[0], c[1] + r));
  cand.push_back(Point(c[0], c[1] - r));
  const std::array<Point, 4> corner = {Point(lo[0], lo[1]), Point(hi[0], lo[1]),
                                       Point(hi[0], hi[1]), Point(lo[0], hi[1])};
  for (int e = 0; e < 4; ++e) {
    const Point a = corner[e], b = corner[(e + 1) % 4];
    cand.push_back(a);
    const double ux = b[0] - a[0], uy = b[1] - a[1];
    const double len2 = ux * ux + uy * uy;
    if (len2 == 0.0) continue;
    const double t = std::clamp(((p[0] - a[0]) * ux + (p[1] - a[1]) * uy) / len2, 0.0, 1.0);
    cand.push_back(Point(a[0] + t * ux, a[1] + t * uy));
    // Segment-circle intersections.
    const double fx = a[0] - c[0], fy = a[1] - c[1];
    const double qb = 2.0 * (fx * ux + fy * uy), qc = fx * fx + fy * fy - r * r;
    const double disc = qb * qb - 4.0 * len2 * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double s : {(-qb - sq) / (2.0 * len2), (-qb + sq) / (2.0 * len2)}) {
        if (s >= 0.0 && s <= 1.0) cand.push_back(Point(a[0] + s * ux, a[1] + s * uy));
      }
    }
  }
  const double scale = std::max({1.0, std::abs(lo[0]), std::abs(lo[1]), std::abs(hi[0]),
                                 std::abs(hi[1]), r});
  const double tol = 1e-12 * scale;
  double best = kInf;
  for (const Point& y : cand) {
    if (y[0] < lo[0] - tol || y[0] > hi[0] + tol || y[1] < lo[1] - tol || y[1] > hi[1] + tol)
      continue;
    if (std::hypot(y[0] - c[0], y[1] - c[1]) < r - tol) continue;
    best = std::min(best, distance(p, y));
  }
  return best;
}

void flatten_union(const Region& r, std::vector<Region>& out) {
  if (r.kind() == Region::Kind::unite) {
    for (const auto& k : r.node().kids) flatten_union(k, out);
  } else if (r.kind() != Region::Kind::nothing) {
    out.push_back(r);
  }
}

double primitive_dist(const Region& a, const Region& b) {
  using K = Region::Kind;
  if (a.kind() == K::ball) return std::max(0.0, b.distance_to(a.node().a) - a.node().r);
  if (b.kind() == K::ball) return std::max(0.0, a.distance_to(b.node().a) - b.node().r);
  if (a.kind() == K::dilation) return std::max(0.0, dist(a.node().kids[0], b) - a.node().r);
  if (b.kind() == K::dilation) return std::max(0.0, dist(a, b.node().kids[0]) - b.node().r);
  if (a.kind() == K::everything || b.kind() == K::everything) return 0.0;
  // {z : dist(z, K) >= s} against K itself.
  for (const auto* pr : {&a, &b}) {
    const Region& c = *pr;
    const Region& o = pr == &a ? b : a;
    if (c.kind() != K::complement) continue;
    const Region& k = c.node().kids[0];
    if (&k.node() == &o.node()) return 0.0;
    if (k.kind() == K::dilation && &k.node().kids[0].node() == &o.node()) return k.node().r;
  }
  // Box against the complement of a box.
  for (const auto* pr : {&a, &b}) {
    const Region& c = *pr;
    const Region& o = pr == &a ? b : a;
    if (c.kind() != K::complement || o.kind() != K::box) continue;
    const Region& k = c.node().kids[0];
    if (k.kind() != K::box) continue;
    double s = kInf;
    for (int i = 0; i < o.dim(); ++i)
      s = std::min({s, o.node().a[i] - k.node().a[i], k.node().b[i] - o.node().b[i]});
    return std::max(0.0, s);
  }
  if (a.kind() == K::box && b.kind() == K::box) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
      const double gap =
          std::max({0.0, a.node().a[i] - b.node().b[i], b.node().a[i] - a.node().b[i]});
      s += gap * gap;
    }
    return std::sqrt(s);
  }
  throw NotComputable("exact distance not available for these region shapes");
}

}  // namespace

double distance(const Point& a, const Point& b) { return std::sqrt(distance2(a, b)); }

bool lex_less(const Point& a, const Point& b) { return a.c < b.c; }

double sup_norm(const Point& p, int dim) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

double unit_ball_volume(int dim) {
  if (dim == 2) return std::numbers::pi;
  if (dim == 3) return 4.0 * std::numbers::pi / 3.0;
  throw GeometryError("dimension must be 2 or 3");
}

bool Box::contains(const Point& p, int dim) const {
  for (int i = 0; i < dim; ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

Box Box::expanded(double r, int dim) const {
  Box b = *this;
  for (int i = 0; i < dim; ++i) {
    b.lo[i] -= r;
    b.hi[i] += r;
  }
  return b;
}

double Box::volume(int dim) const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

// ---------------------------------------------------------------- PointPattern

std::size_t PointPattern::PointHash::operator()(const Point& p) const {
  std::hash<double> h;
  std::size_t s = h(p[0]);
  s ^= h(p[1]) + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
  s ^= h(p[2]) + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
  return s;
}

PointPattern::PointPattern(int dim) : dim_(dim) {
  if (dim != 2 && dim != 3) throw GeometryError("dimension must be 2 or 3");
}

PointPattern::PointPattern(int dim, const std::vector<Point>& pts) : PointPattern(dim) {
  pts_.reserve(pts.size());
  for (const auto& p : pts) add(p);
}

PointPattern::PointPattern(int dim, const std::vector<Point>& pts, const std::vector<double>& marks)
    : PointPattern(dim) {
  if (pts.size() != marks.size()) throw GeometryError("points and marks differ in length");
  marked_ = true;
  for (std::size_t i = 0; i < pts.size(); ++i) add(pts[i], marks[i]);
}

PointPattern PointPattern::marked(int dim) {
  PointPattern p(dim);
  p.marked_ = true;
  return p;
}

void PointPattern::insert(const Point& p) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(p[i])) throw GeometryError("non-finite coordinate");
    if (i >= dim_ && p[i] != 0.0) throw GeometryError("coordinate beyond pattern dimension");
  }
  if (!index_.insert(p).second) throw GeometryError("duplicate point in pattern");
  pts_.push_back(p);
}

void PointPattern::add(const Point& p) {
  if (marked_) throw GeometryError("marked pattern needs a mark");
  insert(p);
}

void PointPattern::add(const Point& p, double mark) {
  if (!marked_ && !pts_.empty()) throw GeometryError("unmarked pattern cannot take a mark");
  if (!std::isfinite(mark) || mark < 0.0) throw GeometryError("mark must be finite and >= 0");
  insert(p);
  marked_ = true;
  marks_.push_back(mark);
}

bool PointPattern::contains(const Point& p) const { return index_.count(p) != 0; }

void PointPattern::check_marks(double bound) const {
  for (double m : marks_)
    if (m < 0.0 || m > bound) throw GeometryError("mark outside [0, kappa_max]");
}

PointPattern PointPattern::unmarked() const { return PointPattern(dim_, pts_); }

PointPattern PointPattern::filter(const std::function<bool(const Point&)>& keep) const {
  PointPattern out(dim_);
  out.marked_ = marked_;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    if (!keep(pts_[i])) continue;
    if (marked_)
      out.add(pts_[i], marks_[i]);
    else
      out.add(pts_[i]);
  }
  return out;
}

PointPattern PointPattern::united(const PointPattern& other) const {
  PointPattern out(dim_, pts_);
  for (const auto& p : other.points()) out.add(p);
  return out;
}

std::vector<Point> PointPattern::sorted_points() const {
  std::vector<Point> v = pts_;
  std::sort(v.begin(), v.end(), lex_less);
  return v;
}

bool same_points(const PointPattern& a, const PointPattern& b) {
  return a.size() == b.size() && a.sorted_points() == b.sorted_points();
}

void write_csv(std::ostream& os, const PointPattern& pts) {
  os << "x,y";
  if (pts.dim() == 3) os << ",z";
  if (pts.has_marks()) os << ",mark";
  os << "\n";
  char buf[64];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < pts.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", pts[i][k]);
      os << (k ? "," : "") << buf;
    }
    if (pts.has_marks()) {
      std::snprintf(buf, sizeof buf, "%.17g", pts.mark(i));
      os << "," << buf;
    }
    os << "\n";
  }
}

PointPattern read_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
    break;
  }
  if (header.size() < 2 || header[0] != "x" || header[1] != "y")
    throw GeometryError("CSV header must start with x,y");
  const int dim = (header.size() >= 3 && header[2] == "z") ? 3 : 2;
  const bool marked = header.back() == "mark";
  if (header.size() != static_cast<std::size_t>(dim) + (marked ? 1 : 0))
    throw GeometryError("unrecognised CSV header");
  std::vector<Point> pts;
  std::vector<double> marks;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != header.size()) throw GeometryError("CSV row has wrong column count");
    Point p;
    for (int k = 0; k < dim; ++k) p[k] = vals[static_cast<std::size_t>(k)];
    pts.push_back(p);
    if (marked) marks.push_back(vals.back());
  }
  return marked ? PointPattern(dim, pts, marks) : PointPattern(dim, pts);
}

// ---------------------------------------------------------------- OrderMap

OrderMap OrderMap::distance_to(const Point& ref) {
  OrderMap m;
  m.kind_ = Kind::distance_to_reference;
  m.ref_ = ref;
  return m;
}

OrderMap OrderMap::lexicographic() {
  OrderMap m;
  m.kind_ = Kind::lexicographic;
  return m;
}

OrderMap OrderMap::custom(std::function<double(const Point&)> fn) {
  OrderMap m;
  m.kind_ = Kind::custom;
  m.fn_ = std::make_shared<const std::function<double(const Point&)>>(std::move(fn));
  return m;
}

double OrderMap::value(const Point& p) const {
  switch (kind_) {
    case Kind::distance_to_reference:
      return distance2(p, ref_);
    case Kind::lexicographic:
      return p[0];
    case Kind::custom:
      return (*fn_)(p);
  }
  return 0.0;
}

int OrderMap::compare(const Point& a, const Point& b) const {
  if (kind_ != Kind::lexicographic) {
    const double va = value(a), vb = value(b);
    if (va < vb) return -1;
    if (va > vb) return 1;
  }
  if (lex_less(a, b)) return -1;
  if (lex_less(b, a)) return 1;
  return 0;
}

bool OrderMap::tied(const Point& a, const Point& b) const {
  if (a == b) return true;
  if (kind_ == Kind::lexicographic) return false;
  return value(a) == value(b);
}

PointPattern order_sort(const PointPattern& pts, const OrderMap& iota) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return iota.less(pts[a], pts[b]); });
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (iota.tied(pts[idx[i - 1]], pts[idx[i]])) throw GeometryError("tie in ordering map");
  PointPattern out = pts.has_marks() ? PointPattern::marked(pts.dim()) : PointPattern(pts.dim());
  for (std::size_t i : idx) {
    if (pts.has_marks())
      out.add(pts[i], pts.mark(i));
    else
      out.add(pts[i]);
  }
  return out;
}

// ---------------------------------------------------------------- Region

Region Region::nothing(int dim) { return make({.kind = Kind::nothing, .dim = dim}); }
Region Region::everything(int dim) { return make({.kind = Kind::everything, .dim = dim}); }

Region Region::box(const Point& lo, const Point& hi, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!(lo[i] <= hi[i])) return nothing(dim);
  Point l = lo, h = hi;
  for (int i = dim; i < 3; ++i) l[i] = h[i] = 0.0;
  return make({.kind = Kind::box, .dim = dim, .a = l, .b = h});
}

Region Region::ball(const Point& center, double radius, int dim) {
  if (radius < 0.0) return nothing(dim);
  return make({.kind = Kind::ball, .dim = dim, .a = center, .r = radius});
}

Region Region::cube(double side, int dim) {
  const double h = side / 2.0;
  return box(Point(-h, -h, dim == 3 ? -h : 0.0), Point(h, h, dim == 3 ? h : 0.0), dim);
}

Region Region::order_cut(const OrderMap& iota, const Point& pivot, bool after) {
  return make({.kind = Kind::order_cut, .dim = 3, .a = pivot, .iota = iota, .after = after});
}

Region Region::predicate(std::function<bool(const Point&)> fn, std::optional<Box> bbox, int dim) {
  return make({.kind = Kind::predicate, .dim = dim, .fn = std::move(fn), .box = bbox});
}

Region Region::operator|(const Region& o) const {
  if (is_nothing()) return o;
  if (o.is_nothing()) return *this;
  if (kind() == Kind::everything || o.kind() == Kind::everything) return everything(dim());
  return make({.kind = Kind::unite, .dim = std::min(dim(), o.dim()), .kids = {*this, o}});
}

Region Region::operator&(const Region& o) const {
  if (is_nothing() || o.is_nothing()) return nothing(std::min(dim(), o.dim()));
  if (kind() == Kind::everything) return o;
  if (o.kind() == Kind::everything) return *this;
  if (kind() == Kind::box && o.kind() == Kind::box) {
    Point lo, hi;
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::max(node().a[i], o.node().a[i]);
      hi[i] = std::min(node().b[i], o.node().b[i]);
    }
    return box(lo, hi, dim());
  }
  return make({.kind = Kind::intersect, .dim = std::min(dim(), o.dim()), .kids = {*this, o}});
}

Region Region::operator-(const Region& o) const {
  if (is_nothing() || o.kind() == Kind::everything) return nothing(dim());
  if (o.is_nothing()) return *this;
  return make({.kind = Kind::difference, .dim = std::min(dim(), o.dim()), .kids = {*this, o}});
}

Region Region::complement() const {
  if (is_nothing()) return everything(dim());
  if (kind() == Kind::everything) return nothing(dim());
  if (kind() == Kind::complement) return node().kids[0];
  return make({.kind = Kind::complement, .dim = dim(), .kids = {*this}});
}

Region Region::dilate(double r) const {
  if (r < 0.0) throw GeometryError("negative dilation radius");
  if (r == 0.0 || is_nothing() || kind() == Kind::everything) return *this;
  if (kind() == Kind::ball) return ball(node().a, node().r + r, dim());
  return make({.kind = Kind::dilation, .dim = dim(), .r = r, .kids = {*this}});
}

Region::Kind Region::kind() const { return node_->kind; }
int Region::dim() const { return node_->dim; }

bool Region::contains(const Point& p) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::nothing:
      return false;
    case Kind::everything:
      return true;
    case Kind::box:
      for (int i = 0; i < n.dim; ++i)
        if (p[i] < n.a[i] || p[i] > n.b[i]) return false;
      return true;
    case Kind::ball:
      return distance2(p, n.a) <= n.r * n.r;
    case Kind::complement:
      return !n.kids[0].contains(p);
    case Kind::unite:
      return n.kids[0].contains(p) || n.kids[1].contains(p);
    case Kind::intersect:
      return n.kids[0].contains(p) && n.kids[1].contains(p);
    case Kind::difference:
      return n.kids[0].contains(p) && !n.kids[1].contains(p);
    case Kind::order_cut: {
      const int c = n.iota->compare(p, n.a);
      return n.after ? c > 0 : c < 0;
    }
    case Kind::dilation:
      return n.kids[0].distance_to(p) <= n.r;
    case Kind::predicate:
      return n.fn(p);
  }
  return false;
}

std::optional<Box> Region::bbox() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::nothing:
      return Box{};
    case Kind::everything:
    case Kind::complement:
      return std::nullopt;
    case Kind::box:
      return Box{n.a, n.b};
    case Kind::ball: {
      Box b{n.a, n.a};
      return b.expanded(n.r, n.dim);
    }
    case Kind::unite: {
      auto a = n.kids[0].bbox(), b = n.kids[1].bbox();
      if (!a || !b) return std::nullopt;
      Box u;
      for (int i = 0; i < 3; ++i) {
        u.lo[i] = std::min(a->lo[i], b->lo[i]);
        u.hi[i] = std::max(a->hi[i], b->hi[i]);
      }
      return u;
    }
    case Kind::intersect: {
      auto a = n.kids[0].bbox(), b = n.kids[1].bbox();
      if (!a) return b;
      if (!b) return a;
      Box u;
      for (int i = 0; i < 3; ++i) {
        u.lo[i] = std::max(a->lo[i], b->lo[i]);
        u.hi[i] = std::min(a->hi[i], b->hi[i]);
      }
      return u;
    }
    case Kind::difference:
      return n.kids[0].bbox();
    case Kind::order_cut:
      if (n.iota->kind() == OrderMap::Kind::distance_to_reference && !n.after) {
        Box b{n.iota->reference(), n.iota->reference()};
        return b.expanded(distance(n.a, n.iota->reference()), 3);
      }
      return std::nullopt;
    case Kind::dilation: {
      auto a = n.kids[0].bbox();
      if (!a) return std::nullopt;
      return a->expanded(n.r, n.dim);
    }
    case Kind::predicate:
      return n.box;
  }
  return std::nullopt;
}

double Region::distance_to(const Point& p) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::nothing:
      return kInf;
    case Kind::everything:
      return 0.0;
    case Kind::box:
    case Kind::ball:
      return std::max(0.0, signed_distance_convex(*this, p));
    case Kind::unite:
      return std::min(n.kids[0].distance_to(p), n.kids[1].distance_to(p));
    case Kind::dilation:
      return std::max(0.0, n.kids[0].distance_to(p) - n.r);
    case Kind::complement: {
      const Region& k = n.kids[0];
      if (k.kind() == Kind::box || k.kind() == Kind::ball)
        return std::max(0.0, -signed_distance_convex(k, p));
      if (k.kind() == Kind::dilation) {
        const Region& inner = k.node().kids[0];
        if (inner.kind() == Kind::box || inner.kind() == Kind::ball)
          return std::max(0.0, k.node().r - signed_distance_convex(inner, p));
      }
      throw NotComputable("distance to this complement is not available");
    }
    case Kind::difference: {
      const Region &a = n.kids[0], &b = n.kids[1];
      if (n.dim == 2 && a.kind() == Kind::box && b.kind() == Kind::ball)
        return box_minus_ball_distance(a.node(), b.node(), p);
      throw NotComputable("distance to this difference is not available");
    }
    case Kind::order_cut:
      if (n.iota->kind() == OrderMap::Kind::distance_to_reference) {
        const double rho = distance(n.a, n.iota->reference());
        const double dp = distance(p, n.iota->reference());
        return n.after ? std::max(0.0, rho - dp) : std::max(0.0, dp - rho);
      }
      throw NotComputable("distance to this order cut is not available");
    case Kind::intersect:
    case Kind::predicate:
      throw NotComputable("distance to this region is not available");
  }
  return kInf;
}

double dist(const Region& a, const Region& b) {
  std::vector<Region> as, bs;
  flatten_union(a, as);
  flatten_union(b, bs);
  double best = kInf;
  for (const auto& x : as)
    for (const auto& y : bs) best = std::min(best, primitive_dist(x, y));
  return best;
}

double measure(const Region& a, double resolution) {
  using K = Region::Kind;
  const int d = a.dim();
  switch (a.kind()) {
    case K::nothing:
      return 0.0;
    case K::box:
      return Box{a.node().a, a.node().b}.volume(d);
    case K::ball:
      return unit_ball_volume(d) * std::pow(a.node().r, d);
    case K::difference: {
      const Region &x = a.node().kids[0], &y = a.node().kids[1];
      if (x.kind() == K::box && y.kind() == K::ball) {
        Box inner{y.node().a, y.node().a};
        inner = inner.expanded(y.node().r, d);
        const Box outer{x.node().a, x.node().b};
        if (outer.contains(inner.lo, d) && outer.contains(inner.hi, d))
          return measure(x) - measure(y);
      }
      break;
    }
    default:
      break;
  }
  const auto bb = a.bbox();
  if (!bb) throw GeometryError("measure of an unbounded region");
  if (!(resolution > 0.0)) throw GeometryError("resolution must be positive");
  std::array<long, 3> cells{1, 1, 1};
  std::array<double, 3> step{0.0, 0.0, 0.0};
  double cell_volume = 1.0;
  for (int i = 0; i < d; ++i) {
    const double len = bb->hi[i] - bb->lo[i];
    if (len <= 0.0) return 0.0;
    cells[i] = std::max(1L, static_cast<long>(std::ceil(len / resolution)));
    step[i] = len / static_cast<double>(cells[i]);
    cell_volume *= step[i];
  }
  long hits = 0;
  Point p;
  for (long i = 0; i < cells[0]; ++i) {
    p[0] = bb->lo[0] + (static_cast<double>(i) + 0.5) * step[0];
    for (long j = 0; j < cells[1]; ++j) {
      p[1] = bb->lo[1] + (static_cast<double>(j) + 0.5) * step[1];
      for (long k = 0; k < cells[2]; ++k) {
        if (d == 3) p[2] = bb->lo[2] + (static_cast<double>(k) + 0.5) * step[2];
        if (a.contains(p)) ++hits;
      }
    }
  }
  return static_cast<double>(hits) * cell_volume;
}

}  // namespace gibbsdc
