#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace gibbsdc {

/// Thrown when an exact answer is requested for a region shape that does not admit one.
struct NotComputable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A point in R^2 or R^3.  In two dimensions the third coordinate is kept at zero so that
/// distance computations need no dimension switch.
struct Point {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  Point() = default;
  Point(double x, double y) : c{x, y, 0.0} {}
  Point(double x, double y, double z) : c{x, y, z} {}

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  bool operator==(const Point& o) const = default;
};

inline double distance2(const Point& a, const Point& b) {
  const double dx = a.c[0] - b.c[0], dy = a.c[1] - b.c[1], dz = a.c[2] - b.c[2];
  return dx * dx + dy * dy + dz * dz;
}
double distance(const Point& a, const Point& b);
/// Strict lexicographic comparison on all coordinates.
bool lex_less(const Point& a, const Point& b);
double sup_norm(const Point& p, int dim);

/// Volume of the unit ball in dimension d (2 or 3).
double unit_ball_volume(int dim);

struct Box {
  Point lo, hi;
  bool contains(const Point& p, int dim) const;
  Box expanded(double r, int dim) const;
  double volume(int dim) const;
};

/// Finite simple point configuration, optionally marked.
class PointPattern {
 public:
  explicit PointPattern(int dim = 2);
  PointPattern(int dim, const std::vector<Point>& pts);
  PointPattern(int dim, const std::vector<Point>& pts, const std::vector<double>& marks);

  /// Empty pattern that accepts marks.
  static PointPattern marked(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  bool has_marks() const { return marked_; }

  const Point& operator[](std::size_t i) const { return pts_[i]; }
  double mark(std::size_t i) const { return marks_.at(i); }
  const std::vector<Point>& points() const { return pts_; }
  const std::vector<double>& marks() const { return marks_; }

  /// Appends a point; throws GeometryError on duplicate coordinates.
  void add(const Point& p);
  void add(const Point& p, double mark);
  bool contains(const Point& p) const;

  /// Checks that every mark lies in [0, bound].
  void check_marks(double bound) const;

  PointPattern unmarked() const;
  /// Points (and marks) satisfying the predicate, in original order.
  PointPattern filter(const std::function<bool(const Point&)>& keep) const;
  /// Union with a disjoint unmarked pattern (duplicates are an error).
  PointPattern united(const PointPattern& other) const;
  /// Points sorted lexicographically; used for order-insensitive comparisons.
  std::vector<Point> sorted_points() const;

 private:
  void insert(const Point& p);
  struct PointHash {
    std::size_t operator()(const Point& p) const;
  };
  int dim_;
  bool marked_ = false;
  std::vector<Point> pts_;
  std::vector<double> marks_;
  std::unordered_set<Point, PointHash> index_;
};

bool same_points(const PointPattern& a, const PointPattern& b);

void write_csv(std::ostream& os, const PointPattern& pts);
PointPattern read_csv(std::istream& is);

/// Total order rule iota on space used by the thinning algorithms.
class OrderMap {
 public:
  enum class Kind { distance_to_reference, lexicographic, custom };

  static OrderMap distance_to(const Point& ref);
  static OrderMap lexicographic();
  static OrderMap custom(std::function<double(const Point&)> fn);

  Kind kind() const { return kind_; }
  /// Real-valued key.  For the lexicographic rule this is the first coordinate.
  double value(const Point& p) const;
  /// Total order: by value, ties broken lexicographically.  Returns -1, 0 or 1.
  int compare(const Point& a, const Point& b) const;
  bool less(const Point& a, const Point& b) const { return compare(a, b) < 0; }
  /// True when a and b are different points that the rule alone cannot separate.
  bool tied(const Point& a, const Point& b) const;
  const Point& reference() const { return ref_; }

 private:
  Kind kind_ = Kind::distance_to_reference;
  Point ref_{};
  std::shared_ptr<const std::function<double(const Point&)>> fn_;
};

/// Sorts a pattern ascending in iota.  Throws GeometryError on ties.
PointPattern order_sort(const PointPattern& pts, const OrderMap& iota);

/// Membership-testable subset of R^d, built as an immutable expression tree.
class Region {
 public:
  enum class Kind {
    nothing,
    everything,
    box,
    ball,
    complement,
    unite,
    intersect,
    difference,
    order_cut,
    dilation,
    predicate
  };

  static Region nothing(int dim);
  static Region everything(int dim);
  static Region box(const Point& lo, const Point& hi, int dim);
  static Region ball(const Point& center, double radius, int dim);
  /// Q_n = [-n/2, n/2]^d.
  static Region cube(double side, int dim);
  /// {y : iota(y) > iota(pivot)} when after is true, {y : iota(y) < iota(pivot)} otherwise.
  static Region order_cut(const OrderMap& iota, const Point& pivot, bool after);
  /// Arbitrary predicate with an optional bounding box (nullopt means unbounded).
  static Region predicate(std::function<bool(const Point&)> fn, std::optional<Box> bbox, int dim);

  Region operator|(const Region& o) const;
  Region operator&(const Region& o) const;
  Region operator-(const Region& o) const;
  Region complement() const;
  /// Closed r-neighbourhood B_r(*this).
  Region dilate(double r) const;

  Kind kind() const;
  int dim() const;
  bool contains(const Point& p) const;
  bool bounded() const { return bbox().has_value(); }
  std::optional<Box> bbox() const;
  /// Euclidean distance from p to the closure of the region.  Throws NotComputable for shapes
  /// without an exact formula.
  double distance_to(const Point& p) const;
  bool is_nothing() const { return kind() == Kind::nothing; }

  struct Node;
  explicit Region(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  const Node& node() const { return *node_; }

 private:
  std::shared_ptr<const Node> node_;
};

struct Region::Node {
  Kind kind;
  int dim;
  Point a{}, b{};  // box corners or ball center
  double r = 0.0;  // ball radius or dilation radius
  std::vector<Region> kids{};
  std::optional<OrderMap> iota{};
  bool after = true;
  std::function<bool(const Point&)> fn{};
  std::optional<Box> box{};
};

/// inf of |x - y| over x in A, y in B.  Exact for finite unions of boxes, balls and their
/// dilations; throws NotComputable otherwise.
double dist(const Region& a, const Region& b);

/// Lebesgue measure.  Exact for boxes, balls and a box minus an interior ball; otherwise a
/// midpoint-grid estimate with cell side `resolution`.
double measure(const Region& a, double resolution = 1e-3);

}  // namespace gibbsdc
