#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsdc/geometry.hpp"

namespace gibbsdc {

inline constexpr double kInfiniteScore = std::numeric_limits<double>::infinity();

/// A score sum met a point whose score is infinite.
struct InfiniteScore : std::runtime_error {
  Point where;
  InfiniteScore(const std::string& what, const Point& p) : std::runtime_error(what), where(p) {}
};

struct ScoreSpec {
  enum class Kind { knn_length, knn_large_edge, voronoi_perimeter, mst_total, betti };
  Kind kind = Kind::knn_length;
  int k = 4;
  double a = 1.0;
  int q = 0;
  double r = 0.0, s = 0.0;

  /// knn-length:k=4 | knn-large:k=4,a=1.0 | voronoi | mst | betti:q=1,r=0.5,s=0.8
  static ScoreSpec parse(const std::string& text);
  std::string to_string() const;
  void validate(int dim) const;
  /// True for scores defined per point; mst and betti are whole-pattern functionals.
  bool per_point() const;
};

/// Indices of the k nearest other points of every point (ties by index).  Rows are shorter than
/// k when the pattern has at most k points.
std::vector<std::vector<std::size_t>> knn_lists(const PointPattern& phi, int k);

/// Half the total length of the symmetric kNN edges at x = phi[i]; infinite when #phi <= k.
double knn_score(const PointPattern& phi, std::size_t i, int k);
/// All kNN scores at once.
std::vector<double> knn_scores(const PointPattern& phi, int k);
/// Total length of the symmetric kNN graph.
double knn_total_length(const PointPattern& phi, int k);

/// Distance from phi[i] to its k-th nearest other point; infinite with fewer than k others.
double kth_nn_distance(const PointPattern& phi, std::size_t i, int k);
/// 1 if the k-th nearest neighbour distance is at least a.
int knn_large_edge(const PointPattern& phi, std::size_t i, int k, double a);

/// Radius R with g(x, phi) = g(x, phi n B_R(x)) for the kNN length score, from the k-th nearest
/// point in each of six 60-degree cones (d = 2).  Infinite if a cone holds fewer than k points.
double knn_stabilization_radius(const PointPattern& phi, std::size_t i, int k);

struct VoronoiCell {
  bool bounded = false;
  /// Counter-clockwise vertices; the edge from vertex j to j+1 lies on the bisector with
  /// neighbour[j].
  std::vector<Point> vertices;
  std::vector<std::size_t> neighbour;
  double perimeter() const;
};

/// Voronoi cell of phi[i] by half-plane clipping (d = 2).
VoronoiCell voronoi_cell(const PointPattern& phi, std::size_t i);
/// Half the perimeter of the cell of phi[i]; infinite for unbounded cells.
double voronoi_score(const PointPattern& phi, std::size_t i);

struct Edge {
  std::size_t u, v;
  double length;
};
/// Euclidean minimum spanning tree: Kruskal over all pairs up to 2000 points, dense Prim above.
std::vector<Edge> mst_edges(const PointPattern& phi);
double mst_total_length(const PointPattern& phi);

struct PersistencePair {
  int dim;
  double birth;
  double death;  // infinity for essential classes
};
using PersistenceDiagram = std::vector<PersistencePair>;

/// Cech filtration up to triangles, truncated at filtration value max_value, reduced over Z/2.
/// Classes still alive at max_value are reported as essential.  Triangles need d = 2.
PersistenceDiagram persistence_diagram(const PointPattern& phi, double max_value, int max_dim = 1);

/// beta_q^{r,s} for q in {0, 1}.
int persistent_betti(const PointPattern& phi, int q, double r, double s);

/// Value of a per-point score at phi[i].
double score(const ScoreSpec& spec, const PointPattern& phi, std::size_t i);

enum class ScoreVariant { full, restricted };
ScoreVariant parse_variant(const std::string& s);

/// H(phi) = sum over x in phi n Q of g(x, phi) (full) or g(x, phi n Q) (restricted).  Whole-pattern
/// functionals are evaluated on phi n Q.  Throws InfiniteScore at the first infinite score.
double score_sum(const PointPattern& phi, const ScoreSpec& spec, const Region& q,
                 ScoreVariant variant);

/// Whole-pattern value of the functional with Q = all space.
double functional_value(const ScoreSpec& spec, const PointPattern& phi);

using Functional = std::function<double(const PointPattern&)>;

/// H(phi u {y}) - H(phi).
double add_one_cost(const Functional& h, const PointPattern& phi, const Point& y);
double add_one_cost(const ScoreSpec& spec, const PointPattern& phi, const Point& y);

}  // namespace gibbsdc
