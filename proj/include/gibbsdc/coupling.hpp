#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gibbsdc/geometry.hpp"
#include "gibbsdc/models.hpp"
#include "gibbsdc/rng.hpp"
#include "gibbsdc/sampler.hpp"

namespace gibbsdc {

/// Per-cluster comparison of two coupled outputs.  Clusters are those of B_{r0/2}(carrier).
struct ClusterFlag {
  int cluster_id = 0;
  std::size_t size = 0;
  bool agrees = true;
  /// Cluster meets B_{r0/2}(B), i.e. has a point within r0 of B.
  bool touches_b = false;
  double dist_to_b = 0.0;
};

struct CouplingTrace {
  PointPattern out_psi{2};
  PointPattern out_psi_prime{2};
  std::vector<ClusterFlag> clusters;
  /// Every disagreeing cluster touches B.
  bool confined = true;
  std::size_t increments = 0;
  /// Symmetric difference of the two outputs.
  std::vector<Point> disagreement;
};

/// Cluster-based disagreement coupling of the Gibbs processes on Q with boundary conditions psi
/// and psi_prime, which may differ only on B.  Exploration: S_1 = B_{r0}(B) n Q, then growth by
/// r0-balls about carrier points, and when saturated a jump to the iota0-prefix up to and including
/// the smallest unexplored carrier point.
CouplingTrace cluster_coupling(const InteractionModel& m, const Region& q, const Region& b,
                               const PointPattern& psi, const PointPattern& psi_prime,
                               const PointPattern& phi_star, const OrderMap& iota0,
                               const RetentionMode& mode, const RngStream& rng,
                               const SamplerBudget& budget = {});

/// Anchor lattice delta Z^d with the order: larger sup-norm first, ties lexicographic.
struct GridAnchor {
  double delta = 0.0;
  int dim = 2;

  /// delta = r0 / (2 sqrt(d)), the largest spacing with Q_{2 delta} inside B_{r0}.
  static GridAnchor for_range(double r0, int dim);
  /// Lattice points whose r0-ball meets the box, sorted in anchor order.
  std::vector<Point> enumerate(const Box& box, double r0) const;
  bool precedes(const Point& a, const Point& b) const;
};

struct RadialStep {
  Point v;
  double rho = 0.0;
  /// Index of the carrier point decided in this step, or -1 when Z = V.
  long candidate = -1;
  bool from_anchor = true;
  /// V was clipped to B_{r0}(B) (priority sweep).
  bool clipped = false;
};

struct StoppingState {
  std::vector<RadialStep> steps;
  /// Clusters explored, i.e. starts from an anchor that found a carrier point.
  std::size_t clusters_started = 0;
  std::size_t decided = 0;
};

struct RadialResult {
  std::vector<PointPattern> outputs;
  StoppingState state;
};

/// Radial coupling run simultaneously for several boundary conditions; the exploration depends on
/// the carrier only, so the runs share it.  Anchors within B_{r0}(B) are swept first with V clipped
/// to B_{r0}(B); the clusters found there are then followed; afterwards anchors are visited in
/// anchor order and each cluster is followed point by point.
RadialResult radial_coupling_multi(const InteractionModel& m, const Region& q, const Region& b,
                                   const std::vector<PointPattern>& psis,
                                   const PointPattern& phi_star, const GridAnchor& anchors,
                                   const RetentionMode& mode, const RngStream& rng,
                                   const SamplerBudget& budget = {});

RadialResult radial_coupling(const InteractionModel& m, const Region& q, const Region& b,
                             const PointPattern& psi, const PointPattern& phi_star,
                             const GridAnchor& anchors, const RetentionMode& mode,
                             const RngStream& rng, const SamplerBudget& budget = {});

/// Paired radial runs with a confinement certificate.
CouplingTrace radial_coupling_pair(const InteractionModel& m, const Region& q, const Region& b,
                                   const PointPattern& psi, const PointPattern& psi_prime,
                                   const PointPattern& phi_star, const GridAnchor& anchors,
                                   const RetentionMode& mode, const RngStream& rng,
                                   const SamplerBudget& budget = {});

/// Fills clusters, confinement and disagreement of a trace from its two outputs.
void certify(CouplingTrace& trace, const PointPattern& carrier, const Region& b, double r0);

struct ConsistencyResult {
  /// The no-crossing event {A !<~> Q_{n - 4 r0}^c} for the carrier on Q_n.
  bool event = false;
  bool equal_on_a = false;
  /// event implies equality.
  bool implication_holds() const { return !event || equal_on_a; }
};

/// Radial runs on Q_n n U and Q_m n U (B their complements) with a shared cell-keyed carrier and
/// shared keyed randomness, both derived from rng.
ConsistencyResult radial_consistency_check(const InteractionModel& m, const Region& u,
                                           const PointPattern& psi, const Region& a, double n,
                                           double m_side, const RetentionMode& mode,
                                           const RngStream& rng, const SamplerBudget& budget = {});

struct InfiniteVolumeResult {
  PointPattern on_a{2};
  /// Window side at which the certificate held.
  double n_star = 0.0;
  bool certified = false;
};

/// Smallest admissible window side: A inside Q_{n - 4r0} with dist(A, Q_{n-4r0}^c) > r0.
double smallest_admissible_window(const Region& a, double r0, int dim);

/// Steps the window side n by 1 from the smallest admissible value until {A !<~> Q_{n-4r0}^c}
/// holds for the carrier, then returns the radial output on A.  Reports certified = false when
/// n_max is passed first.
InfiniteVolumeResult infinite_volume_approx(const InteractionModel& m, const Region& a,
                                            const PointPattern& psi, const Region& u, double n_max,
                                            const RetentionMode& mode, const RngStream& rng,
                                            const SamplerBudget& budget = {});

}  // namespace gibbsdc
