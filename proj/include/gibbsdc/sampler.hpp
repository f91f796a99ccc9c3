#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsdc/geometry.hpp"
#include "gibbsdc/models.hpp"
#include "gibbsdc/rng.hpp"
#include "gibbsdc/spatial_hash.hpp"

namespace gibbsdc {

/// A rejection loop or a retention recursion ran past its configured budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RetentionMode {
  enum class Kind { exact_recursive, plugin_estimate, terminal_only };
  Kind kind = Kind::exact_recursive;
  int samples = 1;

  static RetentionMode exact() { return {}; }
  static RetentionMode plugin(int m);
  static RetentionMode terminal() { return {Kind::terminal_only, 1}; }
};

struct SamplerBudget {
  /// Recursion nodes allowed per retention decision.
  std::uint64_t retention_work = 20'000'000;
  /// Proposals allowed per rejection sample.
  std::uint64_t rejection_iterations = 10'000'000;
};

/// Homogeneous Poisson process of intensity kappa_max on Q with uniform marks on [0, kappa_max].
PointPattern sample_marked_poisson(const Region& q, double kappa_max, RngStream& rng, int dim);

/// Marked Poisson carrier generated per unit lattice cell with cell-keyed streams, so that the
/// carriers of nested windows agree on their intersection.
PointPattern sample_carrier(const Region& q, double kappa_max, std::uint64_t seed, int dim);

/// Exact sample of the Gibbs process on Q with boundary psi by Poisson proposal and rejection.
PointPattern rejection_sample_gibbs(const InteractionModel& m, const Region& q,
                                    const PointPattern& psi, RngStream& rng,
                                    const SamplerBudget& budget = {});

/// Recursive estimator of the retention threshold.  One draw is kappa(x, Y u boundary) with Y an
/// exact sample on the part of the remainder within r0 of x, obtained by thinning a fresh
/// Poisson sample ordered by distance from x.  Streams are keyed by the caller's key and the
/// identity of each fresh point.
class RetentionEngine {
 public:
  RetentionEngine(const InteractionModel& m, std::uint64_t seed, const SamplerBudget& budget = {});

  /// Estimate according to `mode`.  `upper` must be kappa(x, boundary); it is returned as is for
  /// constant models and bounds every draw from above.
  double estimate(const Point& x, double upper, const Region& remainder, const ConfigView& boundary,
                  const RetentionMode& mode, std::uint64_t key);

  /// kappa(x, boundary within r0).
  double kappa_at(const Point& x, const ConfigView& boundary);

  std::uint64_t work() const { return work_; }

 private:
  struct Exclusion {
    Point center;
    double radius2;
    const Exclusion* parent;
  };
  double draw(const Point& x, double upper, const Region& base, const Exclusion* excl,
              const ConfigView& boundary, std::uint64_t key);
  bool in_remainder(const Point& p, const Region& base, const Exclusion* excl) const;

  const InteractionModel& model_;
  std::uint64_t seed_;
  SamplerBudget budget_;
  std::uint64_t work_ = 0;
  std::uint64_t call_start_ = 0;
  std::vector<Point> scratch_;
};

/// p(x, remainder, psi') under `mode`.  Randomness is taken from the identity of rng.
double retention_probability(const InteractionModel& m, const Point& x, const Region& remainder,
                             const PointPattern& psi_prime, const RetentionMode& mode,
                             const RngStream& rng, const SamplerBudget& budget = {});

/// Key of the auxiliary randomness used to decide candidate (x, u) in a run keyed by rng.
std::uint64_t candidate_key(const RngStream& rng, const Point& x, double u);

/// Standard Poisson embedding T_{Q, psi, iota}: candidates of phi_star in iota order, each kept
/// iff its mark is at most its retention threshold given psi and the points kept so far.
PointPattern standard_thinning(const InteractionModel& m, const Region& q, const PointPattern& psi,
                               const OrderMap& iota, const PointPattern& phi_star,
                               const RetentionMode& mode, const RngStream& rng,
                               const SamplerBudget& budget = {});

enum class SamplingRoute { rejection, thinning_exact, thinning_plugin, infinite_volume, automatic };

struct RouteSpec {
  SamplingRoute route = SamplingRoute::automatic;
  int plugin_samples = 1;
};

/// Parses rejection | thinning-exact | thinning-plugin:<M> | infinite-volume | auto.
RouteSpec parse_route(const std::string& s);
std::string to_string(const RouteSpec& r);

/// Sample on a bounded window by rejection or thinning.  `automatic` picks rejection when
/// kappa_max |Q| <= 8 and exact thinning otherwise.
PointPattern sample_window(const InteractionModel& m, const Region& q, const PointPattern& psi,
                           const RouteSpec& route, const RngStream& rng,
                           const SamplerBudget& budget = {});

using TestFunction = std::function<double(const Point&, const PointPattern&)>;

struct GnzResult {
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  /// |lhs - rhs| / sqrt(lhs_se^2 + rhs_se^2).
  double z() const;
};

/// Monte Carlo estimates of both sides of the GNZ equation on Q with boundary psi:
/// E sum_{x in X} f(x, X) against int_Q E f(x, X u {x}) kappa(x, X u psi) dx, the latter by
/// `points_per_rep` uniform locations per replicate.
GnzResult gnz_balance(const InteractionModel& m, const Region& q, const PointPattern& psi,
                      const TestFunction& f, std::size_t reps, std::size_t points_per_rep,
                      const RouteSpec& route, std::uint64_t seed);

}  // namespace gibbsdc
