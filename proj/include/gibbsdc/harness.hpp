#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gibbsdc/coupling.hpp"
#include "gibbsdc/functionals.hpp"
#include "gibbsdc/models.hpp"
#include "gibbsdc/sampler.hpp"

namespace gibbsdc {

struct ExperimentRow {
  double n = 0.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  /// Empty for usable rows; otherwise infinite, budget or uncertified.
  std::string flag;
};

struct WindowSummary {
  double n = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  double mean = 0.0;
  /// Unbiased sample variance.
  double variance = 0.0;
  /// variance / |Q_n|.
  double normalized_variance = 0.0;
  /// Kolmogorov distance of the studentized values to N(0, 1); NaN with fewer than 2 values.
  double ks = 0.0;
};

struct ExperimentTable {
  int dim = 2;
  std::vector<ExperimentRow> rows;

  std::vector<double> windows() const;
  /// Unflagged values for window n, in replicate order.
  std::vector<double> values(double n) const;
  std::vector<WindowSummary> summarize() const;
  void write_csv(std::ostream& os) const;
};

/// Seed of replicate `rep` at window n, a pure function of its arguments.
std::uint64_t replicate_seed(std::uint64_t master, double n, std::size_t rep);

/// Functional of a sample X on the enlarged window, evaluated for the observation window Q_n.
using WindowFunctional = std::function<double(const PointPattern& x, const Region& q_n)>;

struct HarnessOptions {
  /// rejection, thinning-exact, thinning-plugin:<M>, infinite-volume or auto (rejection on tiny
  /// windows, infinite-volume otherwise).
  RouteSpec route{};
  /// X is sampled on Q_{n + 2 margin}.
  double margin = 0.0;
  SamplerBudget budget{};
  /// Largest window the infinite-volume route may try is n + 2 margin + extra_window.
  double extra_window = 20.0;
};

/// One value per (n, replicate).  Replicates run in parallel; rows are ordered by (n, rep).
ExperimentTable replicate_functional(const InteractionModel& m, const WindowFunctional& h,
                                     const std::vector<double>& n_list, std::size_t reps,
                                     std::uint64_t seed, const HarnessOptions& options);

/// Score-sum version.  A negative margin selects the default: 0 for the restricted variant and
/// whole-pattern functionals, otherwise max(r0, 3 sqrt(k / (pi kappa_max))) in d = 2 (the cube
/// root analogue in d = 3) for kNN scores and max(r0, 3 / sqrt(kappa_max)) for Voronoi.
ExperimentTable replicate_functional(const InteractionModel& m, const ScoreSpec& spec,
                                     ScoreVariant variant, const std::vector<double>& n_list,
                                     std::size_t reps, std::uint64_t seed, HarnessOptions options);

double default_margin(const InteractionModel& m, const ScoreSpec& spec, ScoreVariant variant);

struct VarianceRow {
  double n = 0.0;
  double normalized_variance = 0.0;
  /// |v_i - v_{i-1}| / v_{i-1}; NaN for the first window.
  double relative_change = 0.0;
};

std::vector<VarianceRow> variance_scaling(const ExperimentTable& table);

/// (x - mean) / sd with the empirical mean and unbiased sd.  Throws on zero variance.
std::vector<double> standardize(const std::vector<double>& values);

double normal_cdf(double x);

/// sup_u |F_N(u) - Phi(u)| evaluated exactly at the jump points of the empirical CDF.
double ks_distance(std::vector<double> samples);

struct DecayExperimentRow {
  double s = 0.0;
  std::size_t reps = 0;
  double p_disagree = 0.0, se_disagree = 0.0;
  double p_connect = 0.0, se_connect = 0.0;
  /// Realizations with disagreement on A but no connection A <~> B.
  std::size_t dominance_violations = 0;
  /// Realizations where a coupling certificate failed.
  std::size_t confinement_violations = 0;
  /// Disagreements on A in the psi = psi' control arm.
  std::size_t control_disagreements = 0;
};

struct DecayExperimentOptions {
  double margin = 1.5;
  /// Spacing of the lattice boundary condition placed in B.
  double lattice_spacing = 0.15;
  RetentionMode mode{};
  SamplerBudget budget{};
};

/// A = [0,1]^2, B_s = [1+s, 2+s] x [0,1], Q = [-margin, 1+s] x [-margin, 1+margin].  Paired radial
/// couplings with psi = {} and psi' = a lattice in B on a common carrier, plus a psi = psi'
/// control arm.
std::vector<DecayExperimentRow> disagreement_decay_experiment(const InteractionModel& m,
                                                              const std::vector<double>& distances,
                                                              std::size_t reps, std::uint64_t seed,
                                                              const DecayExperimentOptions& options = {});

void write_decay_csv(std::ostream& os, const std::vector<DecayExperimentRow>& rows);

enum class CouplingAlgo { radial, cluster };
CouplingAlgo parse_coupling_algo(const std::string& s);

struct CouplingRow {
  std::size_t rep = 0;
  ClusterFlag cluster;
};

struct CouplingExperiment {
  std::size_t reps = 0;
  /// Runs whose confinement certificate failed.
  std::size_t violations = 0;
  /// Runs whose two outputs differ somewhere.
  std::size_t disagreeing_runs = 0;
  std::vector<CouplingRow> rows;
};

/// Points of the lattice spacing * (Z^d + 1/2) inside the box.
PointPattern lattice_in_box(const Box& box, double spacing, int dim);

/// Paired couplings on Q_n (centred cube) with psi = {} against a lattice boundary in the box B,
/// which must lie outside Q_n.  One row per Boolean cluster per replicate.
CouplingExperiment coupling_experiment(const InteractionModel& m, CouplingAlgo algo, double n,
                                       const Box& b, std::size_t reps, std::uint64_t seed,
                                       const RetentionMode& mode = {}, double lattice_spacing = 0.15,
                                       const SamplerBudget& budget = {});

void write_coupling_csv(std::ostream& os, const CouplingExperiment& e);

}  // namespace gibbsdc
