#pragma once

#include <cstdint>
#include <vector>

#include "gibbsdc/geometry.hpp"

namespace gibbsdc {

/// Connected components of the Boolean model B_{r/2}(phi): points share a label iff they are
/// joined by a chain of steps of length <= r.
struct ClusterPartition {
  std::vector<int> label;
  int count = 0;
  std::vector<Box> bbox;

  std::vector<std::vector<std::size_t>> members() const;
};

ClusterPartition boolean_clusters(const PointPattern& phi, double r);

/// Event {A <~> B}: some cluster of B_{r0/2}(phi) meets both B_{r0/2}(A) and B_{r0/2}(B), or the
/// two neighbourhoods meet directly (dist(A, B) <= r0).
bool connects(const Region& a, const Region& b, const PointPattern& phi, double r0);
/// Same event with precomputed clusters at radius r0.
bool connects(const Region& a, const Region& b, const PointPattern& phi,
              const ClusterPartition& clusters, double r0);

struct DecayRow {
  double s = 0.0;
  double p_hat = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
};

/// Monte Carlo estimate of P(A <~> B_s) with B_s = {z : dist(z, A) >= s} for a Poisson Boolean
/// model of intensity alpha0 on the bounding box of A enlarged by max(s) + margin.
std::vector<DecayRow> decay_curve(double alpha0, double r0, const Region& a,
                                  const std::vector<double>& distances, double margin,
                                  std::size_t reps, std::uint64_t seed, int dim = 2);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
};

/// Weighted least squares of log p_hat on s, weights p_hat reps / (1 - p_hat) (inverse delta-method
/// variance).  Rows with p_hat in {0, 1} carry no usable log value and are skipped.
LogLinearFit fit_log_decay(const std::vector<DecayRow>& rows);

}  // namespace gibbsdc
