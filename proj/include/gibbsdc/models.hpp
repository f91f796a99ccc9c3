#pragma once

#include <span>
#include <string>

#include "gibbsdc/geometry.hpp"

namespace gibbsdc {

enum class ModelKind { poisson, strauss, hard_sphere, area_interaction };

std::string to_string(ModelKind k);
/// Accepts poisson, strauss, hard_sphere and area (or area_interaction).
ModelKind parse_model_kind(const std::string& s);

/// Papangelou conditional intensity with finite range r0 and a domination bound.
struct InteractionModel {
  ModelKind kind = ModelKind::poisson;
  int dim = 2;
  double alpha0 = 1.0;
  double r0 = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  /// Lattice step for the area-interaction uncovered volume; 0 selects r0 / 200.
  double grid_resolution = 0.0;

  static InteractionModel poisson(double alpha0, double r0 = 1.0, int dim = 2);
  static InteractionModel strauss(double alpha0, double r0, double beta, int dim = 2);
  static InteractionModel hard_sphere(double alpha0, double r0, int dim = 2);
  static InteractionModel area(double alpha0, double r0, double gamma, double grid_resolution = 0.0,
                               int dim = 2);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  double kappa_max() const;
  /// True when kappa does not depend on the configuration.
  bool constant() const { return kind == ModelKind::poisson || (kind == ModelKind::strauss && beta == 0.0); }

  /// kappa(x, nbrs); points of nbrs farther than r0 from x are ignored, x itself must not occur.
  double kappa(const Point& x, std::span<const Point> nbrs) const;
  double kappa(const Point& x, const PointPattern& phi) const;

  /// Area interaction: number of lattice cells of B_{r0/2}(x) not covered by B_{r0/2}(nbrs).
  long uncovered_cells(const Point& x, std::span<const Point> nbrs) const;
  double lattice_step() const { return grid_resolution > 0.0 ? grid_resolution : r0 / 200.0; }
  double cell_volume() const;
};

/// prod_i kappa(x_i, {x_1..x_{i-1}} u psi) for the enumeration order of phi.  Interaction counts
/// are accumulated as integers, so the value does not depend on that order.
double configuration_density(const InteractionModel& m, const PointPattern& phi,
                             const PointPattern& psi);

}  // namespace gibbsdc
