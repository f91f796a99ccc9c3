#include "gibbsdc/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gibbsdc {

namespace {

struct Interval {
  long lo, hi;  // inclusive cell indices
};

// Cell indices i whose centres h(i + 1/2) lie in [a, b].
Interval cell_range(double a, double b, double h) {
  return {static_cast<long>(std::ceil(a / h - 0.5)), static_cast<long>(std::floor(b / h - 0.5))};
}

// Cells of the row with transverse centre offset sq (squared distance from the ball centre in the
// other coordinates) covered by the closed ball of radius R about x.
bool row_interval(double xc, double sq, double R, double h, Interval& out) {
  const double w2 = R * R - sq;
  if (w2 < 0.0) return false;
  const double w = std::sqrt(w2);
  out = cell_range(xc - w, xc + w, h);
  return out.lo <= out.hi;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::poisson:
      return "poisson";
    case ModelKind::strauss:
      return "strauss";
    case ModelKind::hard_sphere:
      return "hard_sphere";
    case ModelKind::area_interaction:
      return "area";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "poisson") return ModelKind::poisson;
  if (s == "strauss") return ModelKind::strauss;
  if (s == "hard_sphere" || s == "hardsphere") return ModelKind::hard_sphere;
  if (s == "area" || s == "area_interaction") return ModelKind::area_interaction;
  throw std::invalid_argument("model: unknown kind '" + s + "'");
}

InteractionModel InteractionModel::poisson(double alpha0, double r0, int dim) {
  return {.kind = ModelKind::poisson, .dim = dim, .alpha0 = alpha0, .r0 = r0};
}

InteractionModel InteractionModel::strauss(double alpha0, double r0, double beta, int dim) {
  return {.kind = ModelKind::strauss, .dim = dim, .alpha0 = alpha0, .r0 = r0, .beta = beta};
}

InteractionModel InteractionModel::hard_sphere(double alpha0, double r0, int dim) {
  return {.kind = ModelKind::hard_sphere, .dim = dim, .alpha0 = alpha0, .r0 = r0};
}

InteractionModel InteractionModel::area(double alpha0, double r0, double gamma,
                                        double grid_resolution, int dim) {
  return {.kind = ModelKind::area_interaction,
          .dim = dim,
          .alpha0 = alpha0,
          .r0 = r0,
          .gamma = gamma,
          .grid_resolution = grid_resolution};
}

void InteractionModel::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim: must be 2 or 3");
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0: must be > 0");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw std::invalid_argument("r0: must be > 0");
  if (kind == ModelKind::strauss && !(beta >= 0.0 && std::isfinite(beta)))
    throw std::invalid_argument("beta: must be finite and >= 0");
  if (kind == ModelKind::area_interaction) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma: must lie in (0, 1]");
    if (grid_resolution < 0.0 || (grid_resolution > 0.0 && grid_resolution > r0 / 4.0))
      throw std::invalid_argument("grid_resolution: must lie in (0, r0/4]");
  }
}

double InteractionModel::cell_volume() const { return std::pow(lattice_step(), dim); }

double InteractionModel::kappa_max() const {
  if (kind != ModelKind::area_interaction) return alpha0;
  // Every counted cell centre lies in B_{r0/2}(x), so the cells lie in a ball of radius
  // r0/2 + h sqrt(d)/2.
  const double h = lattice_step();
  const double R = r0 / 2.0 + h * std::sqrt(static_cast<double>(dim)) / 2.0;
  const double vmax = unit_ball_volume(dim) * std::pow(R, dim);
  return alpha0 * std::exp(-std::log(gamma) * vmax);
}

long InteractionModel::uncovered_cells(const Point& x, std::span<const Point> nbrs) const {
  const double h = lattice_step();
  const double R = r0 / 2.0;
  const double reach2 = r0 * r0;
  std::vector<Point> near;
  for (const auto& y : nbrs)
    if (distance2(x, y) <= reach2) near.push_back(y);

  long uncovered = 0;
  std::vector<Interval> cover;
  const Interval rows = cell_range(x[1] - R, x[1] + R, h);
  const Interval layers = dim == 3 ? cell_range(x[2] - R, x[2] + R, h) : Interval{0, 0};
  for (long k = layers.lo; k <= layers.hi; ++k) {
    const double zc = dim == 3 ? h * (static_cast<double>(k) + 0.5) : 0.0;
    for (long j = rows.lo; j <= rows.hi; ++j) {
      const double yc = h * (static_cast<double>(j) + 0.5);
      auto offset = [&](const Point& c) {
        const double dy = yc - c[1];
        const double dz = dim == 3 ? zc - c[2] : 0.0;
        return dy * dy + dz * dz;
      };
      Interval own;
      if (!row_interval(x[0], offset(x), R, h, own)) continue;
      cover.clear();
      for (const auto& y : near) {
        Interval iv;
        if (!row_interval(y[0], offset(y), R, h, iv)) continue;
        iv.lo = std::max(iv.lo, own.lo);
        iv.hi = std::min(iv.hi, own.hi);
        if (iv.lo <= iv.hi) cover.push_back(iv);
      }
      long covered = 0;
      if (!cover.empty()) {
        std::sort(cover.begin(), cover.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        long cur_lo = cover[0].lo, cur_hi = cover[0].hi;
        for (std::size_t t = 1; t < cover.size(); ++t) {
          if (cover[t].lo > cur_hi + 1) {
            covered += cur_hi - cur_lo + 1;
            cur_lo = cover[t].lo;
            cur_hi = cover[t].hi;
          } else {
            cur_hi = std::max(cur_hi, cover[t].hi);
          }
        }
        covered += cur_hi - cur_lo + 1;
      }
      uncovered += (own.hi - own.lo + 1) - covered;
    }
  }
  return uncovered;
}

double InteractionModel::kappa(const Point& x, std::span<const Point> nbrs) const {
  switch (kind) {
    case ModelKind::poisson:
      return alpha0;
    case ModelKind::strauss: {
      if (beta == 0.0) return alpha0;
      const double r2 = r0 * r0;
      long n = 0;
      for (const auto& y : nbrs)
        if (distance2(x, y) <= r2) ++n;
      return alpha0 * std::exp(-beta * static_cast<double>(n));
    }
    case ModelKind::hard_sphere: {
      const double r2 = r0 * r0;
      for (const auto& y : nbrs)
        if (distance2(x, y) <= r2) return 0.0;
      return alpha0;
    }
    case ModelKind::area_interaction: {
      const double v = static_cast<double>(uncovered_cells(x, nbrs)) * cell_volume();
      return alpha0 * std::exp(-std::log(gamma) * v);
    }
  }
  return 0.0;
}

double InteractionModel::kappa(const Point& x, const PointPattern& phi) const {
  return kappa(x, std::span<const Point>(phi.points()));
}

double configuration_density(const InteractionModel& m, const PointPattern& phi,
                             const PointPattern& psi) {
  const std::size_t n = phi.size();
  if (n == 0) return 1.0;
  std::vector<Point> context(psi.points());
  long total = 0;  // interaction count or uncovered cells, summed over the enumeration
  for (std::size_t i = 0; i < n; ++i) {
    const Point& x = phi[i];
    switch (m.kind) {
      case ModelKind::poisson:
        break;
      case ModelKind::strauss:
      case ModelKind::hard_sphere: {
        const double r2 = m.r0 * m.r0;
        for (const auto& y : context)
          if (distance2(x, y) <= r2) ++total;
        break;
      }
      case ModelKind::area_interaction:
        total += m.uncovered_cells(x, context);
        break;
    }
    context.push_back(x);
  }
  const double base = std::pow(m.alpha0, static_cast<double>(n));
  switch (m.kind) {
    case ModelKind::poisson:
      return base;
    case ModelKind::strauss:
      return base * std::exp(-m.beta * static_cast<double>(total));
    case ModelKind::hard_sphere:
      return total > 0 ? 0.0 : base;
    case ModelKind::area_interaction:
      return base * std::exp(-std::log(m.gamma) * m.cell_volume() * static_cast<double>(total));
  }
  return 0.0;
}

}  // namespace gibbsdc
