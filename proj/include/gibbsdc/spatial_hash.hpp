#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gibbsdc/geometry.hpp"

namespace gibbsdc {

/// Uniform-grid hash for fixed-radius neighbour queries.
class SpatialHash {
 public:
  SpatialHash(double cell, int dim) : cell_(cell), inv_(1.0 / cell), dim_(dim) {}

  void insert(const Point& p, std::size_t id) {
    cells_[key(p)].push_back({p, id});
    ++count_;
  }

  /// Calls f(point, id) for every stored point with |p - x| <= r.
  template <class F>
  void for_each_near(const Point& x, double r, F&& f) const {
    if (count_ == 0) return;
    const long reach = static_cast<long>(std::ceil(r * inv_));
    const long cx = coord(x[0]), cy = coord(x[1]), cz = dim_ == 3 ? coord(x[2]) : 0;
    const long zr = dim_ == 3 ? reach : 0;
    const double r2 = r * r;
    for (long i = cx - reach; i <= cx + reach; ++i)
      for (long j = cy - reach; j <= cy + reach; ++j)
        for (long k = cz - zr; k <= cz + zr; ++k) {
          auto it = cells_.find(pack(i, j, k));
          if (it == cells_.end()) continue;
          for (const auto& e : it->second)
            if (distance2(e.p, x) <= r2) f(e.p, e.id);
        }
  }

  bool any_near(const Point& x, double r) const {
    bool found = false;
    for_each_near(x, r, [&](const Point&, std::size_t) { found = true; });
    return found;
  }

  std::size_t size() const { return count_; }
  double cell() const { return cell_; }

 private:
  struct Entry {
    Point p;
    std::size_t id;
  };
  long coord(double v) const { return static_cast<long>(std::floor(v * inv_)); }
  static std::uint64_t pack(long i, long j, long k) {
    constexpr long off = 1L << 20;
    return (static_cast<std::uint64_t>(i + off) & 0x1FFFFF) |
           ((static_cast<std::uint64_t>(j + off) & 0x1FFFFF) << 21) |
           ((static_cast<std::uint64_t>(k + off) & 0x1FFFFF) << 42);
  }
  std::uint64_t key(const Point& p) const {
    return pack(coord(p[0]), coord(p[1]), dim_ == 3 ? coord(p[2]) : 0);
  }

  double cell_, inv_;
  int dim_;
  std::size_t count_ = 0;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
};

/// Read-only configuration assembled from layers without copying: a hashed layer, a short
/// list, and a parent view.  Used as the boundary condition of thinning decisions.
struct ConfigView {
  const SpatialHash* hash = nullptr;
  const std::vector<Point>* list = nullptr;
  const ConfigView* parent = nullptr;

  /// Appends every point within r of x.
  void gather(const Point& x, double r, std::vector<Point>& out) const {
    const double r2 = r * r;
    for (const ConfigView* v = this; v; v = v->parent) {
      if (v->hash) v->hash->for_each_near(x, r, [&](const Point& p, std::size_t) { out.push_back(p); });
      if (v->list)
        for (const auto& p : *v->list)
          if (distance2(p, x) <= r2) out.push_back(p);
    }
  }
};

}  // namespace gibbsdc
