#include "lidarsem/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

// Part of rigid_flow/cluster_eval support; not a public module surface.
namespace lidarsem {

SpatialGrid::SpatialGrid(std::span<const Vec3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(cell_size) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cells_[key_of(points_[i])].push_back(int(i));
  }
}

SpatialGrid::Key SpatialGrid::key_of(int ix, int iy, int iz) const {
  // 21 bits per axis, offset to keep them positive
  const int64_t off = 1 << 20;
  return Key{((int64_t(ix) + off) << 42) | ((int64_t(iy) + off) << 21) |
             (int64_t(iz) + off)};
}

SpatialGrid::Key SpatialGrid::key_of(const Vec3& p) const {
  return key_of(int(std::floor(p.x() / cell_)), int(std::floor(p.y() / cell_)),
                int(std::floor(p.z() / cell_)));
}

int SpatialGrid::nearest(const Vec3& q, double max_dist) const {
  int best = -1;
  double best_d2 = max_dist * max_dist;
  int cx = int(std::floor(q.x() / cell_));
  int cy = int(std::floor(q.y() / cell_));
  int cz = int(std::floor(q.z() / cell_));
  int reach = int(std::ceil(max_dist / cell_));
  for (int ring = 0; ring <= reach; ++ring) {
    // Cells with Chebyshev distance > ring+... beyond current best can stop.
    double ring_min = ring > 0 ? (ring - 1) * cell_ : 0.0;
    if (best >= 0 && ring_min * ring_min > best_d2) break;
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          auto it = cells_.find(key_of(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            double d2 = (points_[i] - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && (best < 0 || i < best))) {
              best_d2 = d2;
              best = i;
            }
          }
        }
      }
    }
  }
  return best;
}

std::vector<int> SpatialGrid::radius(const Vec3& q, double r) const {
  std::vector<int> out;
  double r2 = r * r;
  int cx = int(std::floor(q.x() / cell_));
  int cy = int(std::floor(q.y() / cell_));
  int cz = int(std::floor(q.z() / cell_));
  int reach = int(std::ceil(r / cell_));
  for (int dx = -reach; dx <= reach; ++dx) {
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dz = -reach; dz <= reach; ++dz) {
        auto it = cells_.find(key_of(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (int i : it->second) {
          if ((points_[i] - q).squaredNorm() <= r2) out.push_back(i);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> SpatialGrid::knn(const Vec3& q, int k, int exclude) const {
  using Entry = std::pair<double, int>;  // (dist2, index)
  std::vector<Entry> found;
  int cx = int(std::floor(q.x() / cell_));
  int cy = int(std::floor(q.y() / cell_));
  int cz = int(std::floor(q.z() / cell_));

  double worst = std::numeric_limits<double>::infinity();
  for (int ring = 0;; ++ring) {
    double ring_min = ring > 0 ? (ring - 1) * cell_ : 0.0;
    if (int(found.size()) >= k && ring_min * ring_min > worst) break;
    if (ring > 2048) break;  // empty space guard
    bool any_cell = false;
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          auto it = cells_.find(key_of(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          any_cell = true;
          for (int i : it->second) {
            if (i == exclude) continue;
            found.emplace_back((points_[i] - q).squaredNorm(), i);
          }
        }
      }
    }
    if (int(found.size()) >= k) {
      std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
      worst = found[k - 1].first;
    }
    if (!any_cell && ring * cell_ > 1e6) break;
  }
  std::sort(found.begin(), found.end());
  if (int(found.size()) > k) found.resize(k);
  std::vector<int> out;
  out.reserve(found.size());
  for (const Entry& e : found) out.push_back(e.second);
  return out;
}

}  // namespace lidarsem
