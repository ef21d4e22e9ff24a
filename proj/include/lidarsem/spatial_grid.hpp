#ifndef LIDARSEM_SPATIAL_GRID_HPP
#define LIDARSEM_SPATIAL_GRID_HPP

#include <span>
#include <unordered_map>
#include <vector>

#include "lidarsem/se3.hpp"

namespace lidarsem {

// Uniform voxel hash for nearest-neighbor and radius queries. Ties in
// distance resolve to the lowest point index.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Vec3> points, double cell_size);

  // Index of the nearest point within max_dist, or -1.
  int nearest(const Vec3& q, double max_dist) const;

  std::vector<int> radius(const Vec3& q, double r) const;

  // k nearest (excluding exact index `exclude` if >= 0), sorted by
  // (distance, index). May return fewer than k.
  std::vector<int> knn(const Vec3& q, int k, int exclude = -1) const;

 private:
  struct Key {
    int64_t v;
    bool operator==(const Key& o) const { return v == o.v; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<int64_t>()(k.v * 0x9E3779B97F4A7C15ll);
    }
  };

  Key key_of(int ix, int iy, int iz) const;
  Key key_of(const Vec3& p) const;

  std::vector<Vec3> points_;
  double cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> cells_;
};

}  // namespace lidarsem

#endif
