#ifndef LIDARSEM_CORE_HPP
#define LIDARSEM_CORE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidarsem {

// Exit-code oriented error categories (0 ok, 1 config, 2 data, 3 numerical).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PointClass : uint8_t { NonMovable = 0, Movable = 1, Dynamic = 2 };

inline const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::NonMovable: return "non-movable";
    case PointClass::Movable: return "movable";
    case PointClass::Dynamic: return "dynamic";
  }
  return "?";
}

enum class Difficulty : uint8_t { Easy = 0, Moderate = 1, Hard = 2 };

// Sensor frame: x forward, y left, z up (Velodyne convention).
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // clamped to [0,1]
};

struct PointCloud {
  std::vector<Point> points;  // index is the point's identity downstream
  int frame_id = 0;
  double timestamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct GroundTruthBox {
  int id = -1;
  double cx = 0, cy = 0, cz = 0;  // sensor frame
  double sx = 0, sy = 0, sz = 0;
  double yaw = 0;
  Difficulty difficulty = Difficulty::Easy;
};

struct GroundTruth {
  std::vector<PointClass> labels;  // one per point
  std::vector<int> box_ids;        // -1 for points not on an object
  std::vector<GroundTruthBox> boxes;
};

}  // namespace lidarsem

#endif
