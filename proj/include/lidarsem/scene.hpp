#ifndef LIDARSEM_SCENE_HPP
#define LIDARSEM_SCENE_HPP

#include <filesystem>
#include <vector>

#include "lidarsem/config.hpp"
#include "lidarsem/core.hpp"
#include "lidarsem/se3.hpp"

namespace lidarsem {

// Ray-cast scene generator with exact per-point ground truth.
// Config schema (see docs/scene_config.md):
//   [scene]   ground_z, ground_intensity, frames, range_max
//   [sensor]  rings, azimuth_count, elev_min_deg, elev_max_deg,
//             start = "x y z", yaw_deg, velocity = "vx vy vz", yaw_rate_deg
//   [box]     kind = static|parked|moving, center = "x y z", size = "sx sy sz",
//             yaw_deg, velocity = "vx vy vz" (m/frame), intensity, difficulty
struct SceneBox {
  enum class Kind { Static, Parked, Moving };
  Kind kind = Kind::Static;
  Vec3 center = Vec3::Zero();  // world frame at t = 0
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;
  Vec3 velocity = Vec3::Zero();  // m/frame, moving boxes
  double intensity = 0.7;
  Difficulty difficulty = Difficulty::Easy;
};

struct SceneConfig {
  bool has_ground = true;
  double ground_z = -1.73;
  double ground_intensity = 0.3;
  int frames = 1;
  double range_max = 80.0;

  int rings = 64;
  int azimuth_count = 870;
  double elev_min_deg = -24.8;
  double elev_max_deg = 2.0;

  Vec3 sensor_start = Vec3::Zero();
  double sensor_yaw0 = 0.0;
  Vec3 sensor_velocity = Vec3::Zero();  // m/frame
  double sensor_yaw_rate = 0.0;         // rad/frame

  std::vector<SceneBox> boxes;
};

struct SynthFrame {
  PointCloud cloud;  // sensor frame
  GroundTruth gt;    // boxes in sensor frame; box ids only for parked/moving
  Pose pose;         // world <- sensor
};

SceneConfig parse_scene_config(const IniFile& ini);
SceneConfig parse_scene_config(const std::filesystem::path& path);

Pose sensor_pose(const SceneConfig& cfg, int t);
SynthFrame synth_scene(const SceneConfig& cfg, int t);

}  // namespace lidarsem

#endif
