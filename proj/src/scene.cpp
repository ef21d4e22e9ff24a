#include "lidarsem/scene.hpp"

#include <cmath>
#include <limits>

namespace lidarsem {

namespace {

constexpr double kDeg = M_PI / 180.0;
constexpr double kMinRange = 0.5;

Mat3 yaw_rotation(double yaw) {
  Mat3 R;
  double c = std::cos(yaw), s = std::sin(yaw);
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

Vec3 parse_vec3(const IniSection& sec, const std::string& key, const Vec3& fallback) {
  if (!sec.has(key)) return fallback;
  std::vector<double> v = sec.get_doubles(key);
  if (v.size() != 3) {
    throw ConfigError("[" + sec.name + "] " + key + ": expected 3 numbers");
  }
  return Vec3(v[0], v[1], v[2]);
}

Difficulty parse_difficulty(const std::string& s) {
  if (s == "easy") return Difficulty::Easy;
  if (s == "moderate") return Difficulty::Moderate;
  if (s == "hard") return Difficulty::Hard;
  throw ConfigError("unknown difficulty: " + s);
}

// Slab test in the box's own frame. Returns smallest hit parameter in
// (t_min, t_max], or infinity.
double ray_box(const Vec3& origin, const Vec3& dir, const Vec3& center, double yaw,
               const Vec3& size, double t_min, double t_max) {
  Mat3 Rinv = yaw_rotation(-yaw);
  Vec3 o = Rinv * (origin - center);
  Vec3 d = Rinv * dir;
  double lo = t_min, hi = t_max;
  for (int a = 0; a < 3; ++a) {
    double h = size[a] * 0.5;
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -h || o[a] > h) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-h - o[a]) / d[a];
    double t1 = (h - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return std::numeric_limits<double>::infinity();
  }
  return lo > t_min ? lo : std::numeric_limits<double>::infinity();
}

}  // namespace

SceneConfig parse_scene_config(const IniFile& ini) {
  SceneConfig cfg;
  if (const IniSection* s = ini.find("scene")) {
    cfg.has_ground = s->get_bool("ground", true);
    cfg.ground_z = s->get_double("ground_z", cfg.ground_z);
    cfg.ground_intensity = s->get_double("ground_intensity", cfg.ground_intensity);
    cfg.frames = s->get_int("frames", cfg.frames);
    cfg.range_max = s->get_double("range_max", cfg.range_max);
  }
  if (const IniSection* s = ini.find("sensor")) {
    cfg.rings = s->get_int("rings", cfg.rings);
    cfg.azimuth_count = s->get_int("azimuth_count", cfg.azimuth_count);
    cfg.elev_min_deg = s->get_double("elev_min_deg", cfg.elev_min_deg);
    cfg.elev_max_deg = s->get_double("elev_max_deg", cfg.elev_max_deg);
    cfg.sensor_start = parse_vec3(*s, "start", cfg.sensor_start);
    cfg.sensor_yaw0 = s->get_double("yaw_deg", 0.0) * kDeg;
    cfg.sensor_velocity = parse_vec3(*s, "velocity", cfg.sensor_velocity);
    cfg.sensor_yaw_rate = s->get_double("yaw_rate_deg", 0.0) * kDeg;
  }
  for (const IniSection* s : ini.find_all("box")) {
    SceneBox box;
    std::string kind = s->get("kind", "static");
    if (kind == "static") {
      box.kind = SceneBox::Kind::Static;
    } else if (kind == "parked") {
      box.kind = SceneBox::Kind::Parked;
    } else if (kind == "moving") {
      box.kind = SceneBox::Kind::Moving;
    } else {
      throw ConfigError("[box] unknown kind: " + kind);
    }
    box.center = parse_vec3(*s, "center", box.center);
    box.size = parse_vec3(*s, "size", box.size);
    box.yaw = s->get_double("yaw_deg", 0.0) * kDeg;
    box.velocity = parse_vec3(*s, "velocity", box.velocity);
    box.intensity = s->get_double("intensity", box.intensity);
    box.difficulty = parse_difficulty(s->get("difficulty", "easy"));
    if (box.kind != SceneBox::Kind::Moving && box.velocity.norm() > 0) {
      throw ConfigError("[box] velocity only valid for kind = moving");
    }
    cfg.boxes.push_back(box);
  }
  return cfg;
}

SceneConfig parse_scene_config(const std::filesystem::path& path) {
  return parse_scene_config(parse_ini(path));
}

Pose sensor_pose(const SceneConfig& cfg, int t) {
  Pose p;
  p.R = yaw_rotation(cfg.sensor_yaw0 + t * cfg.sensor_yaw_rate);
  p.t = cfg.sensor_start + double(t) * cfg.sensor_velocity;
  return p;
}

SynthFrame synth_scene(const SceneConfig& cfg, int t) {
  if (cfg.rings <= 0 || cfg.azimuth_count <= 0) {
    throw ConfigError("scene: zero rays (rings/azimuth_count must be positive)");
  }
  if (!cfg.has_ground && cfg.boxes.empty()) {
    throw ConfigError("scene: empty (no ground and no boxes)");
  }

  SynthFrame frame;
  frame.pose = sensor_pose(cfg, t);
  frame.cloud.frame_id = t;
  frame.cloud.timestamp = double(t);

  // Box poses at frame t, plus object ids for parked/moving boxes.
  std::vector<Vec3> centers(cfg.boxes.size());
  std::vector<int> object_ids(cfg.boxes.size(), -1);
  int next_id = 0;
  for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
    const SceneBox& box = cfg.boxes[b];
    centers[b] = box.center;
    if (box.kind == SceneBox::Kind::Moving) centers[b] += double(t) * box.velocity;
    if (box.kind != SceneBox::Kind::Static) object_ids[b] = next_id++;
  }

  const double elev_span = (cfg.elev_max_deg - cfg.elev_min_deg) * kDeg;
  const double d_elev = cfg.rings > 1 ? elev_span / (cfg.rings - 1) : 0.0;
  const double d_az = 2.0 * M_PI / cfg.azimuth_count;
  const Vec3 origin = frame.pose.t;

  for (int r = 0; r < cfg.rings; ++r) {
    double elev = cfg.elev_max_deg * kDeg - r * d_elev;
    double ce = std::cos(elev), se = std::sin(elev);
    for (int c = 0; c < cfg.azimuth_count; ++c) {
      double az = -M_PI + c * d_az;
      Vec3 dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
      Vec3 dir = frame.pose.R * dir_sensor;

      double best_t = std::numeric_limits<double>::infinity();
      int best_box = -1;
      if (cfg.has_ground && dir.z() < -1e-12) {
        double th = (cfg.ground_z - origin.z()) / dir.z();
        if (th > kMinRange && th <= cfg.range_max) best_t = th;
      }
      for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
        double th = ray_box(origin, dir, centers[b], cfg.boxes[b].yaw, cfg.boxes[b].size,
                            kMinRange, cfg.range_max);
        if (th < best_t) {
          best_t = th;
          best_box = static_cast<int>(b);
        }
      }
      if (!std::isfinite(best_t)) continue;

      Point p;
      Vec3 ps = best_t * dir_sensor;  // sensor frame, exact
      p.x = ps.x();
      p.y = ps.y();
      p.z = ps.z();
      PointClass label = PointClass::NonMovable;
      int box_id = -1;
      if (best_box < 0) {
        p.intensity = cfg.ground_intensity;
      } else {
        const SceneBox& box = cfg.boxes[best_box];
        p.intensity = box.intensity;
        box_id = object_ids[best_box];
        if (box.kind == SceneBox::Kind::Parked) label = PointClass::Movable;
        if (box.kind == SceneBox::Kind::Moving) label = PointClass::Dynamic;
      }
      frame.cloud.points.push_back(p);
      frame.gt.labels.push_back(label);
      frame.gt.box_ids.push_back(box_id);
    }
  }

  // Object boxes, expressed in this frame's sensor coordinates.
  Pose inv = frame.pose.inverse();
  double sensor_yaw = cfg.sensor_yaw0 + t * cfg.sensor_yaw_rate;
  for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
    if (object_ids[b] < 0) continue;
    const SceneBox& box = cfg.boxes[b];
    Vec3 cs = inv * centers[b];
    GroundTruthBox g;
    g.id = object_ids[b];
    g.cx = cs.x();
    g.cy = cs.y();
    g.cz = cs.z();
    g.sx = box.size.x();
    g.sy = box.size.y();
    g.sz = box.size.z();
    g.yaw = box.yaw - sensor_yaw;
    g.difficulty = box.difficulty;
    frame.gt.boxes.push_back(g);
  }
  return frame;
}

}  // namespace lidarsem
