#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "lidarsem/projection.hpp"
#include "lidarsem/scene.hpp"

using namespace lidarsem;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = M_PI / 180.0;

Point ray_point(double az_deg, double elev_deg, double range, double intensity = 0.5) {
  double az = az_deg * kDeg, el = elev_deg * kDeg;
  Point p;
  p.x = range * std::cos(el) * std::cos(az);
  p.y = range * std::cos(el) * std::sin(az);
  p.z = range * std::sin(el);
  p.intensity = intensity;
  return p;
}

}  // namespace

TEST_CASE("azimuth zero lands on the center column") {
  ProjectionConfig cfg;  // 64 x 870 defaults
  CHECK(cfg.height == 64);
  CHECK(cfg.width == 870);
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 0.0, 10.0));
  auto [img, map] = project(cloud, cfg);
  REQUIRE(map.point_to_pixel[0] >= 0);
  int pix = map.point_to_pixel[0];
  int row = pix / cfg.width, col = pix % cfg.width;
  CHECK(col == cfg.width / 2);
  // elev 0 with span [-24.8, 2.0] over 64 bin centers: d = 26.8/63,
  // row = lround(2.0 / d) = lround(4.7015) = 5.
  CHECK(row == 5);
}

TEST_CASE("hand-derived binning on a tiny grid") {
  ProjectionConfig cfg;
  cfg.height = 3;
  cfg.width = 8;
  cfg.elev_min_deg = -10.0;
  cfg.elev_max_deg = 10.0;
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 0.0, 5.0));     // row 1, col 4
  cloud.points.push_back(ray_point(0.0, 10.0, 5.0));    // row 0 (top ring)
  cloud.points.push_back(ray_point(0.0, -10.0, 5.0));   // row 2
  cloud.points.push_back(ray_point(-180.0, 0.0, 5.0));  // col 0 (wraps)
  cloud.points.push_back(ray_point(90.0, 0.0, 5.0));    // col 6
  auto [img, map] = project(cloud, cfg);
  CHECK(map.point_to_pixel[0] == 1 * 8 + 4);
  CHECK(map.point_to_pixel[1] == 0 * 8 + 4);
  CHECK(map.point_to_pixel[2] == 2 * 8 + 4);
  CHECK(map.point_to_pixel[3] == 1 * 8 + 0);
  CHECK(map.point_to_pixel[4] == 1 * 8 + 6);
  CHECK(map.dropped_out_of_span == 0);
}

TEST_CASE("collisions keep the nearer point, ties keep the lower index") {
  ProjectionConfig cfg;
  cfg.height = 3;
  cfg.width = 8;
  cfg.elev_min_deg = -10.0;
  cfg.elev_max_deg = 10.0;
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 0.0, 7.0, 0.1));
  cloud.points.push_back(ray_point(0.0, 0.0, 4.0, 0.2));  // nearer, wins
  cloud.points.push_back(ray_point(0.0, 0.0, 4.0, 0.3));  // tie, loses to index 1
  auto [img, map] = project(cloud, cfg);
  std::size_t pix = img.idx(1, 4);
  CHECK(map.pixel_to_point[pix] == 1);
  CHECK(img.range[pix] == doctest::Approx(4.0));
  CHECK(img.intensity[pix] == doctest::Approx(0.2));
  // Losers still record which pixel they binned into.
  CHECK(map.point_to_pixel[0] == int32_t(pix));
  CHECK(map.point_to_pixel[2] == int32_t(pix));
}

TEST_CASE("out-of-span points are dropped and counted") {
  ProjectionConfig cfg;
  cfg.height = 3;
  cfg.width = 8;
  cfg.elev_min_deg = -10.0;
  cfg.elev_max_deg = 10.0;
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 45.0, 5.0));   // above span
  cloud.points.push_back(ray_point(0.0, -45.0, 5.0));  // below span
  cloud.points.push_back({0.0, 0.0, 0.0, 0.0});        // zero range
  cloud.points.push_back(ray_point(10.0, 0.0, 5.0));
  auto [img, map] = project(cloud, cfg);
  CHECK(map.dropped_out_of_span == 3);
  CHECK(map.point_to_pixel[0] == -1);
  CHECK(map.point_to_pixel[1] == -1);
  CHECK(map.point_to_pixel[2] == -1);
  CHECK(map.point_to_pixel[3] >= 0);
}

TEST_CASE("column increases with azimuth") {
  ProjectionConfig cfg;
  cfg.height = 1;
  cfg.width = 36;
  cfg.elev_min_deg = -1.0;
  cfg.elev_max_deg = 0.0;  // single ring binned at elev_max
  PointCloud cloud;
  for (int i = 0; i < 36; ++i) {
    cloud.points.push_back(ray_point(-180.0 + 10.0 * i, 0.0, 5.0));
  }
  auto [img, map] = project(cloud, cfg);
  for (int i = 0; i < 36; ++i) CHECK(map.point_to_pixel[i] == i);
}

TEST_CASE("synthetic rays align with bin centers and project without collisions") {
  SceneConfig scene;
  scene.rings = 16;
  scene.azimuth_count = 120;
  SceneBox box;
  box.kind = SceneBox::Kind::Parked;
  box.center = Vec3(9.0, 2.0, 0.0);
  box.size = Vec3(3.0, 2.0, 1.8);
  scene.boxes.push_back(box);
  SynthFrame frame = synth_scene(scene, 0);

  ProjectionConfig cfg;
  cfg.height = scene.rings;
  cfg.width = scene.azimuth_count;
  cfg.elev_min_deg = scene.elev_min_deg;
  cfg.elev_max_deg = scene.elev_max_deg;
  auto [img, map] = project(frame.cloud, cfg);

  CHECK(map.dropped_out_of_span == 0);
  std::set<int32_t> pixels;
  for (std::size_t k = 0; k < frame.cloud.size(); ++k) {
    int32_t pix = map.point_to_pixel[k];
    REQUIRE(pix >= 0);
    CHECK(pixels.insert(pix).second);  // injective: no two points share a pixel
    CHECK(map.pixel_to_point[pix] == int32_t(k));
    const Point& p = frame.cloud.points[k];
    double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    CHECK(img.range[pix] == doctest::Approx(r).epsilon(1e-12));
    CHECK(img.z[pix] == doctest::Approx(p.z).epsilon(1e-12));
  }
}

TEST_CASE("back_project routes pixel values to points") {
  ProjectionConfig cfg;
  cfg.height = 3;
  cfg.width = 8;
  cfg.elev_min_deg = -10.0;
  cfg.elev_max_deg = 10.0;
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 0.0, 4.0));   // wins pixel (1,4)
  cloud.points.push_back(ray_point(0.0, 0.0, 7.0));   // loses, same pixel
  cloud.points.push_back(ray_point(90.0, 0.0, 5.0));  // pixel (1,6)
  cloud.points.push_back(ray_point(0.0, 60.0, 5.0));  // out of span
  auto [img, map] = project(cloud, cfg);

  std::vector<double> values(img.pixel_count(), 0.0);
  values[img.idx(1, 4)] = 0.9;
  values[img.idx(1, 6)] = 0.4;
  std::vector<double> out = back_project(map, values, 0.25);
  REQUIRE(out.size() == 4);
  CHECK(out[0] == doctest::Approx(0.9));
  CHECK(out[1] == doctest::Approx(0.9));  // collision loser inherits the winner's pixel
  CHECK(out[2] == doctest::Approx(0.4));
  CHECK(out[3] == doctest::Approx(0.25));  // fallback

  std::vector<double> wrong(5, 0.0);
  CHECK_THROWS_AS(back_project(map, wrong, 0.0), DataError);
}

TEST_CASE("invalid projection configs raise ConfigError") {
  PointCloud cloud;
  ProjectionConfig bad;
  bad.height = 0;
  CHECK_THROWS_AS(project(cloud, bad), ConfigError);
  ProjectionConfig bad2;
  bad2.elev_min_deg = 5.0;
  bad2.elev_max_deg = -5.0;
  CHECK_THROWS_AS(project(cloud, bad2), ConfigError);
}

TEST_CASE("PGM dumps carry the right header and size") {
  ProjectionConfig cfg;
  cfg.height = 4;
  cfg.width = 10;
  cfg.elev_min_deg = -10.0;
  cfg.elev_max_deg = 10.0;
  PointCloud cloud;
  cloud.points.push_back(ray_point(0.0, 0.0, 5.0));
  cloud.points.push_back(ray_point(30.0, -5.0, 8.0));
  auto [img, map] = project(cloud, cfg);

  fs::path dir = fs::temp_directory_path() / ("lidarsem_pgm_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_pgm_channels(img, dir / "frame");
  for (const char* name : {"range", "intensity", "height"}) {
    fs::path p = dir / (std::string("frame_") + name + ".pgm");
    REQUIRE(fs::exists(p));
    std::ifstream in(p, std::ios::binary);
    std::string magic, dims1, dims2, maxval;
    in >> magic >> dims1 >> dims2 >> maxval;
    CHECK(magic == "P5");
    CHECK(dims1 == "10");
    CHECK(dims2 == "4");
    CHECK(maxval == "255");
    CHECK(fs::file_size(p) >= std::size_t(40));
  }
  fs::remove_all(dir);
}
