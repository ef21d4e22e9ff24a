#ifndef LIDARSEM_PROJECTION_HPP
#define LIDARSEM_PROJECTION_HPP

#include <filesystem>
#include <vector>

#include "lidarsem/core.hpp"

namespace lidarsem {

struct ProjectionConfig {
  int height = 64;
  int width = 870;
  double elev_min_deg = -24.8;  // HDL-64E span
  double elev_max_deg = 2.0;
};

// Spherical range image. Channels: range (m), intensity, height above
// sensor (m). Invalid pixels hold 0 and must be checked via the mask.
struct RangeImage {
  int height = 0;
  int width = 0;
  std::vector<double> range;
  std::vector<double> intensity;
  std::vector<double> z;
  std::vector<uint8_t> valid;

  std::size_t idx(int r, int c) const { return std::size_t(r) * width + c; }
  std::size_t pixel_count() const { return range.size(); }
};

struct PixelIndexMap {
  int height = 0;
  int width = 0;
  std::vector<int32_t> pixel_to_point;  // -1 if empty
  std::vector<int32_t> point_to_pixel;  // pixel the point binned into; -1 if out of span
  std::size_t dropped_out_of_span = 0;

  std::size_t idx(int r, int c) const { return std::size_t(r) * width + c; }
};

// Bin by azimuth/elevation; collisions keep the nearer point (ties: lower
// index). Column 0 sits at -180 deg with bin-center alignment, so azimuth 0
// lands on column width/2. Row 0 is the top (max elevation) ring.
std::pair<RangeImage, PixelIndexMap> project(const PointCloud& cloud,
                                             const ProjectionConfig& cfg);

// Per-pixel scalars back to per-point scalars. Collision losers receive the
// value of the pixel they binned into (the winner's pixel); out-of-span
// points receive fallback.
std::vector<double> back_project(const PixelIndexMap& map,
                                 const std::vector<double>& pixel_values,
                                 double fallback = 0.0);

// Debug dump: 8-bit PGM per channel, row 0 at the top, channel scaled to
// its own max over valid pixels.
void write_pgm_channels(const RangeImage& img, const std::filesystem::path& prefix);

}  // namespace lidarsem

#endif
