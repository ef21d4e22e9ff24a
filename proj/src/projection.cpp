#include "lidarsem/projection.hpp"

#include <cmath>
#include <fstream>

#include "lidarsem/kernels.hpp"

namespace lidarsem {

namespace {
constexpr double kDeg = M_PI / 180.0;
}

std::pair<RangeImage, PixelIndexMap> project(const PointCloud& cloud,
                                             const ProjectionConfig& cfg) {
  if (cfg.height <= 0 || cfg.width <= 0) throw ConfigError("projection: bad image dims");
  if (cfg.elev_max_deg <= cfg.elev_min_deg) {
    throw ConfigError("projection: elevation span empty");
  }

  RangeImage img;
  img.height = cfg.height;
  img.width = cfg.width;
  std::size_t n_pix = std::size_t(cfg.height) * cfg.width;
  img.range.assign(n_pix, 0.0);
  img.intensity.assign(n_pix, 0.0);
  img.z.assign(n_pix, 0.0);
  img.valid.assign(n_pix, 0);

  PixelIndexMap map;
  map.height = cfg.height;
  map.width = cfg.width;
  map.pixel_to_point.assign(n_pix, -1);
  map.point_to_pixel.assign(cloud.size(), -1);

  const std::size_t n = cloud.size();
  std::vector<double> xs(n), ys(n), zs(n), ranges(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = cloud.points[k].x;
    ys[k] = cloud.points[k].y;
    zs[k] = cloud.points[k].z;
  }
  kernels::range3(xs.data(), ys.data(), zs.data(), ranges.data(), n);

  const double d_az = 360.0 / cfg.width;
  const double d_elev = cfg.height > 1
                            ? (cfg.elev_max_deg - cfg.elev_min_deg) / (cfg.height - 1)
                            : 1.0;

  for (std::size_t k = 0; k < n; ++k) {
    double range = ranges[k];
    if (range <= 0.0) {
      ++map.dropped_out_of_span;
      continue;
    }
    double az_deg = std::atan2(ys[k], xs[k]) / kDeg;
    double elev_deg = std::asin(zs[k] / range) / kDeg;

    long row = std::lround((cfg.elev_max_deg - elev_deg) / d_elev);
    if (row < 0 || row >= cfg.height) {
      ++map.dropped_out_of_span;
      continue;
    }
    long col = std::lround((az_deg + 180.0) / d_az);
    col = ((col % cfg.width) + cfg.width) % cfg.width;

    std::size_t pix = img.idx(int(row), int(col));
    map.point_to_pixel[k] = static_cast<int32_t>(pix);
    // Nearer point wins; ties keep the lower index (first writer).
    if (img.valid[pix] && img.range[pix] <= range) continue;
    img.valid[pix] = 1;
    img.range[pix] = range;
    img.intensity[pix] = cloud.points[k].intensity;
    img.z[pix] = zs[k];
    map.pixel_to_point[pix] = static_cast<int32_t>(k);
  }
  return {std::move(img), std::move(map)};
}

std::vector<double> back_project(const PixelIndexMap& map,
                                 const std::vector<double>& pixel_values,
                                 double fallback) {
  if (pixel_values.size() != map.pixel_to_point.size()) {
    throw DataError("back_project: pixel grid dimension mismatch");
  }
  std::vector<double> out(map.point_to_pixel.size(), fallback);
  for (std::size_t k = 0; k < out.size(); ++k) {
    int32_t pix = map.point_to_pixel[k];
    if (pix >= 0) out[k] = pixel_values[pix];
  }
  return out;
}

void write_pgm_channels(const RangeImage& img, const std::filesystem::path& prefix) {
  const std::vector<double>* channels[3] = {&img.range, &img.intensity, &img.z};
  const char* names[3] = {"range", "intensity", "height"};
  for (int ch = 0; ch < 3; ++ch) {
    const std::vector<double>& data = *channels[ch];
    double lo = 0.0, hi = 1e-12;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!img.valid[i]) continue;
      lo = std::min(lo, data[i]);
      hi = std::max(hi, data[i]);
    }
    std::filesystem::path path = prefix;
    path += std::string("_") + names[ch] + ".pgm";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write PGM: " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      double v = img.valid[i] ? (data[i] - lo) / (hi - lo) : 0.0;
      out.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }
}

}  // namespace lidarsem
