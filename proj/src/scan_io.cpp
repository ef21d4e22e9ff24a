#include "lidarsem/scan_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lidarsem {

namespace fs = std::filesystem;

PointCloud read_velodyne_bin(const fs::path& path, BinReadStats* stats) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open scan file: " + path.string());
  std::streamoff size = in.tellg();
  if (size % 16 != 0) {
    throw DataError("truncated velodyne file (size " + std::to_string(size) +
                    " not a multiple of 16): " + path.string());
  }
  in.seekg(0);
  std::size_t count = static_cast<std::size_t>(size) / 16;

  PointCloud cloud;
  cloud.points.reserve(count);
  BinReadStats local;
  std::vector<float> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()), size);
  if (!in) throw DataError("short read: " + path.string());

  for (std::size_t i = 0; i < count; ++i) {
    const float* f = &buf[i * 4];
    if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2]) ||
        !std::isfinite(f[3])) {
      ++local.rejected_nonfinite;
      continue;
    }
    Point p;
    p.x = f[0];
    p.y = f[1];
    p.z = f[2];
    p.intensity = std::clamp(static_cast<double>(f[3]), 0.0, 1.0);
    cloud.points.push_back(p);
  }
  local.accepted = cloud.points.size();
  if (stats) *stats = local;
  return cloud;
}

void write_velodyne_bin(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write scan file: " + path.string());
  std::vector<float> buf;
  buf.reserve(cloud.size() * 4);
  for (const Point& p : cloud.points) {
    buf.push_back(static_cast<float>(p.x));
    buf.push_back(static_cast<float>(p.y));
    buf.push_back(static_cast<float>(p.z));
    buf.push_back(static_cast<float>(p.intensity));
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::vector<Pose> read_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pose file: " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double v[12];
    int got = 0;
    while (got < 12 && (ss >> v[got])) ++got;
    double extra;
    if (got != 12 || (ss >> extra)) {
      throw DataError("pose file " + path.string() + " line " + std::to_string(lineno) +
                      ": expected 12 values");
    }
    Pose p;
    p.R << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    p.t << v[3], v[7], v[11];
    if (rotation_drift(p.R) > 1e-6) {
      p.R = orthonormalize(p.R);
    }
    poses.push_back(p);
  }
  return poses;
}

void write_poses(const fs::path& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pose file: " + path.string());
  out.precision(17);
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << p.R(r, c) << ' ';
      out << p.t[r] << (r == 2 ? '\n' : ' ');
    }
  }
}

void write_labels(const fs::path& path, const std::vector<LabelRecord>& records) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw DataError("cannot write labels file: " + path.string());
  std::fputs("index,label,p_nonmov,p_mov,p_dyn\n", f);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LabelRecord& r = records[i];
    std::fprintf(f, "%zu,%d,%.6f,%.6f,%.6f\n", i, static_cast<int>(r.label),
                 r.belief[0], r.belief[1], r.belief[2]);
  }
  std::fclose(f);
}

std::vector<LabelRecord> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path.string());
  std::vector<LabelRecord> records;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LabelRecord r;
    std::size_t idx;
    int label;
    if (std::sscanf(line.c_str(), "%zu,%d,%lf,%lf,%lf", &idx, &label, &r.belief[0],
                    &r.belief[1], &r.belief[2]) != 5) {
      throw DataError("malformed labels row in " + path.string() + ": " + line);
    }
    if (idx != records.size()) {
      throw DataError("non-contiguous index in " + path.string());
    }
    r.label = static_cast<PointClass>(label);
    records.push_back(r);
  }
  return records;
}

void write_ground_truth(const fs::path& labels_path, const fs::path& boxes_path,
                        const GroundTruth& gt) {
  {
    std::ofstream out(labels_path);
    if (!out) throw DataError("cannot write gt labels: " + labels_path.string());
    out << "index,label,box_id\n";
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      out << i << ',' << static_cast<int>(gt.labels[i]) << ',' << gt.box_ids[i] << '\n';
    }
  }
  std::ofstream out(boxes_path);
  if (!out) throw DataError("cannot write gt boxes: " + boxes_path.string());
  out.precision(12);
  out << "id,cx,cy,cz,sx,sy,sz,yaw,difficulty\n";
  for (const GroundTruthBox& b : gt.boxes) {
    out << b.id << ',' << b.cx << ',' << b.cy << ',' << b.cz << ',' << b.sx << ',' << b.sy
        << ',' << b.sz << ',' << b.yaw << ',' << static_cast<int>(b.difficulty) << '\n';
  }
}

GroundTruth read_ground_truth(const fs::path& labels_path, const fs::path& boxes_path) {
  GroundTruth gt;
  {
    std::ifstream in(labels_path);
    if (!in) throw DataError("cannot open gt labels: " + labels_path.string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::size_t idx;
      int label, box_id;
      if (std::sscanf(line.c_str(), "%zu,%d,%d", &idx, &label, &box_id) != 3) {
        throw DataError("malformed gt labels row: " + line);
      }
      gt.labels.push_back(static_cast<PointClass>(label));
      gt.box_ids.push_back(box_id);
    }
  }
  std::ifstream in(boxes_path);
  if (!in) throw DataError("cannot open gt boxes: " + boxes_path.string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    GroundTruthBox b;
    int diff;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d", &b.id, &b.cx,
                    &b.cy, &b.cz, &b.sx, &b.sy, &b.sz, &b.yaw, &diff) != 9) {
      throw DataError("malformed gt boxes row: " + line);
    }
    b.difficulty = static_cast<Difficulty>(diff);
    gt.boxes.push_back(b);
  }
  return gt;
}

}  // namespace lidarsem
