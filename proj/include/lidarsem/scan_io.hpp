#ifndef LIDARSEM_SCAN_IO_HPP
#define LIDARSEM_SCAN_IO_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "lidarsem/core.hpp"
#include "lidarsem/se3.hpp"

namespace lidarsem {

struct BinReadStats {
  std::size_t accepted = 0;
  std::size_t rejected_nonfinite = 0;
};

// KITTI raw format: x,y,z,intensity as 4 consecutive little-endian float32
// per point, no header. Non-finite points are dropped and counted.
PointCloud read_velodyne_bin(const std::filesystem::path& path,
                             BinReadStats* stats = nullptr);
void write_velodyne_bin(const std::filesystem::path& path, const PointCloud& cloud);

// Text poses, 12 whitespace-separated reals per line, row-major 3x4 [R|t].
// Rotations with drift above 1e-6 are re-orthonormalized.
std::vector<Pose> read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const std::vector<Pose>& poses);

struct LabelRecord {
  PointClass label = PointClass::NonMovable;
  std::array<double, 3> belief = {1.0, 0.0, 0.0};  // non-movable, movable, dynamic
};

// CSV: index,label,p_nonmov,p_mov,p_dyn  (beliefs to 6 decimals)
void write_labels(const std::filesystem::path& path,
                  const std::vector<LabelRecord>& records);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);

// Ground truth companions for synthetic scenes.
// labels CSV: index,label,box_id ; boxes CSV: id,cx,cy,cz,sx,sy,sz,yaw,difficulty
void write_ground_truth(const std::filesystem::path& labels_path,
                        const std::filesystem::path& boxes_path, const GroundTruth& gt);
GroundTruth read_ground_truth(const std::filesystem::path& labels_path,
                              const std::filesystem::path& boxes_path);

}  // namespace lidarsem

#endif
