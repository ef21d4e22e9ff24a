#ifndef LIDARSEM_RIGID_FLOW_HPP
#define LIDARSEM_RIGID_FLOW_HPP

#include <filesystem>
#include <utility>
#include <vector>

#include "lidarsem/core.hpp"
#include "lidarsem/se3.hpp"

namespace lidarsem {

struct FlowConfig {
  int k = 6;                       // neighbor graph degree before symmetrization
  double lambda_data = 1.0;
  double lambda_reg = 5.0;
  double rot_weight = 1.0;         // m per rad in the SE(3) residual metric
  double keypoint_quantile = 0.1;  // fraction of points kept as keypoints
  int curvature_knn = 10;
  int min_keypoints = 8;
  double corr_max_dist = 3.0;      // correspondence search radius in scan 2
  double tol = 1e-4;               // relative energy decrease stop
  int max_iters = 30;
  int sweeps_per_iter = 2;
};

// Per-point rigid transform mapping scan-1 coordinates into scan-2
// coordinates.
struct MotionField {
  std::vector<SE3> tau;
  std::vector<uint8_t> valid;

  static MotionField constant(std::size_t n, const SE3& T);
};

struct KeypointSelection {
  std::vector<int> indices;
  bool uniform_fallback = false;  // no distinctive geometry found
};

// Curvature score from neighborhood covariance eigenvalues; the top
// quantile is kept, topped up with uniformly strided points so the data
// term covers featureless regions too.
KeypointSelection select_keypoints(const PointCloud& cloud, const FlowConfig& cfg);

struct FlowGraph {
  std::vector<int> keypoints;                    // I_d
  std::vector<std::pair<int, int>> edges;        // symmetrized kNN, i < j
  std::vector<std::vector<int>> adjacency;       // per point
  std::vector<Vec3> targets;                     // per keypoint, scan-2 frame
  std::vector<uint8_t> target_valid;             // per keypoint
  double lambda_data = 1.0;
  double lambda_reg = 5.0;
  double rot_weight = 1.0;
};

FlowGraph build_graph(const PointCloud& scan1, const std::vector<int>& keypoints,
                      const PointCloud& scan2, const FlowConfig& cfg);

// Weighted least-squares energy: data residuals at keypoints plus the
// log-map residual over neighbor edges (rotation axes scaled by
// rot_weight).
double energy(const MotionField& field, const FlowGraph& graph, const PointCloud& scan1);

struct FlowResult {
  MotionField field;
  std::vector<double> energy_history;  // per accepted iteration
  int iterations = 0;
  bool diverged = false;
};

// Block-coordinate Gauss-Newton with ICP-style correspondence refresh.
// Energy is non-increasing across accepted iterations.
FlowResult minimize(FlowGraph& graph, const PointCloud& scan1, const PointCloud& scan2,
                    const MotionField& init, const FlowConfig& cfg);

// CSV dump: index, 3 translation, 3 rotation-vector components.
void write_motion_field(const std::filesystem::path& path, const MotionField& field);

}  // namespace lidarsem

#endif
