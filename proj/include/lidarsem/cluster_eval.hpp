#ifndef LIDARSEM_CLUSTER_EVAL_HPP
#define LIDARSEM_CLUSTER_EVAL_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidarsem/core.hpp"
#include "lidarsem/se3.hpp"

namespace lidarsem {

struct ClusterConfig {
  double radius = 0.5;  // connectivity distance
  int min_points = 20;  // smaller clusters are discarded
};

struct Cluster {
  std::vector<int> members;
  double score = 0.0;  // mean member confidence
};

struct Box3D {
  double cx = 0, cy = 0, cz = 0;
  double sx = 0, sy = 0, sz = 0;  // extents, > 0
  double yaw = 0;
  double score = 0.0;
  Difficulty difficulty = Difficulty::Easy;
};

// Connected components of the masked points under Euclidean adjacency.
std::vector<Cluster> cluster_points(const PointCloud& cloud,
                                    const std::vector<uint8_t>& mask,
                                    const std::vector<double>& confidence,
                                    const ClusterConfig& cfg);

// Yaw from the principal axis of the xy covariance, extents from the
// min/max in the rotated frame.
Box3D fit_box(const Cluster& cluster, const PointCloud& cloud);

// Volume IoU; xy overlap of the yawed rectangles via polygon clipping.
double iou3d(const Box3D& a, const Box3D& b);

struct PRPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // thresholds strictly decreasing
  double max_f1 = 0;
  double max_f1_threshold = 0;
  double max_f1_precision = 0;
  double max_f1_recall = 0;
};

PRCurve pr_curve(const std::vector<double>& confidence,
                 const std::vector<uint8_t>& is_positive);

enum class ApInterpolation { ElevenPoint, Continuous };

// Greedy score-descending matching at the IoU threshold; one ground-truth
// box per prediction. Returns nothing when the difficulty filter leaves
// no ground truth.
std::optional<double> average_precision(const std::vector<Box3D>& predictions,
                                        const std::vector<Box3D>& ground_truth,
                                        double iou_thresh = 0.5,
                                        std::optional<Difficulty> difficulty = {},
                                        ApInterpolation interp = ApInterpolation::ElevenPoint);

// Recall over points whose ground-truth box carries the difficulty tag
// (all object points when the filter is empty).
std::optional<double> pointwise_recall(const std::vector<PointClass>& predicted,
                                       const GroundTruth& gt, PointClass cls,
                                       std::optional<Difficulty> difficulty = {});

struct NamedCurve {
  std::string name;
  PRCurve curve;
};

void write_pr_csv(const std::filesystem::path& path,
                  const std::vector<NamedCurve>& curves);
void write_pr_svg(const std::filesystem::path& path,
                  const std::vector<NamedCurve>& curves, const std::string& title);

}  // namespace lidarsem

#endif
