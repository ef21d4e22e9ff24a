#include "lidarsem/cluster_eval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lidarsem/spatial_grid.hpp"

namespace lidarsem {

std::vector<Cluster> cluster_points(const PointCloud& cloud,
                                    const std::vector<uint8_t>& mask,
                                    const std::vector<double>& confidence,
                                    const ClusterConfig& cfg) {
  if (mask.size() != cloud.size() || confidence.size() != cloud.size()) {
    throw DataError("cluster_points: mask not aligned with cloud");
  }
  std::vector<int> selected;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) selected.push_back(int(i));
  }
  if (selected.empty()) return {};

  std::vector<Vec3> pts(selected.size());
  for (std::size_t s = 0; s < selected.size(); ++s) {
    const Point& p = cloud.points[selected[s]];
    pts[s] = Vec3(p.x, p.y, p.z);
  }
  SpatialGrid grid(pts, cfg.radius);

  // BFS flood fill over the radius adjacency.
  std::vector<int> component(selected.size(), -1);
  int n_comp = 0;
  std::vector<int> stack;
  for (std::size_t s = 0; s < selected.size(); ++s) {
    if (component[s] >= 0) continue;
    component[s] = n_comp;
    stack.push_back(int(s));
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      for (int nb : grid.radius(pts[cur], cfg.radius)) {
        if (component[nb] < 0) {
          component[nb] = n_comp;
          stack.push_back(nb);
        }
      }
    }
    ++n_comp;
  }

  std::vector<Cluster> clusters(n_comp);
  for (std::size_t s = 0; s < selected.size(); ++s) {
    clusters[component[s]].members.push_back(selected[s]);
    clusters[component[s]].score += confidence[selected[s]];
  }
  std::vector<Cluster> kept;
  for (Cluster& c : clusters) {
    if (int(c.members.size()) < cfg.min_points) continue;
    c.score /= double(c.members.size());
    std::sort(c.members.begin(), c.members.end());
    kept.push_back(std::move(c));
  }
  return kept;
}

Box3D fit_box(const Cluster& cluster, const PointCloud& cloud) {
  if (cluster.members.empty()) throw DataError("fit_box: empty cluster");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i : cluster.members) {
    mean += Eigen::Vector2d(cloud.points[i].x, cloud.points[i].y);
  }
  mean /= double(cluster.members.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int i : cluster.members) {
    Eigen::Vector2d d(cloud.points[i].x - mean.x(), cloud.points[i].y - mean.y());
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Eigen::Vector2d axis = es.eigenvectors().col(1);  // largest eigenvalue
  double yaw = std::atan2(axis.y(), axis.x());

  double c = std::cos(yaw), s = std::sin(yaw);
  double min_u = 1e300, max_u = -1e300, min_v = 1e300, max_v = -1e300;
  double min_z = 1e300, max_z = -1e300;
  for (int i : cluster.members) {
    const Point& p = cloud.points[i];
    double u = c * p.x + s * p.y;
    double v = -s * p.x + c * p.y;
    min_u = std::min(min_u, u);
    max_u = std::max(max_u, u);
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
    min_z = std::min(min_z, p.z);
    max_z = std::max(max_z, p.z);
  }
  Box3D box;
  double cu = 0.5 * (min_u + max_u), cv = 0.5 * (min_v + max_v);
  box.cx = c * cu - s * cv;
  box.cy = s * cu + c * cv;
  box.cz = 0.5 * (min_z + max_z);
  box.sx = std::max(max_u - min_u, 1e-6);
  box.sy = std::max(max_v - min_v, 1e-6);
  box.sz = std::max(max_z - min_z, 1e-6);
  box.yaw = yaw;
  box.score = cluster.score;
  return box;
}

namespace {

using Poly = std::vector<Eigen::Vector2d>;

Poly box_corners_xy(const Box3D& b) {
  double c = std::cos(b.yaw), s = std::sin(b.yaw);
  double hx = b.sx * 0.5, hy = b.sy * 0.5;
  Poly out;
  for (auto [u, v] : {std::pair{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}) {
    out.emplace_back(b.cx + c * u - s * v, b.cy + s * u + c * v);
  }
  return out;
}

// Sutherland-Hodgman clip of subject against a convex clipper (CCW).
Poly clip_polygon(const Poly& subject, const Poly& clipper) {
  Poly out = subject;
  for (std::size_t e = 0; e < clipper.size() && !out.empty(); ++e) {
    const Eigen::Vector2d& a = clipper[e];
    const Eigen::Vector2d& b = clipper[(e + 1) % clipper.size()];
    Eigen::Vector2d dir = b - a;
    auto inside = [&](const Eigen::Vector2d& p) {
      return dir.x() * (p.y() - a.y()) - dir.y() * (p.x() - a.x()) >= -1e-12;
    };
    Poly in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Eigen::Vector2d& cur = in[i];
      const Eigen::Vector2d& nxt = in[(i + 1) % in.size()];
      bool cin = inside(cur), nin = inside(nxt);
      if (cin) out.push_back(cur);
      if (cin != nin) {
        Eigen::Vector2d d = nxt - cur;
        double denom = dir.x() * d.y() - dir.y() * d.x();
        if (std::abs(denom) > 1e-18) {
          double t = (dir.x() * (a.y() - cur.y()) - dir.y() * (a.x() - cur.x())) / denom;
          out.push_back(cur + t * d);
        }
      }
    }
  }
  return out;
}

double polygon_area(const Poly& p) {
  double area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Vector2d& a = p[i];
    const Eigen::Vector2d& b = p[(i + 1) % p.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(area);
}

}  // namespace

double iou3d(const Box3D& a, const Box3D& b) {
  double z_lo = std::max(a.cz - a.sz * 0.5, b.cz - b.sz * 0.5);
  double z_hi = std::min(a.cz + a.sz * 0.5, b.cz + b.sz * 0.5);
  double dz = std::max(0.0, z_hi - z_lo);
  if (dz == 0.0) return 0.0;
  double xy = polygon_area(clip_polygon(box_corners_xy(a), box_corners_xy(b)));
  double inter = xy * dz;
  double vol_a = a.sx * a.sy * a.sz;
  double vol_b = b.sx * b.sy * b.sz;
  double uni = vol_a + vol_b - inter;
  return uni > 0 ? inter / uni : 0.0;
}

PRCurve pr_curve(const std::vector<double>& confidence,
                 const std::vector<uint8_t>& is_positive) {
  if (confidence.size() != is_positive.size()) {
    throw DataError("pr_curve: misaligned arrays");
  }
  std::size_t total_pos = 0;
  for (uint8_t p : is_positive) total_pos += p ? 1 : 0;
  if (total_pos == 0) throw DataError("pr_curve: no positives in ground truth");

  std::vector<int> order(confidence.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return confidence[a] > confidence[b]; });

  PRCurve curve;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (is_positive[order[i]]) {
      ++tp;
    } else {
      ++fp;
    }
    // emit one point per distinct threshold
    if (i + 1 < order.size() && confidence[order[i + 1]] == confidence[order[i]]) {
      continue;
    }
    PRPoint pt;
    pt.threshold = confidence[order[i]];
    pt.precision = double(tp) / double(tp + fp);
    pt.recall = double(tp) / double(total_pos);
    curve.points.push_back(pt);
    double f1 = pt.precision + pt.recall > 0
                    ? 2.0 * pt.precision * pt.recall / (pt.precision + pt.recall)
                    : 0.0;
    if (f1 > curve.max_f1) {
      curve.max_f1 = f1;
      curve.max_f1_threshold = pt.threshold;
      curve.max_f1_precision = pt.precision;
      curve.max_f1_recall = pt.recall;
    }
  }
  return curve;
}

std::optional<double> average_precision(const std::vector<Box3D>& predictions,
                                        const std::vector<Box3D>& ground_truth,
                                        double iou_thresh,
                                        std::optional<Difficulty> difficulty,
                                        ApInterpolation interp) {
  std::vector<const Box3D*> gt;
  for (const Box3D& g : ground_truth) {
    if (!difficulty || g.difficulty == *difficulty) gt.push_back(&g);
  }
  if (gt.empty()) return std::nullopt;

  std::vector<int> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return predictions[a].score > predictions[b].score;
  });

  std::vector<uint8_t> gt_used(gt.size(), 0);
  std::vector<uint8_t> is_tp;
  for (int pi : order) {
    double best_iou = iou_thresh;
    int best_g = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt_used[g]) continue;
      double iou = iou3d(predictions[pi], *gt[g]);
      if (iou >= best_iou) {
        best_iou = iou;
        best_g = int(g);
      }
    }
    if (best_g >= 0) {
      gt_used[best_g] = 1;
      is_tp.push_back(1);
    } else {
      is_tp.push_back(0);
    }
  }

  std::vector<double> precisions, recalls;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < is_tp.size(); ++i) {
    tp += is_tp[i];
    precisions.push_back(double(tp) / double(i + 1));
    recalls.push_back(double(tp) / double(gt.size()));
  }

  auto precision_at = [&](double r) {
    double best = 0.0;
    for (std::size_t i = 0; i < recalls.size(); ++i) {
      if (recalls[i] >= r) best = std::max(best, precisions[i]);
    }
    return best;
  };

  if (interp == ApInterpolation::ElevenPoint) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) sum += precision_at(i / 10.0);
    return sum / 11.0;
  }
  // Continuous: area under the interpolated precision envelope.
  double ap = 0.0, prev_r = 0.0;
  for (std::size_t i = 0; i < recalls.size(); ++i) {
    if (recalls[i] > prev_r) {
      ap += (recalls[i] - prev_r) * precision_at(recalls[i]);
      prev_r = recalls[i];
    }
  }
  return ap;
}

std::optional<double> pointwise_recall(const std::vector<PointClass>& predicted,
                                       const GroundTruth& gt, PointClass cls,
                                       std::optional<Difficulty> difficulty) {
  if (predicted.size() != gt.labels.size()) {
    throw DataError("pointwise_recall: misaligned arrays");
  }
  std::vector<Difficulty> box_difficulty;
  int max_id = -1;
  for (const GroundTruthBox& b : gt.boxes) max_id = std::max(max_id, b.id);
  box_difficulty.assign(max_id + 1, Difficulty::Easy);
  for (const GroundTruthBox& b : gt.boxes) box_difficulty[b.id] = b.difficulty;

  std::size_t tp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (gt.labels[i] != cls) continue;
    if (difficulty) {
      int id = gt.box_ids[i];
      if (id < 0 || box_difficulty[id] != *difficulty) continue;
    }
    if (predicted[i] == cls) {
      ++tp;
    } else {
      ++fn;
    }
  }
  if (tp + fn == 0) return std::nullopt;
  return double(tp) / double(tp + fn);
}

void write_pr_csv(const std::filesystem::path& path,
                  const std::vector<NamedCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write PR csv: " + path.string());
  out << "curve,threshold,precision,recall\n";
  out.precision(9);
  for (const NamedCurve& nc : curves) {
    for (const PRPoint& p : nc.curve.points) {
      out << nc.name << ',' << p.threshold << ',' << p.precision << ',' << p.recall
          << '\n';
    }
  }
}

void write_pr_svg(const std::filesystem::path& path,
                  const std::vector<NamedCurve>& curves, const std::string& title) {
  const int w = 640, h = 480, ml = 60, mb = 50, mt = 40, mr = 20;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write SVG: " + path.string());
  auto px = [&](double r) { return ml + r * (w - ml - mr); };
  auto py = [&](double p) { return h - mb - p * (h - mb - mt); };
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  // axes
  out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='"
      << h - mb << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << ml << "' y2='" << mt
      << "' stroke='black'/>\n";
  out << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 10
      << "' text-anchor='middle' font-size='13'>recall</text>\n";
  out << "<text x='15' y='" << (mt + h - mb) / 2
      << "' text-anchor='middle' font-size='13' transform='rotate(-90 15 "
      << (mt + h - mb) / 2 << ")'>precision</text>\n";
  for (int i = 0; i <= 5; ++i) {
    double v = i / 5.0;
    out << "<text x='" << px(v) << "' y='" << h - mb + 18
        << "' text-anchor='middle' font-size='11'>" << v << "</text>\n";
    out << "<text x='" << ml - 8 << "' y='" << py(v) + 4
        << "' text-anchor='end' font-size='11'>" << v << "</text>\n";
  }
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const PRCurve& c = curves[ci].curve;
    out << "<polyline fill='none' stroke='" << colors[ci % 5] << "' stroke-width='2' points='";
    for (const PRPoint& p : c.points) out << px(p.recall) << ',' << py(p.precision) << ' ';
    out << "'/>\n";
    out << "<text x='" << w - mr - 10 << "' y='" << mt + 20 + 16 * ci
        << "' text-anchor='end' font-size='12' fill='" << colors[ci % 5] << "'>"
        << curves[ci].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lidarsem
