#include "lidarsem/rigid_flow.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lidarsem/spatial_grid.hpp"

namespace lidarsem {

MotionField MotionField::constant(std::size_t n, const SE3& T) {
  MotionField f;
  f.tau.assign(n, T);
  f.valid.assign(n, 1);
  return f;
}

namespace {

std::vector<Vec3> positions(const PointCloud& cloud) {
  std::vector<Vec3> out(cloud.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Vec3(cloud.points[i].x, cloud.points[i].y, cloud.points[i].z);
  }
  return out;
}

// Surface variation: smallest eigenvalue over trace of the neighborhood
// covariance. Zero on planes, positive at edges and corners.
std::vector<double> curvature_scores(const std::vector<Vec3>& pts, int k) {
  SpatialGrid grid(pts, 1.0);
  std::vector<double> scores(pts.size(), 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<int> nb = grid.knn(pts[i], k, int(i));
    if (nb.size() < 3) continue;
    Vec3 mean = pts[i];
    for (int j : nb) mean += pts[j];
    mean /= double(nb.size() + 1);
    Mat3 cov = Mat3::Zero();
    Vec3 d = pts[i] - mean;
    cov += d * d.transpose();
    for (int j : nb) {
      d = pts[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    double trace = es.eigenvalues().sum();
    if (trace > 1e-12) scores[i] = es.eigenvalues()(0) / trace;
  }
  return scores;
}

constexpr double kDistinctive = 1e-7;

Vec6 weighted_log(const SE3& a, const SE3& b, double rot_weight) {
  Vec6 r = se3_log(a.inverse() * b);
  r.tail<3>() *= rot_weight;
  return r;
}

Mat6 adjoint_inverse(const SE3& T) {
  // Ad(T^-1) for twist ordering [rho; omega]
  Mat3 Rt = T.R.transpose();
  Mat6 ad = Mat6::Zero();
  ad.block<3, 3>(0, 0) = Rt;
  ad.block<3, 3>(0, 3) = -Rt * skew(T.t);
  ad.block<3, 3>(3, 3) = Rt;
  return ad;
}

}  // namespace

KeypointSelection select_keypoints(const PointCloud& cloud, const FlowConfig& cfg) {
  if (cloud.empty()) throw DataError("select_keypoints: empty cloud");
  int n = int(cloud.size());
  if (cfg.min_keypoints > n) {
    throw DataError("select_keypoints: min_keypoints exceeds point count");
  }
  std::vector<Vec3> pts = positions(cloud);
  std::vector<double> scores = curvature_scores(pts, cfg.curvature_knn);

  int quota = std::max(cfg.min_keypoints,
                       int(std::ceil(cfg.keypoint_quantile * double(n))));
  quota = std::min(quota, n);

  std::vector<int> by_score(n);
  std::iota(by_score.begin(), by_score.end(), 0);
  std::stable_sort(by_score.begin(), by_score.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  KeypointSelection sel;
  std::vector<uint8_t> taken(n, 0);
  for (int i : by_score) {
    if (int(sel.indices.size()) >= quota) break;
    if (scores[i] <= kDistinctive) break;
    sel.indices.push_back(i);
    taken[i] = 1;
  }
  sel.uniform_fallback = sel.indices.empty();

  // Top up with a uniform stride so featureless regions keep data terms.
  int missing = quota - int(sel.indices.size());
  if (missing > 0) {
    int stride = std::max(1, n / missing);
    for (int i = 0; i < n && missing > 0; i += stride) {
      if (taken[i]) continue;
      sel.indices.push_back(i);
      taken[i] = 1;
      --missing;
    }
  }
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

FlowGraph build_graph(const PointCloud& scan1, const std::vector<int>& keypoints,
                      const PointCloud& scan2, const FlowConfig& cfg) {
  if (scan2.empty()) throw DataError("build_graph: empty second scan");
  for (int i : keypoints) {
    if (i < 0 || i >= int(scan1.size())) {
      throw DataError("build_graph: keypoint index out of range");
    }
  }
  std::vector<Vec3> pts = positions(scan1);

  FlowGraph g;
  g.keypoints = keypoints;
  g.lambda_data = cfg.lambda_data;
  g.lambda_reg = cfg.lambda_reg;
  g.rot_weight = cfg.rot_weight;
  g.adjacency.resize(scan1.size());
  g.targets.assign(keypoints.size(), Vec3::Zero());
  g.target_valid.assign(keypoints.size(), 0);

  SpatialGrid grid(pts, 1.0);
  std::vector<std::pair<int, int>> raw;
  for (int i = 0; i < int(scan1.size()); ++i) {
    for (int j : grid.knn(pts[i], cfg.k, i)) {
      raw.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  g.edges = std::move(raw);
  for (auto [i, j] : g.edges) {
    g.adjacency[i].push_back(j);
    g.adjacency[j].push_back(i);
  }
  return g;
}

double energy(const MotionField& field, const FlowGraph& graph, const PointCloud& scan1) {
  for (std::size_t i = 0; i < field.tau.size(); ++i) {
    if (field.valid[i] && !is_rigid(field.tau[i], 1e-6)) {
      throw NumericalError("energy: invalid transform in motion field");
    }
  }
  std::vector<Vec3> pts = positions(scan1);
  double e = 0.0;
  for (std::size_t ki = 0; ki < graph.keypoints.size(); ++ki) {
    if (!graph.target_valid[ki]) continue;
    int i = graph.keypoints[ki];
    e += graph.lambda_data * (field.tau[i] * pts[i] - graph.targets[ki]).squaredNorm();
  }
  for (auto [i, j] : graph.edges) {
    e += graph.lambda_reg *
         weighted_log(field.tau[i], field.tau[j], graph.rot_weight).squaredNorm();
  }
  return e;
}

namespace {

struct LocalContext {
  const FlowGraph& graph;
  const std::vector<Vec3>& pts;
  std::vector<int> keypoint_slot;  // -1 if not a keypoint
};

double local_energy(const LocalContext& ctx, const MotionField& field, int i) {
  double e = 0.0;
  int ki = ctx.keypoint_slot[i];
  if (ki >= 0 && ctx.graph.target_valid[ki]) {
    e += ctx.graph.lambda_data *
         (field.tau[i] * ctx.pts[i] - ctx.graph.targets[ki]).squaredNorm();
  }
  for (int j : ctx.graph.adjacency[i]) {
    e += ctx.graph.lambda_reg *
         weighted_log(field.tau[i], field.tau[j], ctx.graph.rot_weight).squaredNorm();
  }
  return e;
}

// One damped Gauss-Newton update of tau_i with all neighbors fixed.
// Left perturbation tau_i <- exp(delta) tau_i; the regularizer Jacobian
// uses the small-residual approximation -Ad(tau_j^-1), which damping
// makes safe far from convergence.
bool update_point(const LocalContext& ctx, MotionField& field, int i) {
  Mat6 H = Mat6::Zero();
  Vec6 b = Vec6::Zero();
  const FlowGraph& g = ctx.graph;

  int ki = ctx.keypoint_slot[i];
  if (ki >= 0 && g.target_valid[ki]) {
    Vec3 tp = field.tau[i] * ctx.pts[i];
    Vec3 r = tp - g.targets[ki];
    Eigen::Matrix<double, 3, 6> J;
    J.block<3, 3>(0, 0) = Mat3::Identity();
    J.block<3, 3>(0, 3) = -skew(tp);
    H += g.lambda_data * J.transpose() * J;
    b -= g.lambda_data * J.transpose() * r;
  }
  Mat6 W = Mat6::Identity();
  W.diagonal().tail<3>().setConstant(g.rot_weight);
  for (int j : g.adjacency[i]) {
    Vec6 r = weighted_log(field.tau[i], field.tau[j], g.rot_weight);
    Mat6 J = -W * adjoint_inverse(field.tau[j]);
    H += g.lambda_reg * J.transpose() * J;
    b -= g.lambda_reg * J.transpose() * r;
  }
  if (b.norm() < 1e-14) return false;

  H.diagonal().array() += 1e-9;
  Vec6 delta = H.ldlt().solve(b);
  if (!delta.allFinite()) return false;

  double e_before = local_energy(ctx, field, i);
  SE3 old = field.tau[i];
  for (int attempt = 0; attempt < 8; ++attempt) {
    SE3 cand = se3_exp(delta) * old;
    cand.R = orthonormalize(cand.R);
    field.tau[i] = cand;
    if (local_energy(ctx, field, i) < e_before) return true;
    delta *= 0.5;
  }
  field.tau[i] = old;
  return false;
}

}  // namespace

FlowResult minimize(FlowGraph& graph, const PointCloud& scan1, const PointCloud& scan2,
                    const MotionField& init, const FlowConfig& cfg) {
  if (init.tau.size() != scan1.size()) {
    throw DataError("minimize: init field does not match scan 1");
  }
  std::vector<Vec3> pts1 = positions(scan1);
  std::vector<Vec3> pts2 = positions(scan2);
  SpatialGrid grid2(pts2, 1.0);

  LocalContext ctx{graph, pts1, std::vector<int>(scan1.size(), -1)};
  for (std::size_t ki = 0; ki < graph.keypoints.size(); ++ki) {
    ctx.keypoint_slot[graph.keypoints[ki]] = int(ki);
  }

  FlowResult result;
  result.field = init;

  auto refresh_correspondences = [&]() {
    for (std::size_t ki = 0; ki < graph.keypoints.size(); ++ki) {
      int i = graph.keypoints[ki];
      Vec3 moved = result.field.tau[i] * pts1[i];
      int j = grid2.nearest(moved, cfg.corr_max_dist);
      graph.target_valid[ki] = j >= 0;
      if (j >= 0) graph.targets[ki] = pts2[j];
    }
  };

  // Connected components of the neighbor graph. Left-multiplying every tau
  // in a component by one rigid transform leaves the regularizer invariant,
  // so fitting that transform to the component's data residuals (Kabsch)
  // removes the common motion mode, which point-wise sweeps propagate only
  // one hop per sweep.
  std::vector<int> component(scan1.size(), -1);
  int n_comp = 0;
  {
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < scan1.size(); ++seed) {
      if (component[seed] >= 0) continue;
      component[seed] = n_comp;
      stack.push_back(seed);
      while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (int j : graph.adjacency[i]) {
          if (component[j] < 0) {
            component[j] = n_comp;
            stack.push_back(j);
          }
        }
      }
      ++n_comp;
    }
  }
  std::vector<std::vector<int>> comp_members(n_comp);
  for (std::size_t i = 0; i < scan1.size(); ++i) {
    comp_members[component[i]].push_back(int(i));
  }

  auto align_components = [&]() {
    std::vector<std::vector<int>> slots(n_comp);
    for (std::size_t ki = 0; ki < graph.keypoints.size(); ++ki) {
      if (graph.target_valid[ki]) {
        slots[component[graph.keypoints[ki]]].push_back(int(ki));
      }
    }
    for (int c = 0; c < n_comp; ++c) {
      if (slots[c].empty()) continue;
      SE3 g;
      if (slots[c].size() < 3) {
        // Too few pairs for a rotation; use the mean translation residual.
        Vec3 d = Vec3::Zero();
        for (int ki : slots[c]) {
          int i = graph.keypoints[ki];
          d += graph.targets[ki] - result.field.tau[i] * pts1[i];
        }
        g.t = d / double(slots[c].size());
      } else {
        Eigen::Matrix3Xd src(3, slots[c].size()), dst(3, slots[c].size());
        for (std::size_t s = 0; s < slots[c].size(); ++s) {
          int ki = slots[c][s];
          int i = graph.keypoints[ki];
          src.col(s) = result.field.tau[i] * pts1[i];
          dst.col(s) = graph.targets[ki];
        }
        Eigen::Matrix4d M = Eigen::umeyama(src, dst, false);
        g.R = orthonormalize(M.block<3, 3>(0, 0));
        g.t = M.block<3, 1>(0, 3);
      }
      // The identity is in the feasible set, so the fitted transform cannot
      // raise the data term; the regularizer is untouched.
      double before = 0.0, after = 0.0;
      for (int ki : slots[c]) {
        int i = graph.keypoints[ki];
        Vec3 moved = result.field.tau[i] * pts1[i];
        before += (moved - graph.targets[ki]).squaredNorm();
        after += (g * moved - graph.targets[ki]).squaredNorm();
      }
      if (after >= before) continue;  // numerical guard
      for (int i : comp_members[c]) {
        if (!result.field.valid[i]) continue;
        SE3 cand = g * result.field.tau[i];
        cand.R = orthonormalize(cand.R);
        result.field.tau[i] = cand;
      }
    }
  };

  refresh_correspondences();
  double e = energy(result.field, graph, scan1);
  result.energy_history.push_back(e);
  if (e == 0.0) return result;  // already optimal (identical scans)

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    MotionField backup = result.field;
    align_components();
    for (int sweep = 0; sweep < cfg.sweeps_per_iter; ++sweep) {
      for (std::size_t i = 0; i < scan1.size(); ++i) {
        if (result.field.valid[i]) update_point(ctx, result.field, i);
      }
    }
    // Nearest-neighbor refresh can only shrink data residuals.
    refresh_correspondences();
    double e_new = energy(result.field, graph, scan1);
    if (e_new > e + 1e-12) {
      result.field = std::move(backup);
      result.diverged = true;
      break;
    }
    result.energy_history.push_back(e_new);
    ++result.iterations;
    double rel = e > 0 ? (e - e_new) / e : 0.0;
    e = e_new;
    if (rel < cfg.tol) break;
  }
  return result;
}

void write_motion_field(const std::filesystem::path& path, const MotionField& field) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write motion field: " + path.string());
  out << "index,tx,ty,tz,rx,ry,rz\n";
  out.precision(9);
  for (std::size_t i = 0; i < field.tau.size(); ++i) {
    Vec3 w = so3_log(field.tau[i].R);
    const Vec3& t = field.tau[i].t;
    out << i << ',' << t.x() << ',' << t.y() << ',' << t.z() << ',' << w.x() << ','
        << w.y() << ',' << w.z() << '\n';
  }
}

}  // namespace lidarsem
