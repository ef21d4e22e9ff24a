// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. The process exits non-zero when any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "lidarsem/bayes_filter.hpp"
#include "lidarsem/cluster_eval.hpp"
#include "lidarsem/pipeline.hpp"
#include "lidarsem/projection.hpp"
#include "lidarsem/rigid_flow.hpp"
#include "lidarsem/scan_io.hpp"
#include "lidarsem/scene.hpp"
#include "lidarsem/scorer.hpp"

using namespace lidarsem;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// ---------------------------------------------------------------------------
// 1. Filter posterior equals a brute-force product-and-normalize forward pass
//    on random 3-state sequences with an identity transition matrix.
// ---------------------------------------------------------------------------

struct ForwardOracle {
  std::array<double, 3> b;
  double L;

  void advance(double delta, double xi, const FilterConfig& cfg) {
    std::array<double, 3> pred = {0, 0, 0};
    for (int to = 0; to < 3; ++to)
      for (int from = 0; from < 3; ++from)
        pred[to] += cfg.transition(from, to) * b[from];
    double c = std::clamp(xi, 1e-6, 1.0 - 1e-6);
    L = logit(c) + L - logit(cfg.o0);
    double p = 1.0 / (1.0 + std::exp(-L));
    std::array<double, 3> like;
    for (int s = 0; s < 3; ++s) {
      double motion = delta >= 0.0 ? (s == 2 ? delta : 1.0 - delta) : 1.0;
      double object = s == 0 ? 1.0 - p : (s == 1 ? p : cfg.s * p);
      like[s] = motion * object;
    }
    double total = like[0] * pred[0] + like[1] * pred[1] + like[2] * pred[2];
    for (int s = 0; s < 3; ++s) b[s] = like[s] * pred[s] / total;
  }
};

bool criterion_filter_oracle() {
  Clock::time_point t0 = Clock::now();
  FilterConfig cfg;
  cfg.transition.setIdentity();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> xi_dist(0.02, 0.98);
  std::uniform_real_distribution<double> delta_dist(0.0, 0.95);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  double worst = 0.0;
  for (int seq = 0; seq < 120; ++seq) {
    int length = 1 + seq % 10;
    Belief bel = make_prior_belief(1, cfg);
    ForwardOracle oracle{{bel.probs[0][0], bel.probs[0][1], bel.probs[0][2]},
                         bel.logodds[0]};
    for (int t = 0; t < length; ++t) {
      double delta = coin(rng) < 0.2 ? -1.0 : delta_dist(rng);
      double xi = xi_dist(rng);
      std::vector<double> dv = {delta}, xv = {xi};
      bel = step(bel, &dv, xv, cfg);
      oracle.advance(delta, xi, cfg);
      for (int s = 0; s < 3; ++s)
        worst = std::max(worst, std::abs(bel.probs[0][s] - oracle.b[s]));
    }
  }
  double secs = seconds_since(t0);
  std::printf("  120 sequences, max posterior deviation %.3e, %.2fs\n", worst, secs);
  return worst < 1e-9 && secs < 1.0;
}

// ---------------------------------------------------------------------------
// 2. Log-odds update identities.
// ---------------------------------------------------------------------------

bool criterion_logodds_identities() {
  bool ok = true;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> Ldist(-6.0, 6.0);
  std::uniform_real_distribution<double> xdist(0.05, 0.95);
  for (int trial = 0; trial < 100; ++trial) {
    double L = Ldist(rng);
    double o0 = xdist(rng);
    // Observing exactly the prior is a no-op.
    ok = ok && std::abs(logodds_update(L, o0, o0) - L) < 1e-9;
    // Updates commute.
    double x1 = xdist(rng), x2 = xdist(rng);
    double a = logodds_update(logodds_update(L, x1, o0), x2, o0);
    double b = logodds_update(logodds_update(L, x2, o0), x1, o0);
    ok = ok && std::abs(a - b) < 1e-9;
  }
  // A neutral observation against a 0.2 prior adds ln 4.
  double gain = logodds_update(1.25, 0.5, 0.2) - 1.25;
  std::printf("  neutral-observation gain %.9f (ln 4 = %.9f)\n", gain, std::log(4.0));
  ok = ok && std::abs(gain - std::log(4.0)) < 1e-6;
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Object likelihood s-scaling.
// ---------------------------------------------------------------------------

bool criterion_object_likelihood() {
  double L = logit(0.8);
  double non = object_likelihood(PointClass::NonMovable, L, 0.6);
  double mov = object_likelihood(PointClass::Movable, L, 0.6);
  double dyn = object_likelihood(PointClass::Dynamic, L, 0.6);
  std::printf("  p=0.8 -> (%.12f, %.12f, %.12f)\n", non, mov, dyn);
  return std::abs(non - 0.2) < 1e-12 && std::abs(mov - 0.8) < 1e-12 &&
         std::abs(dyn - 0.48) < 1e-12;
}

// ---------------------------------------------------------------------------
// 4. Projection round trip at the default 64x870 resolution.
// ---------------------------------------------------------------------------

bool criterion_projection_roundtrip() {
  Clock::time_point t0 = Clock::now();
  ProjectionConfig cfg;  // defaults
  if (cfg.height != 64 || cfg.width != 870) {
    std::printf("  default dims %dx%d\n", cfg.height, cfg.width);
    return false;
  }
  // One point per pixel, aimed at the bin centers: collision-free by
  // construction.
  double daz = 360.0 / cfg.width;
  double delev = (cfg.elev_max_deg - cfg.elev_min_deg) / (cfg.height - 1);
  PointCloud cloud;
  for (int r = 0; r < cfg.height; r += 1) {
    for (int c = 0; c < cfg.width; c += 3) {
      double az = (-180.0 + c * daz) * M_PI / 180.0;
      double elev = (cfg.elev_max_deg - r * delev) * M_PI / 180.0;
      double range = 3.0 + 0.01 * ((r * 131 + c * 17) % 997);
      Point p;
      p.x = range * std::cos(elev) * std::cos(az);
      p.y = range * std::cos(elev) * std::sin(az);
      p.z = range * std::sin(elev);
      cloud.points.push_back(p);
    }
  }
  auto [img, map] = project(cloud, cfg);
  if (img.height != 64 || img.width != 870) return false;
  std::vector<double> back = back_project(map, img.range, -1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    double range = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    worst = std::max(worst, std::abs(back[i] - range));
  }
  double secs = seconds_since(t0);
  std::printf("  %zu points, dims %dx%d, dropped %zu, max range error %.3e, %.2fs\n",
              cloud.size(), img.height, img.width, map.dropped_out_of_span, worst, secs);
  return map.dropped_out_of_span == 0 && worst < 1e-6 && secs < 1.0;
}

// ---------------------------------------------------------------------------
// 5. Analytic training gradient vs central finite differences.
// ---------------------------------------------------------------------------

bool criterion_gradient_check() {
  Clock::time_point t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_int_distribution<int> hdist(1, 4), wdist(2, 8);
  std::uniform_real_distribution<double> sdist(0.5, 2.0), wtdist(0.3, 3.0);

  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    TrainingSample s;
    s.height = hdist(rng);
    s.width = wdist(rng);
    int n = s.height * s.width;
    s.features.resize(std::size_t(n) * kScorerFeatureDim);
    for (double& f : s.features) f = N(rng);
    s.labels.resize(n);
    s.valid.assign(n, 1);
    for (int i = 0; i < n; ++i) s.labels[i] = uint8_t(i % 2);
    if (n > 2) s.valid[std::uniform_int_distribution<int>(0, n - 1)(rng)] = 0;

    ScorerModel m;
    m.w0.resize(kScorerFeatureDim + 1);
    m.w1.resize(kScorerFeatureDim + 1);
    for (double& w : m.w0) w = 0.5 * N(rng);
    for (double& w : m.w1) w = 0.5 * N(rng);
    m.feat_mean.resize(kScorerFeatureDim);
    m.feat_std.resize(kScorerFeatureDim);
    for (double& v : m.feat_mean) v = 0.2 * N(rng);
    for (double& v : m.feat_std) v = sdist(rng);

    std::array<double, 2> cw = {wtdist(rng), wtdist(rng)};
    std::vector<double> g0, g1;
    sample_loss_and_grad(m, s, cw, &g0, &g1);

    const double eps = 1e-6;
    for (int k = 0; k <= kScorerFeatureDim; ++k) {
      for (int side = 0; side < 2; ++side) {
        std::vector<double>& w = side == 0 ? m.w0 : m.w1;
        double saved = w[k];
        w[k] = saved + eps;
        double lp = sample_loss_and_grad(m, s, cw, nullptr, nullptr);
        w[k] = saved - eps;
        double lm = sample_loss_and_grad(m, s, cw, nullptr, nullptr);
        w[k] = saved;
        double fd = (lp - lm) / (2.0 * eps);
        double an = side == 0 ? g0[k] : g1[k];
        double rel = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
        worst = std::max(worst, rel);
      }
    }
  }
  double secs = seconds_since(t0);
  std::printf("  50 configurations, max relative error %.3e, %.2fs\n", worst, secs);
  return worst < 1e-4 && secs < 10.0;
}

// ---------------------------------------------------------------------------
// 6. Median-frequency class balancing raises minority recall at max F1.
// ---------------------------------------------------------------------------

TrainingSample imbalanced_set(uint64_t seed, int n_major, int n_minor) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  TrainingSample s;
  int n = n_major + n_minor;
  s.height = 1;
  s.width = n;
  s.features.assign(std::size_t(n) * kScorerFeatureDim, 0.0);
  s.labels.assign(n, 0);
  s.valid.assign(n, 1);
  for (int i = 0; i < n; ++i) {
    double* f = &s.features[std::size_t(i) * kScorerFeatureDim];
    bool minor = i >= n_major;
    double u = N(rng), v = N(rng);
    // Majority class elongated and correlated; minority compact and offset,
    // overlapping the majority tail so the weighting rotates the boundary.
    if (minor) {
      f[0] = 2.0 + 0.5 * u;
      f[1] = 1.0 + 0.5 * v;
    } else {
      f[0] = 2.0 * u;
      f[1] = 0.6 * u + 0.5 * v;
    }
    for (int k = 2; k < kScorerFeatureDim; ++k) f[k] = 0.3 * N(rng);
    s.labels[i] = minor ? 1 : 0;
  }
  return s;
}

double minority_recall_at_max_f1(const ScorerModel& m, const TrainingSample& s) {
  int n = s.width;
  std::vector<double> conf(n);
  std::vector<uint8_t> pos(n);
  for (int i = 0; i < n; ++i) {
    const double* f = &s.features[std::size_t(i) * kScorerFeatureDim];
    double a0 = m.w0.back(), a1 = m.w1.back();
    for (int k = 0; k < kScorerFeatureDim; ++k) {
      double z = (f[k] - m.feat_mean[k]) / m.feat_std[k];
      a0 += m.w0[k] * z;
      a1 += m.w1[k] * z;
    }
    conf[i] = softmax_objectness(a0, a1);
    pos[i] = s.labels[i];
  }
  return pr_curve(conf, pos).max_f1_recall;
}

bool criterion_class_balancing() {
  Clock::time_point t0 = Clock::now();
  TrainingSample s = imbalanced_set(42, 900, 100);
  ScorerConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.momentum = 0.9;
  cfg.epochs = 40;
  cfg.seed = 5;
  cfg.class_balance = true;
  ScorerModel balanced = train({s}, cfg);
  cfg.class_balance = false;
  ScorerModel unbalanced = train({s}, cfg);
  double rb = minority_recall_at_max_f1(balanced, s);
  double ru = minority_recall_at_max_f1(unbalanced, s);
  double secs = seconds_since(t0);
  std::printf("  recall at max F1: balanced %.4f vs unbalanced %.4f, %.2fs\n", rb, ru, secs);
  return rb > ru && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 7. Motion-field recovery of a 1 m/frame object over a static background.
// ---------------------------------------------------------------------------

bool criterion_flow_recovery() {
  SceneConfig sc;
  sc.rings = 32;
  sc.azimuth_count = 870;
  sc.range_max = 15.0;
  SceneBox box;
  box.kind = SceneBox::Kind::Moving;
  box.center = Vec3(8, 0, 0.4);  // detached from the ground plane
  box.size = Vec3(3, 2, 1.5);
  box.velocity = Vec3(1, 0, 0);
  sc.boxes.push_back(box);
  SynthFrame f0 = synth_scene(sc, 0), f1 = synth_scene(sc, 1);
  if (f0.cloud.size() > 20000) {
    std::printf("  scene too large: %zu points\n", f0.cloud.size());
    return false;
  }

  Clock::time_point t0 = Clock::now();
  FlowConfig cfg;
  KeypointSelection sel = select_keypoints(f0.cloud, cfg);
  FlowGraph graph = build_graph(f0.cloud, sel.indices, f1.cloud, cfg);
  FlowResult res = minimize(graph, f0.cloud, f1.cloud,
                            MotionField::constant(f0.cloud.size(), SE3()), cfg);
  double secs = seconds_since(t0);

  double obj_err = 0.0, bg_err = 0.0;
  for (std::size_t i = 0; i < f0.cloud.size(); ++i) {
    const Vec3& t = res.field.tau[i].t;
    if (f0.gt.box_ids[i] >= 0)
      obj_err = std::max(obj_err, (t - Vec3(1, 0, 0)).norm());
    else
      bg_err = std::max(bg_err, t.norm());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < res.energy_history.size(); ++i)
    monotone = monotone && res.energy_history[i] <= res.energy_history[i - 1] + 1e-12;
  std::printf("  %zu points, object error %.4f m, background %.4f m, monotone=%d, %.2fs\n",
              f0.cloud.size(), obj_err, bg_err, int(monotone), secs);
  return obj_err < 0.05 && bg_err < 0.05 && monotone && !res.diverged && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 8 & 10. End-to-end benchmark and byte-level determinism.
// ---------------------------------------------------------------------------

struct Bench {
  fs::path root;
  bool ran = false;
  double secs = 0.0;
  std::array<double, 3> f1_exp1 = {0, 0, 0};
  std::array<double, 3> f1_exp3 = {0, 0, 0};
  bool deterministic = false;

  static void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  }

  static std::array<double, 3> class_f1(const fs::path& out, const fs::path& data,
                                        int frames) {
    std::array<std::vector<double>, 3> conf;
    std::array<std::vector<uint8_t>, 3> pos;
    for (int t = 0; t < frames; ++t) {
      char n1[48], n2[48], n3[48];
      std::snprintf(n1, sizeof(n1), "frame_%04d.labels.csv", t);
      std::snprintf(n2, sizeof(n2), "frame_%04d.gt.csv", t);
      std::snprintf(n3, sizeof(n3), "frame_%04d.boxes.csv", t);
      std::vector<LabelRecord> rec = read_labels(out / n1);
      GroundTruth gt = read_ground_truth(data / n2, data / n3);
      for (std::size_t i = 0; i < rec.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
          conf[c].push_back(rec[i].belief[c]);
          pos[c].push_back(gt.labels[i] == PointClass(c) ? 1 : 0);
        }
      }
    }
    std::array<double, 3> f1{};
    for (int c = 0; c < 3; ++c) f1[c] = pr_curve(conf[c], pos[c]).max_f1;
    return f1;
  }

  void run() {
    root = fs::temp_directory_path() / ("lidarsem_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    write(root / "scene.ini",
          "[scene]\nframes = 20\nground_z = -1.5\nrange_max = 25\n"
          "[sensor]\nrings = 32\nazimuth_count = 480\nvelocity = 0.05 0 0\n"
          "[box]\nkind = parked\ncenter = 7 2 -0.5\nsize = 3 2 2\n"
          "[box]\nkind = parked\ncenter = 16 -2 -0.5\nsize = 3 2 2\n"
          "[box]\nkind = moving\ncenter = 9 -6 0\nsize = 3 2 2\nvelocity = 0.3 0 0\n"
          "[box]\nkind = moving\ncenter = 13 5 0\nsize = 3 2 2\nvelocity = -0.3 0 0\n"
          "difficulty = moderate\n");
    write(root / "pipeline.ini",
          "[paths]\nscans = data\nposes = data/poses.txt\ngt = data\n"
          "model = out/exp1/model.bin\nout = out/exp1\nscene = scene.ini\n"
          "[run]\nseed = 1\nmode = exp1\n"
          "[projection]\nheight = 32\nwidth = 480\n"
          "[scorer]\nlearning_rate = 1e-4\nmomentum = 0.9\nepochs = 20\n"
          "[flow]\nkeypoint_quantile = 0.1\nmax_iters = 15\n"
          "[filter]\nsigma_trans = 0.12\n"
          "[cluster]\nradius = 0.6\nmin_points = 10\n");

    Clock::time_point t0 = Clock::now();
    PipelineConfig cfg = load_pipeline_config(root / "pipeline.ini");
    cmd_synth(cfg);
    cmd_train(cfg);
    cmd_classify(cfg);
    PipelineConfig c3 = cfg;
    c3.mode = "exp3";
    c3.filter.object_update = mode_from_string("exp3");
    c3.out_dir = root / "out/exp3";
    cmd_classify(c3);
    secs = seconds_since(t0);

    f1_exp1 = class_f1(root / "out/exp1", root / "data", 20);
    f1_exp3 = class_f1(root / "out/exp3", root / "data", 20);

    // Identical config and seed, fresh output directory.
    PipelineConfig rerun = cfg;
    rerun.out_dir = root / "out/exp1_rerun";
    cmd_classify(rerun);
    deterministic = true;
    for (int t = 0; t < 20; ++t) {
      char name[48];
      std::snprintf(name, sizeof(name), "frame_%04d.labels.csv", t);
      deterministic = deterministic &&
                      slurp(root / "out/exp1" / name) == slurp(root / "out/exp1_rerun" / name);
    }
    ran = true;
  }

  ~Bench() {
    if (!root.empty()) fs::remove_all(root);
  }
};

bool criterion_benchmark(const Bench& b) {
  std::printf("  exp1 max F1: non-movable %.4f, movable %.4f, dynamic %.4f\n",
              b.f1_exp1[0], b.f1_exp1[1], b.f1_exp1[2]);
  std::printf("  exp3 dynamic max F1 %.4f, runtime %.1fs\n", b.f1_exp3[2], b.secs);
  bool ok = b.ran && b.secs < 300.0;
  for (double f : b.f1_exp1) ok = ok && f >= 0.90;
  ok = ok && b.f1_exp1[2] >= b.f1_exp3[2];
  return ok;
}

bool criterion_determinism(const Bench& b) {
  std::printf("  20 label files byte-compared across reruns\n");
  return b.ran && b.deterministic;
}

// ---------------------------------------------------------------------------
// 9. Evaluation metrics against hand-worked instances.
// ---------------------------------------------------------------------------

Box3D make_box(double cx, double cy, double cz, double sx, double sy, double sz,
               double yaw, double score = 0.0) {
  Box3D b;
  b.cx = cx; b.cy = cy; b.cz = cz;
  b.sx = sx; b.sy = sy; b.sz = sz;
  b.yaw = yaw;
  b.score = score;
  return b;
}

bool criterion_eval_metrics() {
  bool ok = true;

  // PR: threshold 0.6 gives tp=3 fp=1 -> precision 0.75, recall 1, F1 6/7.
  PRCurve curve = pr_curve({0.9, 0.8, 0.7, 0.6, 0.5, 0.4}, {1, 1, 0, 1, 0, 0});
  ok = ok && std::abs(curve.max_f1 - 6.0 / 7.0) < 1e-12;
  ok = ok && std::abs(curve.max_f1_threshold - 0.6) < 1e-12;
  ok = ok && std::abs(curve.max_f1_precision - 0.75) < 1e-12;
  ok = ok && std::abs(curve.max_f1_recall - 1.0) < 1e-12;

  std::vector<Box3D> gt = {make_box(0, 0, 0, 2, 2, 2, 0),
                           make_box(10, 0, 0, 2, 2, 2, 0)};
  std::vector<Box3D> perfect = gt;
  perfect[0].score = 0.9;
  perfect[1].score = 0.8;
  ok = ok && std::abs(*average_precision(perfect, gt) - 1.0) < 1e-12;

  // tp, fp, tp in score order: precisions (1, 1/2, 2/3), recalls
  // (1/2, 1/2, 1). Eleven-point 28/33, continuous 5/6.
  std::vector<Box3D> mixed = {make_box(0, 0, 0, 2, 2, 2, 0, 0.9),
                              make_box(50, 0, 0, 2, 2, 2, 0, 0.8),
                              make_box(10, 0, 0, 2, 2, 2, 0, 0.7)};
  ok = ok && std::abs(*average_precision(mixed, gt) - 28.0 / 33.0) < 1e-12;
  ok = ok && std::abs(*average_precision(mixed, gt, 0.5, {},
                                         ApInterpolation::Continuous) - 5.0 / 6.0) < 1e-12;

  // Unit cubes offset by half a side: intersection 1/2, union 3/2.
  double iou = iou3d(make_box(0, 0, 0, 1, 1, 1, 0), make_box(0.5, 0, 0, 1, 1, 1, 0));
  std::printf("  max F1 %.12f, AP %.12f / %.12f, offset-cube IoU %.12f\n",
              curve.max_f1, *average_precision(mixed, gt),
              *average_precision(mixed, gt, 0.5, {}, ApInterpolation::Continuous), iou);
  ok = ok && std::abs(iou - 1.0 / 3.0) < 1e-9;
  return ok;
}

}  // namespace

int main() {
  Bench bench;
  bench.run();

  struct Entry {
    const char* name;
    bool passed;
  };
  std::vector<Entry> results;
  auto record = [&](const char* name, bool passed) {
    results.push_back({name, passed});
    std::printf("[%s] %s\n", passed ? "PASS" : "FAIL", name);
  };

  std::printf("criterion 1: filter matches brute-force forward oracle\n");
  record("criterion 1", criterion_filter_oracle());
  std::printf("criterion 2: log-odds update identities\n");
  record("criterion 2", criterion_logodds_identities());
  std::printf("criterion 3: object likelihood scaling\n");
  record("criterion 3", criterion_object_likelihood());
  std::printf("criterion 4: projection round trip at 64x870\n");
  record("criterion 4", criterion_projection_roundtrip());
  std::printf("criterion 5: training gradient vs finite differences\n");
  record("criterion 5", criterion_gradient_check());
  std::printf("criterion 6: class balancing raises minority recall\n");
  record("criterion 6", criterion_class_balancing());
  std::printf("criterion 7: motion field recovers 1 m/frame object\n");
  record("criterion 7", criterion_flow_recovery());
  std::printf("criterion 8: end-to-end benchmark F1\n");
  record("criterion 8", criterion_benchmark(bench));
  std::printf("criterion 9: evaluation metrics hand cases\n");
  record("criterion 9", criterion_eval_metrics());
  std::printf("criterion 10: byte-identical reruns\n");
  record("criterion 10", criterion_determinism(bench));

  int failures = 0;
  for (const Entry& e : results) failures += e.passed ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", int(results.size()) - failures, results.size());
  return failures == 0 ? 0 : 1;
}
