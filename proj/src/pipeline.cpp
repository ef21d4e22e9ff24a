#include "lidarsem/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lidarsem/scan_io.hpp"
#include "lidarsem/scene.hpp"
#include "lidarsem/spatial_grid.hpp"

namespace lidarsem {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string frame_name(int t, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%04d%s", t, suffix);
  return buf;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw DataError("not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

class StageTimer {
 public:
  StageTimer(RunManifest& m, std::string name)
      : manifest_(m), name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    auto dt = std::chrono::steady_clock::now() - start_;
    manifest_.stage_seconds[name_] +=
        std::chrono::duration<double>(dt).count();
  }

 private:
  RunManifest& manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

// Writes the manifest on scope exit, also when unwinding from an error.
class ManifestGuard {
 public:
  ManifestGuard(RunManifest& m, fs::path path) : manifest_(m), path_(std::move(path)) {}
  ~ManifestGuard() {
    try {
      manifest_.write(path_);
    } catch (...) {
    }
  }

 private:
  RunManifest& manifest_;
  fs::path path_;
};

}  // namespace

void RunManifest::write(const fs::path& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["stage_seconds"] = stage_seconds;
  j["frame_point_counts"] = frame_point_counts;
  j["warnings"] = warnings;
  j["metrics"] = metrics;
  j["scorer_source"] = scorer_source;
  j["completed"] = completed;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

ObjectUpdateMode mode_from_string(const std::string& mode) {
  if (mode == "exp1") return ObjectUpdateMode::Recursive;
  if (mode == "exp2") return ObjectUpdateMode::Instantaneous;
  if (mode == "exp3") return ObjectUpdateMode::Off;
  throw ConfigError("unknown experiment mode: " + mode);
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  IniFile ini = parse_ini_text(text);

  PipelineConfig cfg;
  cfg.config_hash = fnv1a(text);
  fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  if (const IniSection* s = ini.find("paths")) {
    if (s->has("scans")) cfg.scans_dir = resolve(s->get("scans"));
    if (s->has("poses")) cfg.poses_path = resolve(s->get("poses"));
    if (s->has("gt")) cfg.gt_dir = resolve(s->get("gt"));
    if (s->has("scores")) cfg.scores_dir = resolve(s->get("scores"));
    if (s->has("model")) cfg.model_path = resolve(s->get("model"));
    if (s->has("out")) cfg.out_dir = resolve(s->get("out"));
    if (s->has("scene")) cfg.scene_path = resolve(s->get("scene"));
  }
  if (const IniSection* s = ini.find("run")) {
    cfg.seed = uint64_t(s->get_int("seed", 0));
    cfg.mode = s->get("mode", cfg.mode);
  }
  if (const IniSection* s = ini.find("projection")) {
    cfg.projection.height = s->get_int("height", cfg.projection.height);
    cfg.projection.width = s->get_int("width", cfg.projection.width);
    cfg.projection.elev_min_deg = s->get_double("elev_min_deg", cfg.projection.elev_min_deg);
    cfg.projection.elev_max_deg = s->get_double("elev_max_deg", cfg.projection.elev_max_deg);
  }
  if (const IniSection* s = ini.find("scorer")) {
    cfg.scorer.learning_rate = s->get_double("learning_rate", cfg.scorer.learning_rate);
    cfg.scorer.momentum = s->get_double("momentum", cfg.scorer.momentum);
    cfg.scorer.epochs = s->get_int("epochs", cfg.scorer.epochs);
    cfg.scorer.class_balance = s->get_bool("class_balance", cfg.scorer.class_balance);
  }
  if (const IniSection* s = ini.find("flow")) {
    cfg.flow.k = s->get_int("k", cfg.flow.k);
    cfg.flow.lambda_data = s->get_double("lambda_data", cfg.flow.lambda_data);
    cfg.flow.lambda_reg = s->get_double("lambda_reg", cfg.flow.lambda_reg);
    cfg.flow.rot_weight = s->get_double("rot_weight", cfg.flow.rot_weight);
    cfg.flow.keypoint_quantile =
        s->get_double("keypoint_quantile", cfg.flow.keypoint_quantile);
    cfg.flow.tol = s->get_double("tol", cfg.flow.tol);
    cfg.flow.max_iters = s->get_int("max_iters", cfg.flow.max_iters);
    cfg.flow.corr_max_dist = s->get_double("corr_max_dist", cfg.flow.corr_max_dist);
  }
  if (const IniSection* s = ini.find("filter")) {
    cfg.filter.o0 = s->get_double("o0", cfg.filter.o0);
    cfg.filter.s = s->get_double("s", cfg.filter.s);
    cfg.filter.match_radius = s->get_double("match_radius", cfg.filter.match_radius);
    double st = s->get_double("sigma_trans", 0.05);
    double sr = s->get_double("sigma_rot_deg", 1.0) * M_PI / 180.0;
    cfg.filter.sigma.setZero();
    cfg.filter.sigma.diagonal().head<3>().setConstant(st * st);
    cfg.filter.sigma.diagonal().tail<3>().setConstant(sr * sr);
  }
  if (const IniSection* s = ini.find("cluster")) {
    cfg.cluster.radius = s->get_double("radius", cfg.cluster.radius);
    cfg.cluster.min_points = s->get_int("min_points", cfg.cluster.min_points);
  }
  if (const IniSection* s = ini.find("eval")) {
    std::string interp = s->get("ap_interpolation", "11point");
    if (interp == "11point") {
      cfg.ap_interp = ApInterpolation::ElevenPoint;
    } else if (interp == "continuous") {
      cfg.ap_interp = ApInterpolation::Continuous;
    } else {
      throw ConfigError("[eval] unknown ap_interpolation: " + interp);
    }
  }
  cfg.filter.object_update = mode_from_string(cfg.mode);
  return cfg;
}

void cmd_synth(const PipelineConfig& cfg) {
  if (!cfg.scene_path) throw ConfigError("synth: [paths] scene is required");
  SceneConfig scene = parse_scene_config(*cfg.scene_path);
  fs::create_directories(cfg.scans_dir);
  fs::path gt_dir = cfg.gt_dir.value_or(cfg.scans_dir);
  fs::create_directories(gt_dir);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  ManifestGuard guard(manifest, cfg.scans_dir / "run_manifest.json");
  StageTimer timer(manifest, "synth");

  std::vector<Pose> poses;
  for (int t = 0; t < scene.frames; ++t) {
    SynthFrame frame = synth_scene(scene, t);
    write_velodyne_bin(cfg.scans_dir / frame_name(t, ".bin"), frame.cloud);
    write_ground_truth(gt_dir / frame_name(t, ".gt.csv"),
                       gt_dir / frame_name(t, ".boxes.csv"), frame.gt);
    poses.push_back(frame.pose);
    manifest.frame_point_counts.push_back(frame.cloud.size());
  }
  write_poses(cfg.poses_path.empty() ? cfg.scans_dir / "poses.txt" : cfg.poses_path,
              poses);
  manifest.completed = true;
}

void cmd_project(const PipelineConfig& cfg) {
  std::vector<fs::path> scans = sorted_files(cfg.scans_dir, ".bin");
  if (scans.empty()) throw DataError("project: no .bin scans in " + cfg.scans_dir.string());
  fs::create_directories(cfg.out_dir);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  ManifestGuard guard(manifest, cfg.out_dir / "run_manifest.json");
  StageTimer timer(manifest, "project");

  for (const fs::path& scan_path : scans) {
    PointCloud cloud = read_velodyne_bin(scan_path);
    auto [img, map] = project(cloud, cfg.projection);
    write_pgm_channels(img, cfg.out_dir / scan_path.stem());
    manifest.frame_point_counts.push_back(cloud.size());
  }
  manifest.completed = true;
}

namespace {

// Per-pixel movable labels for training, from pointwise ground truth.
std::vector<uint8_t> pixel_labels(const PixelIndexMap& map, const GroundTruth& gt) {
  std::vector<uint8_t> labels(map.pixel_to_point.size(), 0);
  for (std::size_t pix = 0; pix < labels.size(); ++pix) {
    int32_t pt = map.pixel_to_point[pix];
    if (pt < 0) continue;
    PointClass c = gt.labels[pt];
    labels[pix] = (c == PointClass::Movable || c == PointClass::Dynamic) ? 1 : 0;
  }
  return labels;
}

}  // namespace

void cmd_train(const PipelineConfig& cfg) {
  if (!cfg.gt_dir) throw ConfigError("train: [paths] gt is required");
  std::vector<fs::path> scans = sorted_files(cfg.scans_dir, ".bin");
  if (scans.empty()) throw DataError("train: no scans in " + cfg.scans_dir.string());
  fs::create_directories(cfg.out_dir);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  ManifestGuard guard(manifest, cfg.out_dir / "run_manifest.json");

  std::vector<TrainingSample> samples;
  {
    StageTimer timer(manifest, "features");
    for (std::size_t t = 0; t < scans.size(); ++t) {
      PointCloud cloud = read_velodyne_bin(scans[t]);
      GroundTruth gt = read_ground_truth(*cfg.gt_dir / frame_name(int(t), ".gt.csv"),
                                         *cfg.gt_dir / frame_name(int(t), ".boxes.csv"));
      if (gt.labels.size() != cloud.size()) {
        throw DataError("train: gt/point count mismatch at frame " + std::to_string(t));
      }
      auto [img, map] = project(cloud, cfg.projection);
      samples.push_back(make_training_sample(img, pixel_labels(map, gt)));
      manifest.frame_point_counts.push_back(cloud.size());
    }
  }
  ScorerConfig scfg = cfg.scorer;
  scfg.seed = cfg.seed;
  ScorerModel model;
  {
    StageTimer timer(manifest, "train");
    model = train(samples, scfg);
  }
  save_model(cfg.out_dir / "model.bin", model);
  manifest.metrics["final_loss"] = model.final_loss;
  manifest.completed = true;
}

void cmd_classify(const PipelineConfig& cfg) {
  std::vector<fs::path> scans = sorted_files(cfg.scans_dir, ".bin");
  if (scans.empty()) throw DataError("classify: no scans in " + cfg.scans_dir.string());
  std::vector<Pose> poses = read_poses(cfg.poses_path);
  if (poses.size() != scans.size()) {
    throw DataError("classify: pose count (" + std::to_string(poses.size()) +
                    ") does not match scan count (" + std::to_string(scans.size()) + ")");
  }

  const bool use_object = cfg.filter.object_update != ObjectUpdateMode::Off;
  std::optional<ScorerModel> model;
  if (use_object) {
    if (cfg.model_path.has_value() == cfg.scores_dir.has_value()) {
      throw ConfigError("classify: exactly one scorer source (model | scores) required");
    }
    if (cfg.model_path) model = load_model(*cfg.model_path);
  }

  fs::create_directories(cfg.out_dir);
  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  manifest.scorer_source = !use_object ? "none" : (model ? "model" : "scores");
  ManifestGuard guard(manifest, cfg.out_dir / "run_manifest.json");

  PointCloud prev_cloud;
  MotionField prev_field;
  Belief prev_belief;
  bool have_prev = false;

  for (std::size_t t = 0; t < scans.size(); ++t) {
    PointCloud cloud = read_velodyne_bin(scans[t]);
    manifest.frame_point_counts.push_back(cloud.size());
    std::size_t n = cloud.size();

    // Objectness per point.
    std::vector<double> xi(n, cfg.filter.o0);
    if (use_object) {
      StageTimer timer(manifest, "score");
      auto [img, map] = project(cloud, cfg.projection);
      ScoreMap scores =
          model ? predict(*model, img)
                : load_scores(cfg.scores_dir->string() + "/" + frame_name(int(t), ".score"),
                              cfg.projection.height, cfg.projection.width);
      // Points outside the elevation span keep the prior o0 (no evidence).
      xi = back_project(map, scores.xi, cfg.filter.o0);
    }

    // Motion field towards the next scan.
    MotionField field;
    std::vector<double> delta;
    bool have_motion = false;
    if (t + 1 < scans.size()) {
      StageTimer timer(manifest, "flow");
      PointCloud next = read_velodyne_bin(scans[t + 1]);
      SE3 odom = poses[t + 1].inverse() * poses[t];
      KeypointSelection keys = select_keypoints(cloud, cfg.flow);
      if (keys.uniform_fallback) {
        manifest.warnings.push_back("frame " + std::to_string(t) +
                                    ": keypoint fallback to uniform subsampling");
      }
      FlowGraph graph = build_graph(cloud, keys.indices, next, cfg.flow);
      FlowResult flow =
          minimize(graph, cloud, next, MotionField::constant(n, odom), cfg.flow);
      if (flow.diverged) {
        manifest.warnings.push_back("frame " + std::to_string(t) +
                                    ": flow returned best-so-far after energy increase");
      }
      field = std::move(flow.field);
      delta.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        delta[i] = dynamicity(field.tau[i], odom, cfg.filter.sigma);
      }
      have_motion = true;
      write_motion_field(cfg.out_dir / frame_name(int(t), ".flow.csv"), field);
    }

    // Belief carried over from the previous frame by transporting its
    // points with their estimated motion.
    Belief incoming = make_prior_belief(n, cfg.filter);
    if (have_prev) {
      StageTimer timer(manifest, "track");
      std::vector<Vec3> transported(prev_cloud.size());
      for (std::size_t i = 0; i < prev_cloud.size(); ++i) {
        const Point& p = prev_cloud.points[i];
        transported[i] = prev_field.tau[i] * Vec3(p.x, p.y, p.z);
      }
      SpatialGrid grid(transported, std::max(cfg.filter.match_radius, 0.1));
      for (std::size_t i = 0; i < n; ++i) {
        const Point& p = cloud.points[i];
        int j = grid.nearest(Vec3(p.x, p.y, p.z), cfg.filter.match_radius);
        if (j >= 0) {
          incoming.probs[i] = prev_belief.probs[j];
          incoming.logodds[i] = prev_belief.logodds[j];
        }
      }
    }

    Belief belief;
    {
      StageTimer timer(manifest, "filter");
      belief = step(incoming, have_motion ? &delta : nullptr, xi, cfg.filter);
    }

    std::vector<PointClass> labels = classify(belief);
    std::vector<LabelRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
      records[i].label = labels[i];
      records[i].belief = belief.probs[i];
    }
    write_labels(cfg.out_dir / frame_name(int(t), ".labels.csv"), records);

    prev_cloud = std::move(cloud);
    prev_field = std::move(field);
    prev_belief = std::move(belief);
    have_prev = have_motion;  // transport needs the motion field
  }
  manifest.completed = true;
}

void cmd_eval(const PipelineConfig& cfg) {
  std::vector<fs::path> scans = sorted_files(cfg.scans_dir, ".bin");
  if (scans.empty()) throw DataError("eval: no scans in " + cfg.scans_dir.string());
  fs::create_directories(cfg.out_dir);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  ManifestGuard guard(manifest, cfg.out_dir / "eval_manifest.json");
  StageTimer timer(manifest, "eval");

  if (!cfg.gt_dir) {
    manifest.warnings.push_back("no ground truth: pointwise metrics skipped");
    manifest.completed = true;
    return;
  }

  // Pointwise metrics, pooled over frames; one PR curve per class.
  const char* class_names[3] = {"non_movable", "movable", "dynamic"};
  std::vector<double> conf[3];
  std::vector<uint8_t> pos[3];
  std::vector<Box3D> pred_boxes, gt_boxes;
  std::vector<PointClass> all_pred;
  GroundTruth all_gt;

  for (std::size_t t = 0; t < scans.size(); ++t) {
    PointCloud cloud = read_velodyne_bin(scans[t]);
    GroundTruth gt = read_ground_truth(*cfg.gt_dir / frame_name(int(t), ".gt.csv"),
                                       *cfg.gt_dir / frame_name(int(t), ".boxes.csv"));
    std::vector<LabelRecord> pred =
        read_labels(cfg.out_dir / frame_name(int(t), ".labels.csv"));
    if (pred.size() != cloud.size() || gt.labels.size() != cloud.size()) {
      throw DataError("eval: prediction/gt/scan size mismatch at frame " +
                      std::to_string(t));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        conf[c].push_back(pred[i].belief[c]);
        pos[c].push_back(gt.labels[i] == PointClass(c) ? 1 : 0);
      }
      all_pred.push_back(pred[i].label);
    }
    int id_offset = int(all_gt.boxes.size());
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      all_gt.labels.push_back(gt.labels[i]);
      all_gt.box_ids.push_back(gt.box_ids[i] < 0 ? -1 : gt.box_ids[i] + id_offset);
    }
    for (GroundTruthBox b : gt.boxes) {
      b.id += id_offset;
      all_gt.boxes.push_back(b);
      Box3D gb;
      gb.cx = b.cx; gb.cy = b.cy; gb.cz = b.cz;
      gb.sx = b.sx; gb.sy = b.sy; gb.sz = b.sz;
      gb.yaw = b.yaw;
      gb.difficulty = b.difficulty;
      gt_boxes.push_back(gb);
    }

    // Object-wise: cluster points predicted as objects, score by the
    // movable+dynamic belief.
    std::vector<uint8_t> mask(cloud.size(), 0);
    std::vector<double> obj_conf(cloud.size(), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      mask[i] = pred[i].label != PointClass::NonMovable ? 1 : 0;
      obj_conf[i] = pred[i].belief[1] + pred[i].belief[2];
    }
    for (const Cluster& c : cluster_points(cloud, mask, obj_conf, cfg.cluster)) {
      pred_boxes.push_back(fit_box(c, cloud));
    }
  }

  std::vector<NamedCurve> curves;
  std::ofstream metrics(cfg.out_dir / "metrics.csv");
  metrics << "metric,value\n";
  metrics.precision(6);
  metrics << std::fixed;
  for (int c = 0; c < 3; ++c) {
    try {
      PRCurve curve = pr_curve(conf[c], pos[c]);
      metrics << "max_f1_" << class_names[c] << ',' << curve.max_f1 << '\n';
      metrics << "precision_" << class_names[c] << ',' << curve.max_f1_precision << '\n';
      metrics << "recall_" << class_names[c] << ',' << curve.max_f1_recall << '\n';
      manifest.metrics[std::string("max_f1_") + class_names[c]] = curve.max_f1;
      curves.push_back({class_names[c], std::move(curve)});
    } catch (const DataError&) {
      manifest.warnings.push_back(std::string("no ground-truth positives for class ") +
                                  class_names[c]);
    }
  }

  const char* diff_names[3] = {"easy", "moderate", "hard"};
  for (int d = 0; d < 3; ++d) {
    auto ap = average_precision(pred_boxes, gt_boxes, 0.5, Difficulty(d), cfg.ap_interp);
    if (ap) {
      metrics << "ap3d_" << diff_names[d] << ',' << *ap << '\n';
      manifest.metrics[std::string("ap3d_") + diff_names[d]] = *ap;
    }
  }
  auto ap_all = average_precision(pred_boxes, gt_boxes, 0.5, {}, cfg.ap_interp);
  if (ap_all) metrics << "ap3d_all," << *ap_all << '\n';

  for (int c = 1; c < 3; ++c) {
    auto r = pointwise_recall(all_pred, all_gt, PointClass(c), {});
    if (r) metrics << "pointwise_recall_" << class_names[c] << ',' << *r << '\n';
    for (int d = 0; d < 3; ++d) {
      r = pointwise_recall(all_pred, all_gt, PointClass(c), Difficulty(d));
      if (r) {
        metrics << "pointwise_recall_" << class_names[c] << '_' << diff_names[d] << ','
                << *r << '\n';
      }
    }
  }

  write_pr_csv(cfg.out_dir / "pr_curves.csv", curves);
  write_pr_svg(cfg.out_dir / "pr_curves.svg", curves, "Pointwise classification");

  // Experiment comparison across sibling mode directories, when present.
  std::vector<NamedCurve> mode_curves;
  for (const char* mode : {"exp1", "exp2", "exp3"}) {
    fs::path mode_dir = cfg.out_dir.parent_path() / mode;
    if (!fs::is_directory(mode_dir)) continue;
    std::vector<double> dconf;
    std::vector<uint8_t> dpos;
    bool ok = true;
    for (std::size_t t = 0; t < scans.size() && ok; ++t) {
      fs::path lp = mode_dir / frame_name(int(t), ".labels.csv");
      if (!fs::exists(lp)) {
        ok = false;
        break;
      }
      std::vector<LabelRecord> pred = read_labels(lp);
      GroundTruth gt = read_ground_truth(*cfg.gt_dir / frame_name(int(t), ".gt.csv"),
                                         *cfg.gt_dir / frame_name(int(t), ".boxes.csv"));
      for (std::size_t i = 0; i < pred.size(); ++i) {
        dconf.push_back(pred[i].belief[2]);
        dpos.push_back(gt.labels[i] == PointClass::Dynamic ? 1 : 0);
      }
    }
    if (!ok || dconf.empty()) continue;
    try {
      mode_curves.push_back({mode, pr_curve(dconf, dpos)});
    } catch (const DataError&) {
    }
  }
  if (!mode_curves.empty()) {
    std::ofstream cmp(cfg.out_dir / "experiment_comparison.csv");
    cmp << "mode,max_f1,precision,recall\n";
    cmp.precision(6);
    cmp << std::fixed;
    for (const NamedCurve& nc : mode_curves) {
      cmp << nc.name << ',' << nc.curve.max_f1 << ',' << nc.curve.max_f1_precision << ','
          << nc.curve.max_f1_recall << '\n';
    }
    write_pr_svg(cfg.out_dir / "experiment_comparison.svg", mode_curves,
                 "Dynamic classification by experiment");
  }
  manifest.completed = true;
}

}  // namespace lidarsem
