#ifndef LIDARSEM_PIPELINE_HPP
#define LIDARSEM_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidarsem/bayes_filter.hpp"
#include "lidarsem/cluster_eval.hpp"
#include "lidarsem/config.hpp"
#include "lidarsem/projection.hpp"
#include "lidarsem/rigid_flow.hpp"
#include "lidarsem/scorer.hpp"

namespace lidarsem {

struct PipelineConfig {
  std::filesystem::path scans_dir;
  std::filesystem::path poses_path;
  std::optional<std::filesystem::path> gt_dir;
  std::optional<std::filesystem::path> scores_dir;  // external network outputs
  std::optional<std::filesystem::path> model_path;  // built-in scorer checkpoint
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> scene_path;  // synth input

  uint64_t seed = 0;
  std::string mode = "exp1";  // exp1 | exp2 | exp3

  ProjectionConfig projection;
  ScorerConfig scorer;
  FlowConfig flow;
  FilterConfig filter;
  ClusterConfig cluster;
  ApInterpolation ap_interp = ApInterpolation::ElevenPoint;

  uint64_t config_hash = 0;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct RunManifest {
  uint64_t config_hash = 0;
  std::map<std::string, double> stage_seconds;
  std::vector<std::size_t> frame_point_counts;
  std::vector<std::string> warnings;
  std::map<std::string, double> metrics;
  std::string scorer_source;  // model | scores | none
  bool completed = false;

  void write(const std::filesystem::path& path) const;
};

// Subcommands. Each writes run_manifest.json under its output directory,
// also on partial failure.
void cmd_synth(const PipelineConfig& cfg);
void cmd_project(const PipelineConfig& cfg);
void cmd_train(const PipelineConfig& cfg);
void cmd_classify(const PipelineConfig& cfg);
void cmd_eval(const PipelineConfig& cfg);

// exp1/exp2/exp3 -> filter object-update mode
ObjectUpdateMode mode_from_string(const std::string& mode);

}  // namespace lidarsem

#endif
