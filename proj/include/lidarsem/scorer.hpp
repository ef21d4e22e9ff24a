#ifndef LIDARSEM_SCORER_HPP
#define LIDARSEM_SCORER_HPP

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "lidarsem/core.hpp"
#include "lidarsem/projection.hpp"

namespace lidarsem {

// Per-pixel feature layout: own 3 channels, the 3 channels of each
// 4-neighbor (center-substituted when the neighbor is invalid), and the 4
// neighbor range differences. Azimuth wraps, elevation clamps.
constexpr int kScorerFeatureDim = 19;

struct TrainingSample {
  int height = 0;
  int width = 0;
  std::vector<double> features;  // pixel-major, kScorerFeatureDim each
  std::vector<uint8_t> labels;   // 1 = movable
  std::vector<uint8_t> valid;
};

TrainingSample make_training_sample(const RangeImage& img,
                                    const std::vector<uint8_t>& movable_per_pixel);

struct ScorerConfig {
  double learning_rate = 1e-6;
  double momentum = 0.99;
  int epochs = 10;
  bool class_balance = true;
  uint64_t seed = 0;
};

// Linear per-pixel classifier, one weight vector per class plus bias.
struct ScorerModel {
  int feature_dim = kScorerFeatureDim;
  std::vector<double> w0;  // feature_dim + 1, bias last
  std::vector<double> w1;
  std::vector<double> feat_mean;
  std::vector<double> feat_std;
  double final_loss = 0.0;
};

struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> a0;
  std::vector<double> a1;
  std::vector<double> xi;  // movable posterior, (0,1) on valid pixels
  std::vector<uint8_t> valid;
};

// Overflow-safe two-class softmax for the movable logit.
double softmax_objectness(double a0, double a1);

// -sum_c w_c p_c log(max(q_c, 1e-12)). With unit weights this is the plain
// cross-entropy loss.
double weighted_cross_entropy(std::span<const double> truth,
                              std::span<const double> predicted,
                              std::span<const double> weights);

// Median-frequency balancing; for two classes the median is the mean of
// the two frequencies.
std::array<double, 2> class_balance_weights(const std::array<std::size_t, 2>& counts);

// Total weighted loss of one sample at the model's current weights
// (features standardized with the model's stats). grad0/grad1, when
// non-null, receive the analytic gradient.
double sample_loss_and_grad(const ScorerModel& model, const TrainingSample& sample,
                            const std::array<double, 2>& class_weights,
                            std::vector<double>* grad0, std::vector<double>* grad1);

// SGD with momentum, mini-batch = one image.
ScorerModel train(const std::vector<TrainingSample>& samples, const ScorerConfig& cfg);

ScoreMap predict(const ScorerModel& model, const RangeImage& img);

// Score file: 8-byte magic "OBJSCORE", then height x width float32 xi,
// row-major little-endian. Dimensions come from the caller.
void save_scores(const std::filesystem::path& path, const ScoreMap& scores);
ScoreMap load_scores(const std::filesystem::path& path, int height, int width);

// Checkpoint: magic "PXSCORER", version, feature dim, weights, stats.
void save_model(const std::filesystem::path& path, const ScorerModel& model);
ScorerModel load_model(const std::filesystem::path& path);

}  // namespace lidarsem

#endif
