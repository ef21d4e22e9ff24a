#include "lidarsem/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "lidarsem/kernels.hpp"

namespace lidarsem {

namespace {

constexpr double kLogClamp = 1e-12;
constexpr double kXiClamp = 1e-6;

inline int wrap(int c, int w) { return ((c % w) + w) % w; }

}  // namespace

TrainingSample make_training_sample(const RangeImage& img,
                                    const std::vector<uint8_t>& movable_per_pixel) {
  if (movable_per_pixel.size() != img.pixel_count()) {
    throw DataError("training labels do not match image dimensions");
  }
  TrainingSample s;
  s.height = img.height;
  s.width = img.width;
  s.valid = img.valid;
  s.labels = movable_per_pixel;
  s.features.assign(img.pixel_count() * kScorerFeatureDim, 0.0);

  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::size_t pix = img.idx(r, c);
      if (!img.valid[pix]) continue;
      double* f = &s.features[pix * kScorerFeatureDim];
      f[0] = img.range[pix];
      f[1] = img.intensity[pix];
      f[2] = img.z[pix];
      for (int n = 0; n < 4; ++n) {
        int rr = std::clamp(r + dr[n], 0, img.height - 1);
        int cc = wrap(c + dc[n], img.width);
        std::size_t np = img.idx(rr, cc);
        if (!img.valid[np]) np = pix;  // substitute the center
        f[3 + n * 3 + 0] = img.range[np];
        f[3 + n * 3 + 1] = img.intensity[np];
        f[3 + n * 3 + 2] = img.z[np];
        f[15 + n] = img.range[np] - img.range[pix];
      }
    }
  }
  return s;
}

double softmax_objectness(double a0, double a1) {
  if (!std::isfinite(a0) || !std::isfinite(a1)) {
    throw NumericalError("softmax_objectness: non-finite logit");
  }
  double xi;
  kernels::softmax2(&a0, &a1, &xi, 1);
  return xi;
}

double weighted_cross_entropy(std::span<const double> truth,
                              std::span<const double> predicted,
                              std::span<const double> weights) {
  if (truth.size() != predicted.size() || truth.size() != weights.size()) {
    throw DataError("weighted_cross_entropy: size mismatch");
  }
  double qsum = 0.0;
  for (double q : predicted) qsum += q;
  if (std::abs(qsum - 1.0) > 1e-9) {
    throw DataError("weighted_cross_entropy: q does not sum to 1");
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    if (weights[c] < 0) throw DataError("weighted_cross_entropy: negative weight");
    loss -= weights[c] * truth[c] * std::log(std::max(predicted[c], kLogClamp));
  }
  return loss;
}

std::array<double, 2> class_balance_weights(const std::array<std::size_t, 2>& counts) {
  if (counts[0] == 0 || counts[1] == 0) {
    throw DataError("class_balance_weights: zero-count class");
  }
  double total = double(counts[0] + counts[1]);
  double f0 = counts[0] / total;
  double f1 = counts[1] / total;
  double median = 0.5 * (f0 + f1);  // median of two values
  return {median / f0, median / f1};
}

namespace {

// Logits for one pixel from standardized features; bias is the last weight.
inline void pixel_logits(const ScorerModel& m, const double* feat, double* std_feat,
                         double& a0, double& a1) {
  for (int j = 0; j < m.feature_dim; ++j) {
    std_feat[j] = (feat[j] - m.feat_mean[j]) / m.feat_std[j];
  }
  std_feat[m.feature_dim] = 1.0;
  a0 = kernels::dot(m.w0.data(), std_feat, m.feature_dim + 1);
  a1 = kernels::dot(m.w1.data(), std_feat, m.feature_dim + 1);
}

}  // namespace

double sample_loss_and_grad(const ScorerModel& model, const TrainingSample& sample,
                            const std::array<double, 2>& class_weights,
                            std::vector<double>* grad0, std::vector<double>* grad1) {
  const int wdim = model.feature_dim + 1;
  if (grad0) grad0->assign(wdim, 0.0);
  if (grad1) grad1->assign(wdim, 0.0);
  std::vector<double> sf(wdim);
  double loss = 0.0;
  std::size_t n_pix = sample.valid.size();
  for (std::size_t pix = 0; pix < n_pix; ++pix) {
    if (!sample.valid[pix]) continue;
    double a0, a1;
    pixel_logits(model, &sample.features[pix * model.feature_dim], sf.data(), a0, a1);
    double q1 = softmax_objectness(a0, a1);
    double q0 = 1.0 - q1;
    int y = sample.labels[pix] ? 1 : 0;
    double w = class_weights[y];
    loss -= w * std::log(std::max(y ? q1 : q0, kLogClamp));
    if (grad0) {
      // d/da_c of -w log q_y  =  w (q_c - [c == y])
      double g0 = w * (q0 - (y == 0 ? 1.0 : 0.0));
      double g1 = w * (q1 - (y == 1 ? 1.0 : 0.0));
      kernels::axpy(g0, sf.data(), grad0->data(), wdim);
      kernels::axpy(g1, sf.data(), grad1->data(), wdim);
    }
  }
  return loss;
}

ScorerModel train(const std::vector<TrainingSample>& samples, const ScorerConfig& cfg) {
  if (samples.empty()) throw DataError("train: no samples");

  std::array<std::size_t, 2> counts = {0, 0};
  for (const TrainingSample& s : samples) {
    for (std::size_t pix = 0; pix < s.valid.size(); ++pix) {
      if (s.valid[pix]) ++counts[s.labels[pix] ? 1 : 0];
    }
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw DataError("train: training set contains a single class");
  }
  std::array<double, 2> cw = cfg.class_balance ? class_balance_weights(counts)
                                               : std::array<double, 2>{1.0, 1.0};

  ScorerModel model;
  model.feature_dim = kScorerFeatureDim;
  const int wdim = model.feature_dim + 1;
  model.w0.assign(wdim, 0.0);
  model.w1.assign(wdim, 0.0);

  // Per-feature standardization over valid training pixels.
  model.feat_mean.assign(model.feature_dim, 0.0);
  model.feat_std.assign(model.feature_dim, 1.0);
  std::size_t n_valid = counts[0] + counts[1];
  std::vector<double> sum(model.feature_dim, 0.0), sq(model.feature_dim, 0.0);
  for (const TrainingSample& s : samples) {
    for (std::size_t pix = 0; pix < s.valid.size(); ++pix) {
      if (!s.valid[pix]) continue;
      const double* f = &s.features[pix * model.feature_dim];
      for (int j = 0; j < model.feature_dim; ++j) {
        sum[j] += f[j];
        sq[j] += f[j] * f[j];
      }
    }
  }
  for (int j = 0; j < model.feature_dim; ++j) {
    model.feat_mean[j] = sum[j] / double(n_valid);
    double var = sq[j] / double(n_valid) - model.feat_mean[j] * model.feat_mean[j];
    model.feat_std[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }

  std::vector<double> v0(wdim, 0.0), v1(wdim, 0.0);
  std::vector<double> g0, g1;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  double loss_total = 0.0;
  for (const TrainingSample& s : samples) {
    loss_total += sample_loss_and_grad(model, s, cw, nullptr, nullptr);
  }
  model.final_loss = loss_total;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t si : order) {
      sample_loss_and_grad(model, samples[si], cw, &g0, &g1);
      for (int j = 0; j < wdim; ++j) {
        v0[j] = cfg.momentum * v0[j] - cfg.learning_rate * g0[j];
        v1[j] = cfg.momentum * v1[j] - cfg.learning_rate * g1[j];
        model.w0[j] += v0[j];
        model.w1[j] += v1[j];
      }
    }
    loss_total = 0.0;
    for (const TrainingSample& s : samples) {
      loss_total += sample_loss_and_grad(model, s, cw, nullptr, nullptr);
    }
    model.final_loss = loss_total;
  }
  return model;
}

ScoreMap predict(const ScorerModel& model, const RangeImage& img) {
  TrainingSample features =
      make_training_sample(img, std::vector<uint8_t>(img.pixel_count(), 0));
  ScoreMap out;
  out.height = img.height;
  out.width = img.width;
  std::size_t n = img.pixel_count();
  out.a0.assign(n, 0.0);
  out.a1.assign(n, 0.0);
  out.xi.assign(n, 0.0);
  out.valid = img.valid;

  std::vector<double> sf(model.feature_dim + 1);
  for (std::size_t pix = 0; pix < n; ++pix) {
    if (!out.valid[pix]) continue;
    pixel_logits(model, &features.features[pix * model.feature_dim], sf.data(),
                 out.a0[pix], out.a1[pix]);
  }
  kernels::softmax2(out.a0.data(), out.a1.data(), out.xi.data(), n);
  for (std::size_t pix = 0; pix < n; ++pix) {
    if (!out.valid[pix]) out.xi[pix] = 0.0;
  }
  return out;
}

namespace {
constexpr char kScoreMagic[8] = {'O', 'B', 'J', 'S', 'C', 'O', 'R', 'E'};
constexpr char kModelMagic[8] = {'P', 'X', 'S', 'C', 'O', 'R', 'E', 'R'};
}  // namespace

void save_scores(const std::filesystem::path& path, const ScoreMap& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score file: " + path.string());
  out.write(kScoreMagic, 8);
  std::vector<float> buf(scores.xi.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<float>(scores.valid[i] ? scores.xi[i] : 0.5);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size() * sizeof(float)));
}

ScoreMap load_scores(const std::filesystem::path& path, int height, int width) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open score file: " + path.string());
  std::streamoff size = in.tellg();
  std::size_t n = std::size_t(height) * width;
  if (size != std::streamoff(8 + n * sizeof(float))) {
    throw DataError("score file size mismatch: " + path.string());
  }
  in.seekg(0);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kScoreMagic, 8) != 0) {
    throw DataError("bad score file magic: " + path.string());
  }
  std::vector<float> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * sizeof(float)));

  ScoreMap scores;
  scores.height = height;
  scores.width = width;
  scores.a0.assign(n, 0.0);
  scores.a1.assign(n, 0.0);
  scores.xi.assign(n, 0.0);
  scores.valid.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double xi = buf[i];
    if (!(xi >= 0.0 && xi <= 1.0)) {
      throw DataError("score outside [0,1] in " + path.string());
    }
    xi = std::clamp(xi, kXiClamp, 1.0 - kXiClamp);
    scores.xi[i] = xi;
    scores.a1[i] = std::log(xi / (1.0 - xi));  // logits (0, logit(xi))
  }
  return scores;
}

void save_model(const std::filesystem::path& path, const ScorerModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model: " + path.string());
  out.write(kModelMagic, 8);
  uint32_t version = 1, dim = uint32_t(model.feature_dim);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  auto write_vec = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              std::streamsize(v.size() * sizeof(double)));
  };
  write_vec(model.w0);
  write_vec(model.w1);
  write_vec(model.feat_mean);
  write_vec(model.feat_std);
  out.write(reinterpret_cast<const char*>(&model.final_loss), sizeof(double));
}

ScorerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kModelMagic, 8) != 0) {
    throw DataError("bad model magic: " + path.string());
  }
  uint32_t version = 0, dim = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&dim), 4);
  if (version != 1) throw DataError("unsupported model version");
  ScorerModel model;
  model.feature_dim = int(dim);
  auto read_vec = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  };
  read_vec(model.w0, dim + 1);
  read_vec(model.w1, dim + 1);
  read_vec(model.feat_mean, dim);
  read_vec(model.feat_std, dim);
  in.read(reinterpret_cast<char*>(&model.final_loss), sizeof(double));
  if (!in) throw DataError("truncated model: " + path.string());
  return model;
}

}  // namespace lidarsem
