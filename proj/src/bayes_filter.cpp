#include "lidarsem/bayes_filter.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "lidarsem/kernels.hpp"

namespace lidarsem {

namespace {
constexpr double kXiClamp = 1e-6;

double logit(double p) { return std::log(p / (1.0 - p)); }
}  // namespace

FilterConfig::FilterConfig() {
  sigma = Mat6::Zero();
  sigma.diagonal().head<3>().setConstant(0.05 * 0.05);
  double r = M_PI / 180.0;
  sigma.diagonal().tail<3>().setConstant(r * r);
  // Strong self-transition; movable <-> dynamic exchange favored over
  // either of them turning non-movable.
  transition << 0.90, 0.05, 0.05,
                0.02, 0.90, 0.08,
                0.02, 0.08, 0.90;
}

Belief make_prior_belief(std::size_t n, const FilterConfig& cfg) {
  Belief b;
  b.probs.assign(n, {1.0 - cfg.o0, cfg.o0 * 0.5, cfg.o0 * 0.5});
  b.logodds.assign(n, logit(cfg.o0));
  return b;
}

double dynamicity(const SE3& tau, const Pose& odometry, const Mat6& sigma) {
  Eigen::LLT<Mat6> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("dynamicity: covariance not positive-definite");
  }
  Vec6 r = se3_log(odometry.inverse() * tau);
  double maha = r.dot(llt.solve(r));
  return 1.0 - std::exp(-0.5 * maha);
}

std::array<double, 3> motion_likelihood(double delta) {
  return {1.0 - delta, 1.0 - delta, delta};
}

double logodds_update(double L_prev, double xi, double o0) {
  xi = std::clamp(xi, kXiClamp, 1.0 - kXiClamp);
  return logit(xi) + L_prev - logit(o0);
}

double object_likelihood(PointClass state, double L, double s) {
  double p = 1.0 / (1.0 + std::exp(-L));
  switch (state) {
    case PointClass::NonMovable: return 1.0 - p;
    case PointClass::Movable: return p;
    case PointClass::Dynamic: return s * p;
  }
  return 0.0;
}

Belief step(const Belief& bel, const std::vector<double>* delta,
            const std::vector<double>& xi, const FilterConfig& cfg,
            std::vector<uint8_t>* degenerate_flags) {
  std::size_t n = bel.size();
  if (xi.size() != n || (delta && delta->size() != n)) {
    throw DataError("bayes step: misaligned per-point arrays");
  }
  Belief out;
  out.probs.resize(n);
  out.logodds = bel.logodds;
  if (degenerate_flags) degenerate_flags->assign(n, 0);

  switch (cfg.object_update) {
    case ObjectUpdateMode::Recursive:
      kernels::logodds_accumulate(out.logodds.data(), xi.data(), logit(cfg.o0), n);
      break;
    case ObjectUpdateMode::Instantaneous:
      for (std::size_t i = 0; i < n; ++i) {
        out.logodds[i] = logit(std::clamp(xi[i], kXiClamp, 1.0 - kXiClamp));
      }
      break;
    case ObjectUpdateMode::Off:
      break;  // object variable stays at its prior
  }

  std::vector<double> p_obj(n);
  kernels::sigmoid(out.logodds.data(), p_obj.data(), n);

  const Eigen::Matrix3d At = cfg.transition.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d prev(bel.probs[i][0], bel.probs[i][1], bel.probs[i][2]);
    Eigen::Vector3d predicted = At * prev;

    double d = delta ? (*delta)[i] : -1.0;
    std::array<double, 3> motion = d >= 0.0 ? motion_likelihood(d)
                                            : std::array<double, 3>{1.0, 1.0, 1.0};
    std::array<double, 3> object = {1.0, 1.0, 1.0};
    if (cfg.object_update != ObjectUpdateMode::Off) {
      double p = p_obj[i];
      object = {1.0 - p, p, cfg.s * p};
    }

    std::array<double, 3> u;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
      u[c] = motion[c] * object[c] * predicted[c];
      total += u[c];
    }
    if (total <= 0.0) {
      for (int c = 0; c < 3; ++c) out.probs[i][c] = predicted[c];
      if (degenerate_flags) (*degenerate_flags)[i] = 1;
      continue;
    }
    for (int c = 0; c < 3; ++c) out.probs[i][c] = u[c] / total;
  }
  return out;
}

PointClass classify(const std::array<double, 3>& probs) {
  int best = 0;
  for (int c = 1; c < 3; ++c) {
    if (probs[c] > probs[best]) best = c;  // ties keep the earlier class
  }
  return static_cast<PointClass>(best);
}

std::vector<PointClass> classify(const Belief& bel) {
  std::vector<PointClass> out(bel.size());
  for (std::size_t i = 0; i < bel.size(); ++i) out[i] = classify(bel.probs[i]);
  return out;
}

}  // namespace lidarsem
