#ifndef LIDARSEM_BAYES_FILTER_HPP
#define LIDARSEM_BAYES_FILTER_HPP

#include <array>
#include <optional>
#include <vector>

#include "lidarsem/core.hpp"
#include "lidarsem/se3.hpp"

namespace lidarsem {

enum class ObjectUpdateMode {
  Recursive,      // experiment 1: log-odds accumulation over frames
  Instantaneous,  // experiment 2: current objectness only
  Off             // experiment 3: motion cues only
};

struct FilterConfig {
  Mat6 sigma;       // motion covariance, translation m^2 then rotation rad^2
  double o0 = 0.2;  // prior object probability
  double s = 0.6;   // dynamic scaling of the movable prediction
  Eigen::Matrix3d transition;  // row-stochastic, rows indexed by previous state
  ObjectUpdateMode object_update = ObjectUpdateMode::Recursive;
  double match_radius = 0.3;  // cross-frame point association

  FilterConfig();
};

// Per-point state. probs is (non-movable, movable, dynamic) and sums to 1.
struct Belief {
  std::vector<std::array<double, 3>> probs;
  std::vector<double> logodds;  // L(o | xi_1:t)

  std::size_t size() const { return probs.size(); }
};

// New-point belief: 1-o0 on non-movable, o0 split over the object states.
Belief make_prior_belief(std::size_t n, const FilterConfig& cfg);

// delta = 1 - exp(-0.5 r^T Sigma^-1 r), r the log of odometry^-1 * tau.
// Zero iff the motion equals the odometry.
double dynamicity(const SE3& tau, const Pose& odometry, const Mat6& sigma);

// (1-delta, 1-delta, delta): the motion term cannot tell the two static
// states apart; the object term does.
std::array<double, 3> motion_likelihood(double delta);

// L_new = logit(xi) + L_prev - logit(o0); xi clamped to [1e-6, 1-1e-6].
double logodds_update(double L_prev, double xi, double o0);

// p = sigmoid(L): non-movable -> 1-p, movable -> p, dynamic -> s*p.
double object_likelihood(PointClass state, double L, double s);

// One filter step over aligned per-point arrays. delta may be absent
// (frame without a motion estimate): the motion term is then uniform.
// Per-point delta entries < 0 mean "no motion measurement for this point".
Belief step(const Belief& bel, const std::vector<double>* delta,
            const std::vector<double>& xi, const FilterConfig& cfg,
            std::vector<uint8_t>* degenerate_flags = nullptr);

PointClass classify(const std::array<double, 3>& probs);
std::vector<PointClass> classify(const Belief& bel);

}  // namespace lidarsem

#endif
