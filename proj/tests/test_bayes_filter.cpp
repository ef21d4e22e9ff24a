#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "lidarsem/bayes_filter.hpp"

using namespace lidarsem;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// Independent forward-pass oracle, written directly from the update rule
// without any shared code paths (no kernels, no Eigen matrix products).
struct Oracle {
  std::array<double, 3> b;
  double L;

  void advance(double delta, double xi, const FilterConfig& cfg) {
    // Predict through the transposed transition matrix.
    std::array<double, 3> pred = {0, 0, 0};
    for (int to = 0; to < 3; ++to) {
      for (int from = 0; from < 3; ++from) {
        pred[to] += cfg.transition(from, to) * b[from];
      }
    }
    // Object evidence.
    if (cfg.object_update == ObjectUpdateMode::Recursive) {
      double c = std::clamp(xi, 1e-6, 1.0 - 1e-6);
      L = logit(c) + L - logit(cfg.o0);
    } else if (cfg.object_update == ObjectUpdateMode::Instantaneous) {
      L = logit(std::clamp(xi, 1e-6, 1.0 - 1e-6));
    }
    double p = 1.0 / (1.0 + std::exp(-L));

    std::array<double, 3> like;
    for (int c = 0; c < 3; ++c) {
      double motion = delta >= 0.0 ? (c == 2 ? delta : 1.0 - delta) : 1.0;
      double object = 1.0;
      if (cfg.object_update != ObjectUpdateMode::Off) {
        object = c == 0 ? 1.0 - p : (c == 1 ? p : cfg.s * p);
      }
      like[c] = motion * object;
    }
    double total = 0.0;
    for (int c = 0; c < 3; ++c) total += like[c] * pred[c];
    for (int c = 0; c < 3; ++c) b[c] = like[c] * pred[c] / total;
  }
};

}  // namespace

TEST_CASE("filter defaults: prior, scaling, stochastic transition") {
  FilterConfig cfg;
  CHECK(cfg.o0 == 0.2);
  CHECK(cfg.s == 0.6);
  CHECK(cfg.sigma(0, 0) == doctest::Approx(0.0025));
  CHECK(cfg.sigma(5, 5) == doctest::Approx(std::pow(M_PI / 180.0, 2)));
  for (int r = 0; r < 3; ++r) {
    CHECK(cfg.transition.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int c = 0; c < 3; ++c) CHECK(cfg.transition(r, c) > 0.0);
  }

  Belief prior = make_prior_belief(5, cfg);
  REQUIRE(prior.size() == 5);
  CHECK(prior.probs[0][0] == doctest::Approx(0.8));
  CHECK(prior.probs[0][1] == doctest::Approx(0.1));
  CHECK(prior.probs[0][2] == doctest::Approx(0.1));
  CHECK(prior.logodds[0] == doctest::Approx(logit(0.2)).epsilon(1e-14));
}

TEST_CASE("dynamicity against hand-computed Mahalanobis values") {
  FilterConfig cfg;
  Pose identity;

  // Exact agreement with odometry: zero dynamicity.
  CHECK(dynamicity(SE3(), identity, cfg.sigma) == doctest::Approx(0.0));

  // 0.1 m offset with sigma = 0.05^2: maha = 0.01/0.0025 = 4,
  // delta = 1 - e^-2 = 0.8646647167633873.
  SE3 shifted;
  shifted.t = Vec3(0.1, 0.0, 0.0);
  CHECK(dynamicity(shifted, identity, cfg.sigma) ==
        doctest::Approx(0.8646647167633873).epsilon(1e-12));

  // One degree of yaw with sigma = (1 deg)^2: maha = 1, delta = 1 - e^-0.5.
  SE3 rotated;
  rotated.R = so3_exp(Vec3(0.0, 0.0, M_PI / 180.0));
  CHECK(dynamicity(rotated, identity, cfg.sigma) ==
        doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-9));

  // Relative to a moving odometry: tau equal to odometry is still zero.
  Pose odo;
  odo.R = so3_exp(Vec3(0.01, -0.02, 0.3));
  odo.t = Vec3(1.0, 2.0, -0.5);
  CHECK(dynamicity(odo, odo, cfg.sigma) == doctest::Approx(0.0).epsilon(1e-12));

  Mat6 bad = Mat6::Zero();
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(dynamicity(shifted, identity, bad), NumericalError);
}

TEST_CASE("likelihood terms match their closed forms") {
  auto m = motion_likelihood(0.3);
  CHECK(m[0] == doctest::Approx(0.7));
  CHECK(m[1] == doctest::Approx(0.7));
  CHECK(m[2] == doctest::Approx(0.3));

  // L = 0 means p = 0.5: (0.5, 0.5, s/2).
  CHECK(object_likelihood(PointClass::NonMovable, 0.0, 0.6) == doctest::Approx(0.5));
  CHECK(object_likelihood(PointClass::Movable, 0.0, 0.6) == doctest::Approx(0.5));
  CHECK(object_likelihood(PointClass::Dynamic, 0.0, 0.6) == doctest::Approx(0.3));
}

TEST_CASE("log-odds update identities") {
  double L0 = logit(0.2);
  // Observing exactly the prior leaves the state unchanged.
  CHECK(logodds_update(L0, 0.2, 0.2) == doctest::Approx(L0).epsilon(1e-12));
  // Updates commute: order of evidence does not matter.
  double a = logodds_update(logodds_update(L0, 0.7, 0.2), 0.4, 0.2);
  double b = logodds_update(logodds_update(L0, 0.4, 0.2), 0.7, 0.2);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  // Extreme scores are clamped, never infinite.
  CHECK(std::isfinite(logodds_update(L0, 0.0, 0.2)));
  CHECK(std::isfinite(logodds_update(L0, 1.0, 0.2)));
  // Evidence above the prior raises the state, below lowers it.
  CHECK(logodds_update(L0, 0.9, 0.2) > L0);
  CHECK(logodds_update(L0, 0.05, 0.2) < L0);
}

TEST_CASE("filter step matches a brute-force forward pass oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.01, 0.99);

  for (ObjectUpdateMode mode : {ObjectUpdateMode::Recursive,
                                ObjectUpdateMode::Instantaneous,
                                ObjectUpdateMode::Off}) {
    FilterConfig cfg;
    cfg.object_update = mode;
    const std::size_t n = 37;
    Belief bel = make_prior_belief(n, cfg);
    std::vector<Oracle> oracle(n);
    for (std::size_t i = 0; i < n; ++i) {
      oracle[i].b = bel.probs[i];
      oracle[i].L = bel.logodds[i];
    }

    for (int frame = 0; frame < 6; ++frame) {
      std::vector<double> delta(n), xi(n);
      for (std::size_t i = 0; i < n; ++i) {
        delta[i] = i % 5 == 0 ? -1.0 : unit(rng);  // some points unmeasured
        xi[i] = unit(rng);
      }
      bel = step(bel, &delta, xi, cfg);
      for (std::size_t i = 0; i < n; ++i) {
        oracle[i].advance(delta[i], xi[i], cfg);
        CHECK(bel.logodds[i] == doctest::Approx(oracle[i].L).epsilon(1e-11));
        for (int c = 0; c < 3; ++c) {
          CHECK(bel.probs[i][c] == doctest::Approx(oracle[i].b[c]).epsilon(1e-10));
        }
        double sum = bel.probs[i][0] + bel.probs[i][1] + bel.probs[i][2];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("a missing motion field makes the motion term uniform") {
  FilterConfig cfg;
  Belief bel = make_prior_belief(3, cfg);
  std::vector<double> xi = {0.5, 0.5, 0.5};
  Belief no_motion = step(bel, nullptr, xi, cfg);
  std::vector<double> unmeasured = {-1.0, -1.0, -1.0};
  Belief flagged = step(bel, &unmeasured, xi, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) {
      CHECK(no_motion.probs[i][c] == doctest::Approx(flagged.probs[i][c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("zero support falls back to the prediction and sets the flag") {
  FilterConfig cfg;
  cfg.transition = Eigen::Matrix3d::Identity();  // keeps zero entries zero
  Belief bel;
  bel.probs = {{1.0, 0.0, 0.0}};
  bel.logodds = {logit(0.2)};
  std::vector<double> delta = {1.0};  // motion says "certainly dynamic"
  std::vector<double> xi = {0.2};
  std::vector<uint8_t> flags;
  Belief out = step(bel, &delta, xi, cfg, &flags);
  REQUIRE(flags.size() == 1);
  CHECK(flags[0] == 1);
  CHECK(out.probs[0][0] == doctest::Approx(1.0));
  CHECK(out.probs[0][2] == doctest::Approx(0.0));
}

TEST_CASE("misaligned arrays raise DataError") {
  FilterConfig cfg;
  Belief bel = make_prior_belief(4, cfg);
  std::vector<double> xi3(3, 0.5), xi4(4, 0.5), delta3(3, 0.1);
  CHECK_THROWS_AS(step(bel, nullptr, xi3, cfg), DataError);
  CHECK_THROWS_AS(step(bel, &delta3, xi4, cfg), DataError);
}

TEST_CASE("posterior responds monotonically to its inputs") {
  FilterConfig cfg;
  auto dyn_posterior = [&](double delta_v, double xi_v, double s) {
    FilterConfig c = cfg;
    c.s = s;
    Belief bel = make_prior_belief(1, c);
    std::vector<double> delta = {delta_v}, xi = {xi_v};
    return step(bel, &delta, xi, c).probs[0][2];
  };

  // Stronger motion evidence, more dynamic.
  CHECK(dyn_posterior(0.9, 0.5, 0.6) > dyn_posterior(0.5, 0.5, 0.6));
  CHECK(dyn_posterior(0.5, 0.5, 0.6) > dyn_posterior(0.1, 0.5, 0.6));
  // delta = 0 kills the dynamic state entirely.
  CHECK(dyn_posterior(0.0, 0.5, 0.6) == doctest::Approx(0.0));
  // Larger s raises the dynamic share.
  CHECK(dyn_posterior(0.7, 0.5, 0.9) > dyn_posterior(0.7, 0.5, 0.3));
}

TEST_CASE("recursive mode accumulates objectness evidence over frames") {
  FilterConfig rec;
  rec.object_update = ObjectUpdateMode::Recursive;
  FilterConfig inst;
  inst.object_update = ObjectUpdateMode::Instantaneous;

  Belief br = make_prior_belief(1, rec), bi = make_prior_belief(1, inst);
  std::vector<double> xi = {0.6};
  for (int t = 0; t < 8; ++t) {
    br = step(br, nullptr, xi, rec);
    bi = step(bi, nullptr, xi, inst);
  }
  // 0.6 > o0 every frame: recursion drives the log-odds far above the
  // one-shot value.
  CHECK(br.logodds[0] > bi.logodds[0] + 5.0);
  CHECK(bi.logodds[0] == doctest::Approx(logit(0.6)).epsilon(1e-12));
  CHECK(br.probs[0][1] > bi.probs[0][1]);
}

TEST_CASE("classification breaks ties toward the earlier class") {
  CHECK(classify({0.4, 0.4, 0.2}) == PointClass::NonMovable);
  CHECK(classify({0.3, 0.35, 0.35}) == PointClass::Movable);
  CHECK(classify({0.2, 0.3, 0.5}) == PointClass::Dynamic);
  Belief bel;
  bel.probs = {{0.6, 0.2, 0.2}, {0.1, 0.2, 0.7}};
  bel.logodds = {0.0, 0.0};
  std::vector<PointClass> cls = classify(bel);
  REQUIRE(cls.size() == 2);
  CHECK(cls[0] == PointClass::NonMovable);
  CHECK(cls[1] == PointClass::Dynamic);
}
