// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

using namespace dcpgpr;
using namespace dcpgpr::dcpd;

namespace {

Bscan hv(const Eigen::MatrixXd& m, Frame f) { return testutil::make_scan(m, Channel::HV, f); }

sim::SceneConfig noisy_scene(double theta, std::uint64_t seed) {
  sim::SceneConfig cfg;
  cfg.target.theta = theta;
  cfg.clutter.coupling_amplitude = 5;
  cfg.clutter.surface_amplitude = 3;
  cfg.clutter.roughness_std = 0.1;
  cfg.clutter.noise_std = 0.05;
  cfg.clutter.seed = seed;
  return cfg;
}

}  // namespace

TEST(Ccp, Examples) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 3, -7, 0, 1e-300;
  b << 4, 0, -2, 0;
  const auto c = ccp(hv(a, Frame::I), hv(b, Frame::II));
  EXPECT_EQ(c.data()(0, 0), 5.0);
  EXPECT_EQ(c.data()(0, 1), 7.0);
  EXPECT_EQ(c.data()(1, 0), 2.0);
  EXPECT_EQ(c.data()(1, 1), 1e-300);
  EXPECT_EQ(c.channel(), Channel::CCP);
}

TEST(Ccp, Alignment) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(ccp(hv(m, Frame::II), hv(m, Frame::I)), AlignmentError);
  EXPECT_THROW(ccp(hv(m, Frame::I), hv(Eigen::MatrixXd::Ones(3, 4), Frame::II)), AlignmentError);
  EXPECT_THROW(ccp(testutil::make_scan(m, Channel::HH, Frame::I), hv(m, Frame::II)), AlignmentError);
}

TEST(CcpProperty, SymmetricHomogeneousAndDegenerate) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> cdist(0.01, 100);
  for (int k = 0; k < 100; ++k) {
    const auto a = testutil::random_matrix(rng, 7, 5);
    const auto b = testutil::random_matrix(rng, 7, 5);
    const auto ab = ccp(hv(a, Frame::I), hv(b, Frame::II)).data();
    EXPECT_EQ(ab, ccp(hv(b, Frame::I), hv(a, Frame::II)).data());
    EXPECT_EQ(ccp(hv(a, Frame::I), hv(Eigen::MatrixXd::Zero(7, 5), Frame::II)).data(), a.cwiseAbs());
    const double c = cdist(rng);
    const auto scaled = ccp(hv(c * a, Frame::I), hv(c * b, Frame::II)).data();
    EXPECT_LE((scaled - c * ab).cwiseAbs().maxCoeff(), 4e-16 * c * ab.maxCoeff());
    EXPECT_EQ(ccp(hv(4 * a, Frame::I), hv(4 * b, Frame::II)).data(), 4 * ab);
  }
}

TEST(Ccp, RotationInvariantPeakOnIdealModel) {
  double lo = INFINITY, hi = 0;
  for (double th = 0; th < 180; th += 10) {
    auto cfg = testutil::ideal_scene(th);
    cfg.propagation.time_zero_ns = cfg.grid.time_at(150) - sim::travel_time(cfg.target.x0, cfg.target, cfg.grid);
    const auto scene = sim::synthesize_scene(cfg);
    const double peak = ccp(scene.frame1.hv(), scene.frame2.hv()).data().maxCoeff();
    EXPECT_NEAR(peak, 0.5, 1e-12) << th;
    lo = std::min(lo, peak);
    hi = std::max(hi, peak);
  }
  EXPECT_LE((hi - lo) / lo, 1e-9);
}

TEST(ShiftTraces, MovesAndZeroFills) {
  Eigen::MatrixXd m(2, 4);
  m << 1, 2, 3, 4, 5, 6, 7, 8;
  const auto r = shift_traces(hv(m, Frame::II), 1).data();
  Eigen::MatrixXd e(2, 4);
  e << 0, 1, 2, 3, 0, 5, 6, 7;
  EXPECT_EQ(r, e);
  const auto l = shift_traces(hv(m, Frame::II), -3).data();
  EXPECT_EQ(l.col(0), m.col(3));
  EXPECT_EQ(l.rightCols(3).cwiseAbs().sum(), 0.0);
}

TEST(Detect, SingleSpike) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(20, 30);
  m(7, 13) = 2.5;
  const auto d = detect(testutil::make_scan(m, Channel::CCP));
  ASSERT_TRUE(d.detected);
  EXPECT_EQ(*d.trace_index, 13u);
  EXPECT_EQ(*d.sample_index, 7u);
  EXPECT_EQ(d.ccp_peak, 2.5);
  EXPECT_EQ(d.noise_floor, 0.0);
}

TEST(Detect, AllZeroIsNotDetected) {
  const auto d = detect(testutil::make_scan(Eigen::MatrixXd::Zero(5, 5), Channel::CCP));
  EXPECT_FALSE(d.detected);
  EXPECT_FALSE(d.trace_index.has_value());
}

TEST(Detect, FlatSceneIsNotDetected) {
  const auto d = detect(testutil::make_scan(Eigen::MatrixXd::Ones(5, 12), Channel::CCP));
  EXPECT_FALSE(d.detected);
}

TEST(Detect, TiesGoToFirstTraceThenSample) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(10, 10);
  m(6, 4) = 1;
  m(2, 4) = 1;
  m(1, 8) = 1;
  const auto d = detect(testutil::make_scan(m, Channel::CCP));
  EXPECT_EQ(*d.trace_index, 4u);
  EXPECT_EQ(*d.sample_index, 2u);
}

TEST(Detect, Validation) {
  const auto b = testutil::make_scan(Eigen::MatrixXd::Ones(3, 3), Channel::CCP);
  EXPECT_THROW(detect(b, 0.0), DomainError);
  EXPECT_THROW(detect(b, 1.0), DomainError);
  EXPECT_THROW(detect(testutil::make_scan(-Eigen::MatrixXd::Ones(3, 3), Channel::CCP)), DomainError);
}

TEST(NoiseFloor, DropsTopDecileThenMedian) {
  // Per-trace maxima 1..10: drop the top one, median of 1..9 is 5.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 10);
  for (int j = 0; j < 10; ++j) m(1, j) = j + 1;
  EXPECT_EQ(noise_floor(m), 5.0);
  // 11 traces drop two, median of 1..9 again.
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(2, 11);
  for (int j = 0; j < 11; ++j) n(0, j) = j + 1;
  EXPECT_EQ(noise_floor(n), 5.0);
}

TEST(DetectProperty, ArgmaxScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> cdist(1e-3, 1e3);
  for (int k = 0; k < 100; ++k) {
    const auto a = testutil::random_matrix(rng, 9, 11);
    const auto b = testutil::random_matrix(rng, 9, 11);
    const double c = cdist(rng);
    const auto d1 = detect(ccp(hv(a, Frame::I), hv(b, Frame::II)));
    const auto d2 = detect(ccp(hv(c * a, Frame::I), hv(c * b, Frame::II)));
    EXPECT_EQ(d1.detected, d2.detected);
    EXPECT_EQ(d1.trace_index, d2.trace_index);
    EXPECT_EQ(d1.sample_index, d2.sample_index);
  }
}

TEST(Detect, FindsEveryOrientationAtTheApex) {
  for (double th = 0; th < 180; th += 10) {
    const auto scene = sim::synthesize_scene(testutil::ideal_scene(th));
    const auto d = detect(ccp(scene.frame1.hv(), scene.frame2.hv()));
    ASSERT_TRUE(d.detected) << th;
    EXPECT_LE(std::abs(static_cast<long>(*d.trace_index) - static_cast<long>(scene.truth.apex_trace)), 1) << th;
  }
}

TEST(Detect, FindsEveryOrientationInClutterAfterMeanSubtraction) {
  for (double th = 0; th < 180; th += 10)
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto scene = sim::synthesize_scene(noisy_scene(th, seed));
      const auto s1 = preprocess::mean_subtract(scene.frame1.hv());
      const auto s2 = preprocess::mean_subtract(scene.frame2.hv());
      const auto d = detect(ccp(s1, s2));
      ASSERT_TRUE(d.detected) << th;
      EXPECT_LE(std::abs(static_cast<long>(*d.trace_index) - static_cast<long>(scene.truth.apex_trace)), 1)
          << th << " seed " << seed;
    }
}
