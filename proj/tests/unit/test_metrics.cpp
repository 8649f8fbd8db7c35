#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mapvio/error.hpp"
#include "mapvio/metrics.hpp"
#include "test_util.hpp"

using namespace mapvio;
using namespace mapvio::test;

namespace {

std::vector<TrajectoryEntry> random_traj(std::mt19937_64& rng, int n) {
  std::vector<TrajectoryEntry> t;
  for (int i = 0; i < n; ++i) {
    const Pose p = random_pose(rng, 3.0, 3.0);
    t.push_back({0.05 * i, p.rotation, p.translation});
  }
  return t;
}

// Applies x -> T x to every IMU pose.
std::vector<TrajectoryEntry> transformed(const std::vector<TrajectoryEntry>& in, const Pose& T) {
  auto out = in;
  for (auto& e : out) {
    e.p_I_in_G = T * e.p_I_in_G;
    e.R_GtoI = e.R_GtoI * T.rotation.transpose();
  }
  return out;
}

}  // namespace

TEST(Metrics, UmeyamaRecoversRigidTransform) {
  std::mt19937_64 rng(1);
  const Pose T = random_pose(rng);
  std::vector<Vec3> src, dst;
  for (int i = 0; i < 30; ++i) {
    src.push_back(random_vec3(rng, 5.0));
    dst.push_back(T * src.back());
  }
  const Pose est = umeyama_rigid(src, dst);
  EXPECT_LT((est.rotation - T.rotation).norm(), 1e-12);
  EXPECT_LT((est.translation - T.translation).norm(), 1e-12);
  EXPECT_NEAR(est.rotation.determinant(), 1.0, 1e-12);
  EXPECT_THROW(umeyama_rigid(std::span(src).first(1), std::span(dst).first(1)), InvalidArgument);
}

TEST(Metrics, UmeyamaNeverReflects) {
  // Planar mirrored points would be best fit by a reflection.
  std::vector<Vec3> src = {{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -2, 0}};
  std::vector<Vec3> dst;
  for (const auto& p : src) dst.push_back({-p.x(), p.y(), p.z()});
  EXPECT_NEAR(umeyama_rigid(src, dst).rotation.determinant(), 1.0, 1e-12);
}

TEST(Metrics, AteIdentityIsZero) {
  std::mt19937_64 rng(2);
  const auto t = random_traj(rng, 40);
  const AteResult r = compute_ate(t, t);
  EXPECT_EQ(r.matched, 40);
  EXPECT_LT(r.pos_m, 1e-12);
  EXPECT_LT(r.rot_deg, 1e-6);
}

TEST(Metrics, AteIsRigidInvariant) {
  std::mt19937_64 rng(3);
  const auto gt = random_traj(rng, 40);
  const Pose T = random_pose(rng);
  const AteResult r = compute_ate(transformed(gt, T), gt);
  EXPECT_LT(r.pos_m, 1e-10);
  EXPECT_LT(r.rot_deg, 1e-6);
  EXPECT_LT((r.alignment.matrix() - T.inverse().matrix()).norm(), 1e-10);
}

TEST(Metrics, AteOfIsotropicNoise) {
  std::mt19937_64 rng(4);
  auto gt = random_traj(rng, 20000);
  auto est = gt;
  std::normal_distribution<double> n(0.0, 0.01 / std::sqrt(3.0));
  for (auto& e : est) e.p_I_in_G += Vec3(n(rng), n(rng), n(rng));
  EXPECT_NEAR(compute_ate(est, gt).pos_m, 0.01, 0.001);
}

TEST(Metrics, AteRotationError) {
  std::mt19937_64 rng(5);
  const auto gt = random_traj(rng, 10);
  auto est = gt;
  const double ang = 2.0 * std::numbers::pi / 180.0;
  for (auto& e : est) e.R_GtoI = so3_exp(Vec3(0, 0, ang)) * e.R_GtoI;
  EXPECT_NEAR(compute_ate(est, gt).rot_deg, 2.0, 1e-9);
}

TEST(Metrics, AteNeedsTwoMatches) {
  std::mt19937_64 rng(6);
  auto gt = random_traj(rng, 5);
  auto est = gt;
  for (auto& e : est) e.t += 0.5;
  EXPECT_THROW(compute_ate(est, gt), InvalidArgument);
  EXPECT_THROW(compute_ate(std::vector(gt.begin(), gt.begin() + 1), gt), InvalidArgument);
}

TEST(Metrics, AteMatchesNearestStamp) {
  std::mt19937_64 rng(7);
  const auto gt = random_traj(rng, 30);
  auto est = gt;
  for (auto& e : est) e.t += 4e-4;
  EXPECT_EQ(compute_ate(est, gt).matched, 30);
}

TEST(Metrics, PoseDifferenceAndMedian) {
  const Pose a{so3_exp(Vec3(0, 0, std::numbers::pi / 18.0)), Vec3(0.03, 0.04, 0)};
  const InitEval e = pose_difference(a, Pose{});
  EXPECT_NEAR(e.rot_deg, 10.0, 1e-10);
  EXPECT_NEAR(e.pos_cm, 5.0, 1e-12);
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), InvalidArgument);
}
