#include <gtest/gtest.h>

#include <random>

#include "mapvio/error.hpp"
#include "mapvio/filter_state.hpp"
#include "test_util.hpp"

using namespace mapvio;
using namespace mapvio::test;

namespace {

Covariance random_spd(int n, std::mt19937_64& rng) {
  Eigen::MatrixXd A(n, n);
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  return A * A.transpose() + Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(FilterState, LayoutOffsets) {
  FilterState fs;
  EXPECT_EQ(fs.dim(), 15);
  fs.clones.resize(2);
  fs.slam_features.resize(1);
  fs.calib_active = true;
  fs.td_active = true;
  EXPECT_EQ(fs.clone_offset(1), 21);
  EXPECT_EQ(fs.slam_offset(0), 27);
  EXPECT_EQ(fs.calib_offset(), 30);
  EXPECT_EQ(fs.td_offset(), 36);
  EXPECT_EQ(fs.dim(), 37);
}

TEST(FilterState, CloneCopiesPoseBlock) {
  std::mt19937_64 rng(31);
  FilterState fs;
  fs.imu.R_GtoI = random_pose(rng).rotation;
  Covariance P = random_spd(15, rng);
  const Covariance P0 = P;
  clone_state(fs, P, 1.0);
  ASSERT_EQ(P.rows(), 21);
  EXPECT_EQ(P.topLeftCorner(15, 15), P0);
  EXPECT_EQ(P.block(15, 15, 6, 6), P0.topLeftCorner(6, 6));
  EXPECT_EQ(P.block(0, 15, 15, 6), P0.leftCols(6));
  EXPECT_EQ(fs.clones.back().R_GtoI, fs.imu.R_GtoI);
  EXPECT_THROW(clone_state(fs, P, 1.0), InvalidArgument);
}

TEST(FilterState, CloneWindowLimit) {
  FilterState fs;
  fs.max_clones = 2;
  Covariance P = Covariance::Identity(15, 15);
  clone_state(fs, P, 0.1);
  clone_state(fs, P, 0.2);
  EXPECT_THROW(clone_state(fs, P, 0.3), InvalidArgument);
  marginalize(fs, P);
  EXPECT_EQ(fs.clones.size(), 1u);
  EXPECT_DOUBLE_EQ(fs.clones.front().t, 0.2);
  EXPECT_EQ(P.rows(), 21);
}

TEST(FilterState, MarginalizeRemovesOldestBlock) {
  std::mt19937_64 rng(32);
  FilterState fs;
  fs.clones = {{0.1}, {0.2}, {0.3}};
  Covariance P = random_spd(33, rng);
  const Covariance P0 = P;
  marginalize(fs, P);
  ASSERT_EQ(P.rows(), 27);
  EXPECT_EQ(P.topLeftCorner(15, 15), P0.topLeftCorner(15, 15));
  EXPECT_EQ(P.bottomRightCorner(12, 12), P0.bottomRightCorner(12, 12));
  EXPECT_EQ(P.block(0, 15, 15, 12), P0.block(0, 21, 15, 12));
  FilterState empty;
  Covariance Pe = Covariance::Identity(15, 15);
  EXPECT_THROW(marginalize(empty, Pe), InvalidArgument);
}

TEST(FilterState, FindClone) {
  FilterState fs;
  fs.clones = {{0.1}, {0.2}};
  EXPECT_EQ(fs.find_clone(0.2 + 1e-12), 1u);
  EXPECT_FALSE(fs.find_clone(0.25));
  EXPECT_THROW(fs.clone_at(0.25), InvalidArgument);
}

TEST(FilterState, ApplyCorrectionConventions) {
  FilterState fs;
  fs.clones = {{0.1}};
  fs.calib_active = true;
  fs.td_active = true;
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(fs.dim());
  dx.segment<3>(0) = Vec3(0, 0, 0.1);
  dx.segment<3>(3) = Vec3(1, 2, 3);
  dx.segment<3>(15) = Vec3(0.2, 0, 0);
  dx(fs.td_offset()) = 0.004;
  apply_correction(fs, dx);
  EXPECT_LT((fs.imu.R_GtoI - so3_exp(Vec3(0, 0, -0.1))).norm(), 1e-15);
  EXPECT_EQ(fs.imu.p_I_in_G, Vec3(1, 2, 3));
  EXPECT_LT((fs.clones[0].R_GtoI - so3_exp(Vec3(-0.2, 0, 0))).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(fs.t_d, 0.004);
  EXPECT_THROW(apply_correction(fs, Eigen::VectorXd::Zero(3)), InvalidArgument);
}
