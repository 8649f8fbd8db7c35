#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mapvio/csv_io.hpp"
#include "mapvio/error.hpp"
#include "test_util.hpp"

using namespace mapvio;
using namespace mapvio::test;

TEST(CsvIo, ImuRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::vector<ImuSample> s;
  for (int i = 0; i < 50; ++i) s.push_back({0.005 * i + 1e-9, random_vec3(rng), random_vec3(rng, 10.0)});
  std::stringstream ss;
  write_imu_csv(ss, s);
  const auto back = read_imu_csv(ss);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].t, s[i].t);
    EXPECT_EQ(back[i].omega_m, s[i].omega_m);
    EXPECT_EQ(back[i].accel_m, s[i].accel_m);
  }
}

TEST(CsvIo, ImuRejectsBadInput) {
  std::stringstream header("t,a,b\n");
  EXPECT_THROW(read_imu_csv(header), FormatError);
  std::stringstream empty;
  EXPECT_THROW(read_imu_csv(empty), FormatError);
  std::stringstream cols("t,wx,wy,wz,ax,ay,az\n0,1,2\n");
  EXPECT_THROW(read_imu_csv(cols), FormatError);
  std::stringstream nan("t,wx,wy,wz,ax,ay,az\n0,1,2,x,4,5,6\n");
  EXPECT_THROW(read_imu_csv(nan), FormatError);
  std::stringstream order("t,wx,wy,wz,ax,ay,az\n1,0,0,0,0,0,0\n1,0,0,0,0,0,0\n");
  try {
    read_imu_csv(order);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(CsvIo, FeatureRoundTrip) {
  const std::vector<FeatureRow> rows = {{0.1, 3, Vec2(10.25, 20.5), FeatureSource::kCaptured},
                                        {0.2, 1000000, Vec2(-1.0 / 3.0, 7.0), FeatureSource::kRendered}};
  std::stringstream ss;
  write_feature_csv(ss, rows);
  const auto back = read_feature_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].t, rows[i].t);
    EXPECT_EQ(back[i].feature_id, rows[i].feature_id);
    EXPECT_EQ(back[i].uv, rows[i].uv);
    EXPECT_EQ(back[i].source, rows[i].source);
  }
  std::stringstream bad("t,feature_id,u,v,source\n0,1,2,3,painted\n");
  EXPECT_THROW(read_feature_csv(bad), FormatError);
  std::stringstream neg("t,feature_id,u,v,source\n0,-1,2,3,captured\n");
  EXPECT_THROW(read_feature_csv(neg), FormatError);
}

TEST(CsvIo, TrajectoryRoundTrip) {
  std::mt19937_64 rng(2);
  std::vector<TrajectoryEntry> traj;
  for (int i = 0; i < 20; ++i) {
    const Pose p = random_pose(rng);
    traj.push_back({0.1 * i, p.rotation, p.translation});
  }
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const auto back = read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back[i].t, traj[i].t);
    EXPECT_LT((back[i].R_GtoI - traj[i].R_GtoI).norm(), 1e-14);
    EXPECT_EQ(back[i].p_I_in_G, traj[i].p_I_in_G);
  }
}

TEST(CsvIo, UpdateLogAndGnuplot) {
  UpdateLogRow row;
  row.t = 1.5;
  row.source = FeatureSource::kRendered;
  row.report.residual_dim = 12;
  row.report.accepted = true;
  std::stringstream ss;
  write_update_log(ss, {row});
  std::string header, line;
  std::getline(ss, header);
  std::getline(ss, line);
  EXPECT_EQ(header,
            "t,source,residual_dim,chi2,accepted,post_residual_norm,features_used,features_rejected,features_failed");
  EXPECT_EQ(line.substr(0, 15), "1.5,rendered,12");

  const std::vector<TrajectoryEntry> est = {{0.0, Mat3::Identity(), Vec3(1, 2, 3)}};
  std::stringstream dat;
  write_gnuplot_dat(dat, est, est);
  std::string comment;
  std::getline(dat, comment);
  EXPECT_EQ(comment[0], '#');
  double v[7];
  for (double& x : v) dat >> x;
  EXPECT_EQ(v[1], 1.0);
  EXPECT_EQ(v[6], 3.0);
  EXPECT_THROW(write_gnuplot_dat(dat, est, {}), InvalidArgument);
}

TEST(CsvIo, WriteFileFailsOnBadPath) { EXPECT_THROW(write_file("/nonexistent/dir/x.csv", "x"), FormatError); }
