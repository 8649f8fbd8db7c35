#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mapvio/imu.hpp"
#include "mapvio/msckf.hpp"
#include "mapvio/sim_world.hpp"

namespace mapvio {

/// One row of a trajectory file: IMU pose at time t.
struct TrajectoryEntry {
  double t = 0.0;
  Mat3 R_GtoI = Mat3::Identity();
  Vec3 p_I_in_G = Vec3::Zero();
};

/// A feature-track CSV row.
struct FeatureRow {
  double t = 0.0;
  std::size_t feature_id = 0;
  Vec2 uv = Vec2::Zero();
  FeatureSource source = FeatureSource::kCaptured;
};

struct UpdateLogRow {
  double t = 0.0;
  FeatureSource source = FeatureSource::kCaptured;
  UpdateReport report;
};

/// Header "t,wx,wy,wz,ax,ay,az".
void write_imu_csv(std::ostream& out, const std::vector<ImuSample>& samples);
std::vector<ImuSample> read_imu_csv(std::istream& in);

/// Header "t,feature_id,u,v,source" with source "captured" or "rendered".
void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in);
std::vector<FeatureRow> feature_rows(const std::vector<CameraFrame>& frames);

/// Header "t,qx,qy,qz,qw,px,py,pz"; q is the JPL quaternion of R_GtoI.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryEntry>& traj);
std::vector<TrajectoryEntry> read_trajectory_csv(std::istream& in);

/// Header "t,source,residual_dim,chi2,accepted,post_residual_norm,features_used,features_rejected,features_failed".
void write_update_log(std::ostream& out, const std::vector<UpdateLogRow>& rows);

/// Whitespace-separated "t est_x est_y est_z gt_x gt_y gt_z" for gnuplot.
void write_gnuplot_dat(std::ostream& out, const std::vector<TrajectoryEntry>& est,
                       const std::vector<TrajectoryEntry>& gt);

/// Opens `path` for writing or throws FormatError.
void write_file(const std::string& path, const std::string& content);

}  // namespace mapvio
