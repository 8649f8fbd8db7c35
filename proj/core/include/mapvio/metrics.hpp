#pragma once

#include <span>
#include <vector>

#include "mapvio/csv_io.hpp"
#include "mapvio/init_model.hpp"

namespace mapvio {

struct AteResult {
  double rot_deg = 0.0;  // RMS rotation angle after alignment
  double pos_m = 0.0;    // RMS position error after alignment
  int matched = 0;
  Pose alignment;        // applied to the estimate: x_gt ~ alignment * x_est
};

/// Matches each estimate to the nearest ground-truth stamp (within 1 ms),
/// aligns with a rigid (no scale) Umeyama fit on positions, and reports RMS
/// errors. Throws InvalidArgument with fewer than two matches.
AteResult compute_ate(const std::vector<TrajectoryEntry>& est, const std::vector<TrajectoryEntry>& gt);

/// Rigid Umeyama fit: argmin sum |dst - (R src + t)|^2.
Pose umeyama_rigid(std::span<const Vec3> src, std::span<const Vec3> dst);

struct InitEval {
  double rot_deg = 0.0;
  double pos_cm = 0.0;  // camera centre distance
  double seconds = 0.0; // wall clock of preprocessing-free inference
  Pose estimate;
};

/// Relocalizes every test image with a preloaded model.
std::vector<InitEval> eval_init(const MlpModel& m, std::span<const TrainSample> test);

/// Rotation angle (deg) and camera-centre distance (cm) between two camera poses.
InitEval pose_difference(const Pose& est, const Pose& truth);

double median(std::vector<double> v);

}  // namespace mapvio
