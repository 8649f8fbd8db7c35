#pragma once

#include <cstdint>
#include <vector>

#include "mapvio/filter_state.hpp"
#include "mapvio/imu.hpp"
#include "mapvio/msckf.hpp"
#include "mapvio/render.hpp"

namespace mapvio {

/// Orbit around the scene centre. The platform sits still for
/// stationary_time, the orbit angle then accelerates smoothly over ramp_time
/// to angular_rate. Height bobs and heading wobbles with the orbit angle, and
/// the IMU x axis always looks at the origin.
struct TrajectorySpec {
  double radius = 1.5;         // m
  double height = 0.6;         // m above the table
  double angular_rate = 0.3;   // rad/s
  double bob_amplitude = 0.05; // m
  int bob_cycles = 3;          // per revolution
  double yaw_wobble = 0.05;    // rad
  int wobble_cycles = 2;       // per revolution
  double stationary_time = 1.0;
  double ramp_time = 2.0;
  double start_phase = 0.0;    // rad
  double phase_jitter = 0.0;   // start phase drawn from start_phase +- jitter
  double duration = 30.0;      // s
  double imu_rate = 200.0;     // Hz
  std::uint64_t seed = 1;

  void validate() const;
  /// Copy with the seeded start phase drawn and phase_jitter cleared.
  TrajectorySpec resolved() const;
};

struct TruthState {
  double t = 0.0;
  Mat3 R_GtoI = Mat3::Identity();
  Vec3 p_I_in_G = Vec3::Zero();
  Vec3 v_I_in_G = Vec3::Zero();
  Vec3 a_I_in_G = Vec3::Zero();
  Vec3 omega_I = Vec3::Zero();  // body rate in the IMU frame
};

/// Closed-form truth of a resolved spec at time t.
TruthState evaluate_truth(const TrajectorySpec& spec, double t);

struct GroundTruth {
  TrajectorySpec spec;  // resolved
  std::vector<TruthState> samples;  // at IMU rate
  std::vector<Vec3> bg;  // true biases at the sample times (after synthesize_imu)
  std::vector<Vec3> ba;
};

GroundTruth generate_truth(const TrajectorySpec& spec);

struct ImuSynthOptions {
  bool white_noise = true;
  bool bias_walk = true;
  Vec3 bg0 = Vec3::Zero();
  Vec3 ba0 = Vec3::Zero();
  Vec3 gravity = kDefaultGravity;
};

/// Inverse dynamics plus noise. Writes the true bias tracks into gt.bg/gt.ba.
std::vector<ImuSample> synthesize_imu(GroundTruth& gt, const NoiseParams& noise, std::uint64_t seed,
                                      const ImuSynthOptions& opt = {});

/// IMU x forward / z up; camera z forward, x right, y down; camera 5 cm ahead
/// and 2 cm above the IMU.
Calibration default_calibration();

/// Camera pose in the global frame (x_G = T * x_C) for an IMU pose.
Pose camera_pose(const Mat3& R_GtoI, const Vec3& p_I_in_G, const Calibration& calib);
inline Pose camera_pose(const TruthState& s, const Calibration& calib) {
  return camera_pose(s.R_GtoI, s.p_I_in_G, calib);
}

struct FeatureObservation {
  std::size_t id = 0;
  Vec2 uv = Vec2::Zero();
};

struct CameraFrame {
  double t = 0.0;  // camera clock
  std::vector<FeatureObservation> obs;
};

struct CameraSynthOptions {
  double rate = 30.0;
  double sigma_px = 1.0;
  bool noise = true;
  double t_d = 0.0;  // camera clock minus IMU clock
};

/// Projects every landmark with depth > 0.1 m whose true projection lies in
/// the image, then adds Gaussian pixel noise. Frames are at k / rate.
std::vector<CameraFrame> synthesize_camera(const GroundTruth& gt, const std::vector<Landmark>& landmarks,
                                           const CameraIntrinsics& cam, const Calibration& calib,
                                           std::uint64_t seed, const CameraSynthOptions& opt = {});

struct LandmarkLayout {
  int table = 200;
  int wall = 100;
  double amplitude_min = 0.3;
  double amplitude_max = 0.5;
  double sigma_px = 1.8;
};

/// Table landmarks uniform over the tablecloth (z = 0); wall landmarks on the
/// four walls between 0.1 m and 1.0 m height. Ids are 0..n-1.
std::vector<Landmark> generate_landmarks(const SceneGeometry& scene, std::uint64_t seed,
                                         const LandmarkLayout& layout = {});

/// Ids of table landmarks inside the axis-aligned rectangle [x0, x1] x [y0, y1].
std::vector<std::size_t> landmarks_in_region(const std::vector<Landmark>& lms, double x0, double x1, double y0,
                                             double y1);

}  // namespace mapvio
