#pragma once

#include <cstdint>
#include <string>

#include "mapvio/imu.hpp"
#include "mapvio/sim_world.hpp"
#include "mapvio/ssim.hpp"

namespace mapvio {

enum class InitMode { kGroundTruth, kLearned, kPerturbed };

const char* to_string(InitMode m);
/// Throws InvalidArgument for an unknown name.
InitMode init_mode_from_string(const std::string& s);

struct ScenarioConfig {
  TrajectorySpec trajectory;
  double camera_rate = 30.0;
  double render_rate = 2.0;
  double render_latency = 0.2;
  std::uint64_t world_seed = 7;
  LandmarkLayout landmarks;
  bool environment_change = false;
  /// Table rectangle (x0, x1, y0, y1) whose landmarks are altered.
  double change_region[4] = {0.05, 0.45, -0.45, -0.05};
  double bias_g0_sigma = 0.002;  // spread of the true initial gyro bias, rad/s
  double bias_a0_sigma = 0.02;   // spread of the true initial accel bias, m/s^2
  bool noise_free = false;       // no IMU noise, no bias walk, no pixel noise
};

struct FilterConfig {
  bool map_updates = true;
  InitMode init_mode = InitMode::kGroundTruth;
  std::string init_model;  // checkpoint path for the learned mode
  double perturb_deg = 2.0;
  double perturb_m = 0.05;
  int max_clones = 11;
  int max_tracked = 80;
  int max_update_features = 40;
  int max_rendered = 40;
  double chi2_probability = 0.95;
  double fast_threshold = 0.05;
  double association_px = 1.5;
  SsimOptions ssim;
  int init_image_size = 32;  // square model input
  double sigma_theta0 = 1e-3;  // initial attitude std, rad
  double sigma_p0 = 1e-3;      // m
  double sigma_v0 = 0.01;      // m/s
  double sigma_bg0 = 2e-4;     // rad/s, about sigma_g / sqrt(stationary time)
  double sigma_ba0 = 2e-3;     // m/s^2, about sigma_a / sqrt(stationary time)
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  NoiseParams noise;
  FilterConfig filter;
  Vec3 metric_a = Vec3::Zero();
  std::uint64_t seed = 1;
  std::string output_dir;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

/// JSON text to config. Missing keys keep their defaults; unknown keys and
/// type errors throw FormatError naming the offending path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical form: every field, keys sorted, two-space indentation.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace mapvio
