#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapvio/config.hpp"
#include "mapvio/csv_io.hpp"
#include "mapvio/init_model.hpp"
#include "mapvio/render.hpp"
#include "mapvio/sim_world.hpp"

namespace mapvio {

/// Everything a run produces that is a pure function of config and seed.
struct MetricsReport {
  double ate_rot_deg = 0.0;
  double ate_pos_m = 0.0;
  double final_pos_err_m = 0.0;
  double init_rot_deg = 0.0;  // first-frame relocalization error
  double init_pos_cm = 0.0;
  int captured_updates = 0;
  int rendered_updates = 0;
  int captured_features_used = 0;
  int rendered_features_used = 0;
  int gated = 0;          // features that reached the chi-square gate
  int gate_rejected = 0;
  double chi2_per_dof_mean = 0.0;
  int renders_requested = 0;
  int renders_delivered = 0;
  int renders_dropped = 0;  // closest clone left the window before delivery
  int cells_total = 0;
  int cells_accepted = 0;
  int altered_cells = 0;  // cells at least half covered by the changed region
  int altered_cells_rejected = 0;
  int rendered_from_rejected_cells = 0;
  int altered_features_used = 0;
  double nees_mean = 0.0;  // time-averaged 15-dim IMU NEES
  int nees_samples = 0;
};

/// Wall-clock measurements, kept apart so metrics stay reproducible.
struct RunTiming {
  double init_latency_s = 0.0;
  double wall_s = 0.0;
};

struct RunResult {
  MetricsReport metrics;
  RunTiming timing;
  std::vector<TrajectoryEntry> est;
  std::vector<TrajectoryEntry> gt;
  std::vector<UpdateLogRow> updates;
};

/// Synthetic world of one run: truth, sensor streams and the prior map.
struct World {
  GroundTruth truth;
  std::vector<ImuSample> imu;
  std::vector<CameraFrame> frames;
  MapModel map;
  Calibration calib;
};

World build_world(const ExperimentConfig& cfg);

/// Initializes from the stationary window, then runs the virtual-time event
/// loop (IMU < camera < render request < render delivery at equal stamps).
/// `model` overrides cfg.filter.init_model in the learned mode. Module errors
/// are rethrown with the event time prepended.
RunResult run_experiment(const ExperimentConfig& cfg, const MlpModel* model = nullptr);

std::string metrics_json(const MetricsReport& m);
std::string timing_json(const RunTiming& t);

/// Writes trajectory.csv, groundtruth.csv, updates.csv, metrics.json,
/// trajectory.dat and timing.json into dir (created if missing).
void write_outputs(const RunResult& r, const std::string& dir);

/// Camera poses around the nominal start of the orbit used to train and test
/// the initialization model.
struct InitRegion {
  double radius = 1.5;
  double radius_spread = 0.1;
  double height = 0.6;
  double height_spread = 0.08;
  double phase = 0.0;
  double phase_spread = 1.0;  // rad
  double yaw_spread = 0.05;   // rad
  double pitch_spread = 0.05; // rad
};

InitRegion init_region_for(const ExperimentConfig& cfg);

/// n samples with poses drawn uniformly from the region, rendered from the map
/// and preprocessed to image_size x image_size.
std::vector<TrainSample> make_init_dataset(const MapModel& map, const Calibration& calib, const InitRegion& region,
                                           int n, std::uint64_t seed, int image_size);

struct InitTrainingOptions {
  int samples = 3000;
  int validation = 200;
  int hidden = 256;
  int depth = 4;
  TrainConfig train;
};

struct InitTraining {
  TrainResult result;  // result.model carries validation_ms
  std::vector<TrainSample> held_out;
};

/// Trains the initialization model on the configured map and sets its
/// alignment covariance from the held-out mean squared pose error.
InitTraining train_init_model(const ExperimentConfig& cfg, const InitTrainingOptions& opt = {});

/// Map of the configured world (landmarks, camera, latency, change mask).
MapModel build_map(const ExperimentConfig& cfg);

/// Deterministic 64-bit mixing of a seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mapvio
