#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mapvio/error.hpp"
#include "mapvio/experiment.hpp"

using namespace mapvio;

namespace {

ExperimentConfig short_config(std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.seed = seed;
  c.scenario.trajectory.duration = 6.0;
  return c;
}

std::string traj_text(const std::vector<TrajectoryEntry>& t) {
  std::ostringstream os;
  write_trajectory_csv(os, t);
  return os.str();
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Experiment, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_NE(derive_seed(0, 0), 0u);
}

TEST(Experiment, RunsAreBitwiseReproducible) {
  const RunResult a = run_experiment(short_config());
  const RunResult b = run_experiment(short_config());
  EXPECT_EQ(traj_text(a.est), traj_text(b.est));
  EXPECT_EQ(metrics_json(a.metrics), metrics_json(b.metrics));
  const RunResult c = run_experiment(short_config(2));
  EXPECT_NE(traj_text(a.est), traj_text(c.est));
}

TEST(Experiment, NoiseFreeRunTracksTruth) {
  ExperimentConfig c = short_config();
  c.scenario.noise_free = true;
  const RunResult r = run_experiment(c);
  EXPECT_LT(r.metrics.ate_pos_m, 1e-3);
  EXPECT_LT(r.metrics.ate_rot_deg, 0.05);
  EXPECT_GT(r.metrics.captured_updates, 0);
  EXPECT_GT(r.metrics.rendered_updates, 0);
}

TEST(Experiment, NoisyRunIsConsistent) {
  const RunResult r = run_experiment(short_config());
  const MetricsReport& m = r.metrics;
  EXPECT_LT(m.ate_pos_m, 0.05);
  EXPECT_GT(m.nees_samples, 0);
  EXPECT_GT(m.nees_mean, 0.0);
  EXPECT_GT(m.gated, 0);
  EXPECT_LE(m.gate_rejected, m.gated);
  EXPECT_EQ(m.renders_requested, m.renders_delivered + m.renders_dropped);
  EXPECT_LE(m.cells_accepted, m.cells_total);
  EXPECT_EQ(r.est.size(), r.gt.size());
}

TEST(Experiment, MapUpdatesOffIsCapturedOnly) {
  ExperimentConfig c = short_config();
  c.filter.map_updates = false;
  const RunResult r = run_experiment(c);
  EXPECT_EQ(r.metrics.rendered_updates, 0);
  EXPECT_EQ(r.metrics.renders_requested, 0);
  EXPECT_EQ(r.metrics.cells_total, 0);
  for (const auto& u : r.updates) EXPECT_EQ(u.source, FeatureSource::kCaptured);
  EXPECT_GT(r.metrics.captured_updates, 0);
}

TEST(Experiment, ChangedRegionNeverFeedsTheFilter) {
  ExperimentConfig c = short_config();
  c.scenario.environment_change = true;
  const MetricsReport m = run_experiment(c).metrics;
  EXPECT_GT(m.altered_cells, 0);
  EXPECT_EQ(m.altered_cells_rejected, m.altered_cells);
  EXPECT_EQ(m.rendered_from_rejected_cells, 0);
  EXPECT_EQ(m.altered_features_used, 0);
}

TEST(Experiment, PerturbedInitialization) {
  ExperimentConfig c = short_config();
  c.filter.init_mode = InitMode::kPerturbed;
  const RunResult r = run_experiment(c);
  EXPECT_TRUE(std::isfinite(r.metrics.ate_pos_m));
  EXPECT_GT(r.metrics.rendered_updates, 0);
}

TEST(Experiment, LearnedModeNeedsAModel) {
  ExperimentConfig c = short_config();
  c.filter.init_mode = InitMode::kLearned;
  EXPECT_THROW(run_experiment(c), InvalidArgument);
  c.filter.init_model = "/nonexistent/model.bin";
  EXPECT_THROW(run_experiment(c), FormatError);
}

TEST(Experiment, LearnedModeUsesGivenModel) {
  ExperimentConfig c = short_config();
  c.filter.init_mode = InitMode::kLearned;
  const MapModel map = build_map(c);
  const auto data = make_init_dataset(map, build_world(c).calib, init_region_for(c), 64, 3, 8);
  TrainConfig tc;
  tc.epochs = 5;
  MlpModel m = train(data, tc, make_mlp(8, 8, 32, 3, 1)).model;
  m.validation_ms.setConstant(1e-3);
  const RunResult r = run_experiment(c, &m);
  EXPECT_GT(r.metrics.init_pos_cm, 0.0);
  EXPECT_GT(r.timing.init_latency_s, 0.0);
  EXPECT_TRUE(std::isfinite(r.metrics.ate_pos_m));
}

TEST(Experiment, InitDatasetIsDeterministic) {
  const ExperimentConfig c = short_config();
  const MapModel map = build_map(c);
  const Calibration calib = build_world(c).calib;
  const auto a = make_init_dataset(map, calib, init_region_for(c), 5, 11, 16);
  const auto b = make_init_dataset(map, calib, init_region_for(c), 5, 11, 16);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image.width(), 16);
    EXPECT_EQ(a[i].image.height(), 16);
    EXPECT_EQ(a[i].gt_pose.matrix(), b[i].gt_pose.matrix());
    EXPECT_TRUE(std::equal(a[i].image.data().begin(), a[i].image.data().end(), b[i].image.data().begin()));
  }
}

TEST(Experiment, WritesAllOutputs) {
  const RunResult r = run_experiment(short_config());
  const auto dir = std::filesystem::temp_directory_path() / "mapvio_test_outputs";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir.string());
  for (const char* f : {"trajectory.csv", "groundtruth.csv", "updates.csv", "metrics.json", "trajectory.dat",
                        "timing.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto m = nlohmann::json::parse(read_all(dir / "metrics.json"));
  EXPECT_EQ(m.at("ate_pos_m").get<double>(), r.metrics.ate_pos_m);
  std::ifstream traj(dir / "trajectory.csv");
  EXPECT_EQ(read_trajectory_csv(traj).size(), r.est.size());
  std::filesystem::remove_all(dir);
}
