#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mapvio/config.hpp"
#include "mapvio/csv_io.hpp"
#include "mapvio/error.hpp"
#include "mapvio/experiment.hpp"
#include "mapvio/map_io.hpp"
#include "mapvio/metrics.hpp"

namespace {

using namespace mapvio;

ExperimentConfig config_from(const std::string& path) { return path.empty() ? ExperimentConfig{} : load_config(path); }

// Run-level gates checked in --check mode.
int check_run(const MetricsReport& m) {
  int failed = 0;
  auto gate = [&](bool ok, const char* what) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", what);
    if (!ok) ++failed;
  };
  gate(std::isfinite(m.ate_pos_m) && std::isfinite(m.ate_rot_deg), "trajectory error is finite");
  gate(m.nees_samples > 0, "filter produced estimates");
  gate(m.rendered_from_rejected_cells == 0, "no rendered feature from a rejected cell");
  gate(m.altered_features_used == 0, "no altered landmark used");
  gate(m.altered_cells_rejected == m.altered_cells, "every altered cell rejected");
  return failed;
}

struct TrainArgs {
  std::string config;
  std::string out = "init_model.bin";
  InitTrainingOptions opt;
};

struct EvalArgs {
  std::string config;
  std::string model;
  int samples = 100;
  std::uint64_t seed = 999;
  std::string csv;
};

int cmd_run(const std::string& cfg_path, const std::string& out, std::int64_t seed, bool check) {
  ExperimentConfig cfg = config_from(cfg_path);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) cfg.output_dir = out;
  const RunResult r = run_experiment(cfg);
  if (!cfg.output_dir.empty()) write_outputs(r, cfg.output_dir);
  std::cout << metrics_json(r.metrics);
  return check && check_run(r.metrics) ? 1 : 0;
}

int cmd_train(const TrainArgs& a) {
  const InitTraining it = train_init_model(config_from(a.config), a.opt);
  const TrainResult& tr = it.result;
  save_checkpoint(a.out, tr.model);
  const auto ev = eval_init(tr.model, it.held_out);
  std::vector<double> rot, pos;
  for (const auto& e : ev) {
    rot.push_back(e.rot_deg);
    pos.push_back(e.pos_cm);
  }
  std::printf("loss %.6g -> %.6g, held-out median %.3f deg %.3f cm, wrote %s\n", tr.initial_loss, tr.final_loss,
              median(rot), median(pos), a.out.c_str());
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const ExperimentConfig cfg = config_from(a.config);
  const MlpModel model = load_checkpoint(a.model);
  const MapModel map = build_map(cfg);
  const auto test = make_init_dataset(map, default_calibration(), init_region_for(cfg), a.samples, a.seed,
                                      model.input_width);
  const auto ev = eval_init(model, test);
  std::vector<double> rot, pos, sec;
  std::ostringstream csv;
  csv << "index,rot_deg,pos_cm,seconds\n";
  for (std::size_t i = 0; i < ev.size(); ++i) {
    rot.push_back(ev[i].rot_deg);
    pos.push_back(ev[i].pos_cm);
    sec.push_back(ev[i].seconds);
    csv << i << ',' << ev[i].rot_deg << ',' << ev[i].pos_cm << ',' << ev[i].seconds << '\n';
  }
  if (!a.csv.empty()) write_file(a.csv, csv.str());
  std::printf("median %.3f deg %.3f cm, median latency %.3g s over %zu images\n", median(rot), median(pos),
              median(sec), ev.size());
  return 0;
}

int cmd_gen(const std::string& cfg_path, const std::string& out) {
  const ExperimentConfig cfg = config_from(cfg_path);
  const World w = build_world(cfg);
  std::filesystem::create_directories(out);
  const std::filesystem::path d(out);
  std::ostringstream imu, feat, gt;
  write_imu_csv(imu, w.imu);
  write_feature_csv(feat, feature_rows(w.frames));
  std::vector<TrajectoryEntry> traj;
  for (const auto& s : w.truth.samples) traj.push_back({s.t, s.R_GtoI, s.p_I_in_G});
  write_trajectory_csv(gt, traj);
  write_file((d / "imu.csv").string(), imu.str());
  write_file((d / "features.csv").string(), feat.str());
  write_file((d / "groundtruth.csv").string(), gt.str());
  save_map((d / "map.txt").string(), w.map);
  write_file((d / "config.json").string(), serialize_config(cfg));
  std::printf("wrote %zu imu samples, %zu frames to %s\n", w.imu.size(), w.frames.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map-aided visual-inertial odometry toolkit"};
  app.require_subcommand(1);

  std::string cfg_path, out;
  std::int64_t seed = -1;
  bool check = false;
  auto* run = app.add_subcommand("run", "Run one experiment and write its outputs");
  run->add_option("-c,--config", cfg_path, "JSON config (defaults when omitted)");
  run->add_option("-o,--output", out, "Output directory (overrides the config)");
  run->add_option("-s,--seed", seed, "Seed (overrides the config)");
  run->add_flag("--check", check, "Exit nonzero when a run-level gate fails");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train-init", "Train the initialization model");
  tr->add_option("-c,--config", ta.config, "JSON config");
  tr->add_option("-o,--output", ta.out, "Checkpoint path");
  tr->add_option("--samples", ta.opt.samples, "Training images");
  tr->add_option("--validation", ta.opt.validation, "Held-out images for the alignment covariance");
  tr->add_option("--hidden", ta.opt.hidden, "Hidden width");
  tr->add_option("--depth", ta.opt.depth, "Affine layers");
  tr->add_option("--epochs", ta.opt.train.epochs, "Epochs");
  tr->add_option("--lr", ta.opt.train.learning_rate, "Learning rate");
  tr->add_option("--momentum", ta.opt.train.momentum, "Momentum");
  tr->add_option("--batch", ta.opt.train.batch_size, "Batch size");
  tr->add_option("--lr-decay", ta.opt.train.lr_decay, "Per-epoch learning rate factor");
  tr->add_option("--seed", ta.opt.train.seed, "Seed");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval-init", "Evaluate a checkpoint on held-out poses");
  ev->add_option("-c,--config", ea.config, "JSON config");
  ev->add_option("-m,--model", ea.model, "Checkpoint path")->required();
  ev->add_option("--samples", ea.samples, "Test images");
  ev->add_option("--seed", ea.seed, "Test set seed");
  ev->add_option("--csv", ea.csv, "Per-image results");

  std::string gen_cfg, gen_out = "data";
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic sensor streams and map");
  gen->add_option("-c,--config", gen_cfg, "JSON config");
  gen->add_option("-o,--output", gen_out, "Output directory");

  auto* dump = app.add_subcommand("print-config", "Print the canonical default config");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(cfg_path, out, seed, check);
    if (*tr) return cmd_train(ta);
    if (*ev) return cmd_eval(ea);
    if (*gen) return cmd_gen(gen_cfg, gen_out);
    if (*dump) {
      std::cout << serialize_config(ExperimentConfig{});
      return 0;
    }
  } catch (const mapvio::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
