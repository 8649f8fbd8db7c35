#include "mapvio/experiment.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mapvio/error.hpp"
#include "mapvio/fast.hpp"
#include "mapvio/metrics.hpp"
#include "mapvio/propagator.hpp"
#include "mapvio/ssim.hpp"

namespace mapvio {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

enum Stream : std::uint64_t { kImuNoise = 1, kCameraNoise, kRenderNoise, kTracker, kBiases, kPerturb };

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

double first_frame_time(const ExperimentConfig& cfg) {
  return std::ceil(cfg.scenario.trajectory.stationary_time * cfg.scenario.camera_rate - 1e-9) / cfg.scenario.camera_rate;
}

}  // namespace

MapModel build_map(const ExperimentConfig& cfg) {
  MapModel map;
  map.landmarks = generate_landmarks(map.scene, cfg.scenario.world_seed, cfg.scenario.landmarks);
  map.latency = cfg.scenario.render_latency;
  if (cfg.scenario.environment_change) {
    const double* r = cfg.scenario.change_region;
    map.changed = landmarks_in_region(map.landmarks, r[0], r[1], r[2], r[3]);
  }
  map.validate();
  return map;
}

World build_world(const ExperimentConfig& cfg) {
  cfg.validate();
  World w;
  TrajectorySpec spec = cfg.scenario.trajectory;
  spec.seed = cfg.seed;
  w.truth = generate_truth(spec);
  w.map = build_map(cfg);
  w.calib = default_calibration();

  std::mt19937_64 rng(derive_seed(cfg.seed, kBiases));
  std::normal_distribution<double> n01(0.0, 1.0);
  ImuSynthOptions iopt;
  for (int i = 0; i < 3; ++i) iopt.bg0[i] = cfg.scenario.bias_g0_sigma * n01(rng);
  for (int i = 0; i < 3; ++i) iopt.ba0[i] = cfg.scenario.bias_a0_sigma * n01(rng);
  iopt.white_noise = !cfg.scenario.noise_free;
  iopt.bias_walk = !cfg.scenario.noise_free;
  w.imu = synthesize_imu(w.truth, cfg.noise, derive_seed(cfg.seed, kImuNoise), iopt);

  std::vector<Landmark> visible;
  for (const auto& lm : w.map.landmarks) {
    if (!w.map.is_changed(lm.id)) visible.push_back(lm);
  }
  CameraSynthOptions copt;
  copt.rate = cfg.scenario.camera_rate;
  copt.sigma_px = cfg.noise.sigma_px;
  copt.noise = !cfg.scenario.noise_free;
  w.frames = synthesize_camera(w.truth, visible, w.map.camera, w.calib, derive_seed(cfg.seed, kCameraNoise), copt);
  return w;
}

namespace {

enum class EventType { kImu = 0, kCamera = 1, kRenderRequest = 2, kRenderDelivery = 3 };

struct Event {
  double t = 0.0;
  EventType type = EventType::kImu;
  std::size_t index = 0;  // into the stream of that type
  std::uint64_t seq = 0;  // insertion order breaks remaining ties

  bool operator>(const Event& o) const {
    if (t != o.t) return t > o.t;
    if (type != o.type) return static_cast<int>(type) > static_cast<int>(o.type);
    return seq > o.seq;
  }
};

struct PendingRender {
  RenderedFrame frame;
  double cc = 0.0;  // closest clone stamp
};

// Keeps at most max_tracked live tracks; hands out tracks that ended or that
// reach back to the oldest clone of a full window.
class Tracker {
 public:
  Tracker(int max_tracked, std::uint64_t seed) : max_tracked_(max_tracked), rng_(seed) {}

  std::vector<FeatureTrack> step(const CameraFrame& f, double clone_t) {
    std::vector<FeatureTrack> ready;
    std::map<std::size_t, Vec2> seen;
    for (const auto& o : f.obs) seen.emplace(o.id, o.uv);
    for (auto it = active_.begin(); it != active_.end();) {
      auto s = seen.find(it->first);
      if (s == seen.end()) {
        ready.push_back(std::move(it->second));
        it = active_.erase(it);
      } else {
        it->second.obs.push_back({clone_t, s->second});
        seen.erase(s);
        ++it;
      }
    }
    std::vector<std::size_t> fresh;
    for (const auto& [id, uv] : seen) fresh.push_back(id);
    std::shuffle(fresh.begin(), fresh.end(), rng_);
    for (std::size_t id : fresh) {
      if (static_cast<int>(active_.size()) >= max_tracked_) break;
      FeatureTrack t;
      t.id = id;
      t.obs.push_back({clone_t, seen[id]});
      active_.emplace(id, std::move(t));
    }
    return ready;
  }

  // Tracks observed at `oldest`: copied out and restarted.
  std::vector<FeatureTrack> take_spanning(double oldest) {
    std::vector<FeatureTrack> out;
    for (auto& [id, t] : active_) {
      if (!t.obs.empty() && std::abs(t.obs.front().t - oldest) < 1e-9) {
        out.push_back(t);
        t.obs.clear();
      }
    }
    return out;
  }

 private:
  int max_tracked_;
  std::mt19937_64 rng_;
  std::map<std::size_t, FeatureTrack> active_;
};

[[noreturn]] void rethrow_with_time(const Error& e, double t) {
  std::ostringstream os;
  os << "event at t=" << t << ": " << e.what();
  if (dynamic_cast<const InvalidArgument*>(&e)) throw InvalidArgument(os.str());
  if (dynamic_cast<const DegenerateLog*>(&e)) throw DegenerateLog(os.str());
  if (dynamic_cast<const NumericalError*>(&e)) throw NumericalError(os.str());
  if (dynamic_cast<const FormatError*>(&e)) throw FormatError(os.str());
  throw Error(os.str());
}

Vec6 fixed_direction_twist(double deg, double m) {
  const double r = deg2rad(deg) / std::sqrt(3.0);
  const double s = m / std::sqrt(3.0);
  Vec6 xi;
  xi << r, r, r, s, -s, s;
  return xi;
}

double imu_nees(const FilterState& fs, const Covariance& P, const TruthState& truth, const Vec3& bg, const Vec3& ba) {
  Eigen::Matrix<double, 15, 1> e;
  e.segment<3>(0) = -so3_log(truth.R_GtoI * fs.imu.R_GtoI.transpose());
  e.segment<3>(3) = truth.p_I_in_G - fs.imu.p_I_in_G;
  e.segment<3>(6) = truth.v_I_in_G - fs.imu.v_I_in_G;
  e.segment<3>(9) = bg - fs.imu.bg;
  e.segment<3>(12) = ba - fs.imu.ba;
  const Mat15 Pi = P.topLeftCorner<15, 15>();
  return e.dot(Pi.ldlt().solve(e));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const MlpModel* model) {
  const auto wall0 = std::chrono::steady_clock::now();
  cfg.validate();
  const World w = build_world(cfg);
  const TrajectorySpec& spec = w.truth.spec;
  const FilterConfig& fc = cfg.filter;
  const double t_d = 0.0;
  RunResult res;
  MetricsReport& M = res.metrics;

  // ---- initialization from the stationary window
  const double t0 = first_frame_time(cfg);
  std::vector<ImuSample> window;
  for (const auto& s : w.imu) {
    if (s.t <= t0 + 1e-12) window.push_back(s);
  }
  const TruthState truth0 = evaluate_truth(spec, t0);
  FilterState fs;
  fs.max_clones = static_cast<std::size_t>(fc.max_clones);
  fs.calib = w.calib;
  fs.t_d = t_d;
  fs.imu.t = t0;
  fs.imu.R_GtoI = truth0.R_GtoI;
  fs.imu.p_I_in_G = truth0.p_I_in_G;
  const BiasBootstrap boot = bootstrap_vel_bias(window, fs.imu.R_GtoI);
  fs.imu.v_I_in_G = boot.v0;
  fs.imu.bg = boot.bg0;
  fs.imu.ba = boot.ba0;

  Covariance P = Covariance::Zero(15, 15);
  P.diagonal().segment<3>(0).setConstant(fc.sigma_theta0 * fc.sigma_theta0);
  P.diagonal().segment<3>(3).setConstant(fc.sigma_p0 * fc.sigma_p0);
  P.diagonal().segment<3>(6).setConstant(fc.sigma_v0 * fc.sigma_v0);
  P.diagonal().segment<3>(9).setConstant(fc.sigma_bg0 * fc.sigma_bg0);
  P.diagonal().segment<3>(12).setConstant(fc.sigma_ba0 * fc.sigma_ba0);

  if (!cfg.scenario.noise_free) {
    // Initial pose and velocity errors drawn from the prior they are given.
    std::mt19937_64 prng(derive_seed(cfg.seed, kPerturb));
    std::normal_distribution<double> n01(0.0, 1.0);
    Vec3 dth, dp, dv;
    for (int i = 0; i < 3; ++i) dth[i] = fc.sigma_theta0 * n01(prng);
    for (int i = 0; i < 3; ++i) dp[i] = fc.sigma_p0 * n01(prng);
    for (int i = 0; i < 3; ++i) dv[i] = fc.sigma_v0 * n01(prng);
    fs.imu.R_GtoI = so3_exp(-dth) * fs.imu.R_GtoI;
    fs.imu.p_I_in_G += dp;
    fs.imu.v_I_in_G += dv;
  }

  const Pose T_G_I0{fs.imu.R_GtoI.transpose(), fs.imu.p_I_in_G};
  switch (fc.init_mode) {
    case InitMode::kGroundTruth:
      break;
    case InitMode::kPerturbed: {
      const Vec6 xi = fixed_direction_twist(fc.perturb_deg, fc.perturb_m);
      fs.T_GW = se3_exp(Twist::from_vector(xi));
      fs.sigma_init = xi.cwiseAbs2().asDiagonal();
      break;
    }
    case InitMode::kLearned: {
      MlpModel loaded;
      if (!model) {
        if (fc.init_model.empty()) throw InvalidArgument("learned init mode needs a model");
        loaded = load_checkpoint(fc.init_model);
        model = &loaded;
      }
      const Pose T_W_C0 = camera_pose(truth0, w.calib);
      const ImagePlane img =
          preprocess(render_world(w.map, T_W_C0).image, model->input_width, model->input_height);
      const auto ta = std::chrono::steady_clock::now();
      const Pose T_W_C0_hat = relocalize(*model, img);
      const auto tb = std::chrono::steady_clock::now();
      res.timing.init_latency_s = std::chrono::duration<double>(tb - ta).count();
      const InitEval err = pose_difference(T_W_C0_hat, T_W_C0);
      M.init_rot_deg = err.rot_deg;
      M.init_pos_cm = err.pos_cm;
      const Pose T_C0_I0{w.calib.R_ItoC, w.calib.p_I_in_C};
      const Pose T_W_I0_hat = compose_first_imu(T_W_C0_hat, T_C0_I0);
      fs.T_GW = T_G_I0 * T_W_I0_hat.inverse();
      fs.sigma_init = model->validation_ms.asDiagonal();
      break;
    }
  }

  UpdateOptions uopt;
  uopt.camera = w.map.camera;
  uopt.sigma_px = cfg.noise.sigma_px;
  uopt.sigma_r = cfg.noise.sigma_r;
  uopt.chi2_probability = fc.chi2_probability;

  // ---- event queue
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < w.imu.size(); ++i) {
    if (w.imu[i].t > t0) queue.push({w.imu[i].t, EventType::kImu, i, seq++});
  }
  for (std::size_t i = 0; i < w.frames.size(); ++i) {
    if (w.frames[i].t >= t0 - 1e-12) queue.push({w.frames[i].t, EventType::kCamera, i, seq++});
  }
  std::vector<RenderEvent> schedule;
  if (fc.map_updates) {
    for (const auto& r : schedule_renders(cfg.scenario.camera_rate, cfg.scenario.render_rate,
                                          cfg.scenario.render_latency, spec.duration)) {
      if (r.request_ts >= t0 - 1e-12) schedule.push_back(r);
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      queue.push({schedule[i].request_ts, EventType::kRenderRequest, i, seq++});
    }
  }

  Tracker tracker(fc.max_tracked, derive_seed(cfg.seed, kTracker));
  std::mt19937_64 render_rng(derive_seed(cfg.seed, kRenderNoise));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<PendingRender> renders;
  std::deque<Event> blocked;  // waiting for IMU coverage
  double imu_covered = window.empty() ? -1.0 : window.back().t;
  double nees_sum = 0.0;
  double chi2_dof_sum = 0.0;

  auto log_update = [&](double t, FeatureSource src, const UpdateReport& rep) {
    res.updates.push_back({t, src, rep});
    M.gated += static_cast<int>(rep.gates.size());
    M.gate_rejected += rep.features_rejected;
    for (const auto& g : rep.gates) chi2_dof_sum += g.chi2 / g.dof;
  };

  auto on_camera = [&](const CameraFrame& f) {
    const double tc = f.t - t_d;
    propagate_filter(fs, P, w.imu, tc, cfg.noise);
    clone_state(fs, P, tc);
    std::vector<FeatureTrack> ready = tracker.step(f, tc);
    if (fs.clones.size() >= fs.max_clones) {
      auto spanning = tracker.take_spanning(fs.clones.front().t);
      for (auto& t : spanning) ready.push_back(std::move(t));
    }
    std::erase_if(ready, [](const FeatureTrack& t) { return t.obs.size() < 2; });
    std::stable_sort(ready.begin(), ready.end(), [](const FeatureTrack& a, const FeatureTrack& b) {
      return a.obs.size() != b.obs.size() ? a.obs.size() > b.obs.size() : a.id < b.id;
    });
    if (static_cast<int>(ready.size()) > fc.max_update_features) ready.resize(fc.max_update_features);
    if (!ready.empty()) {
      const UpdateReport rep = captured_update(fs, P, ready, uopt);
      log_update(tc, FeatureSource::kCaptured, rep);
      if (rep.accepted) {
        ++M.captured_updates;
        M.captured_features_used += rep.features_used;
      }
    }
    if (fs.clones.size() >= fs.max_clones) marginalize(fs, P);

    const TruthState truth = evaluate_truth(spec, tc);
    res.est.push_back({tc, fs.imu.R_GtoI, fs.imu.p_I_in_G});
    res.gt.push_back({tc, truth.R_GtoI, truth.p_I_in_G});
    const std::size_t k = std::min<std::size_t>(w.truth.bg.size() - 1,
                                                static_cast<std::size_t>(std::lround(tc * spec.imu_rate)));
    nees_sum += imu_nees(fs, P, truth, w.truth.bg[k], w.truth.ba[k]);
    ++M.nees_samples;
  };

  auto on_render_request = [&](std::size_t i) {
    ++M.renders_requested;
    if (fs.clones.empty()) {
      ++M.renders_dropped;
      return;
    }
    const double cc = select_closest_clone(fs, schedule[i].request_ts);
    const CloneEntry& c = fs.clone_at(cc);
    const Pose T_G_C = camera_pose(c.R_GtoI, c.p_I_in_G, w.calib);
    PendingRender pr;
    pr.cc = cc;
    pr.frame = render_frame(w.map, fs.T_GW.inverse() * T_G_C, schedule[i].request_ts);
    renders.push_back(std::move(pr));
    queue.push({renders.back().frame.delivery_ts, EventType::kRenderDelivery, renders.size() - 1, seq++});
  };

  auto on_render_delivery = [&](std::size_t i) {
    PendingRender& pr = renders[i];
    if (!fs.find_clone(pr.cc)) {
      ++M.renders_dropped;
      pr.frame.image = ImagePlane();
      return;
    }
    ++M.renders_delivered;
    const TruthState truth = evaluate_truth(spec, pr.cc);
    const Pose T_W_C_true = camera_pose(truth, w.calib);
    const WorldImage captured = render_world(w.map, T_W_C_true);
    const CameraIntrinsics& cam = w.map.camera;
    const SsimGrid grid = ssim_grid(pr.frame.image, captured.image, fc.ssim);
    const int cells = fc.ssim.grid_cols * fc.ssim.grid_rows;
    M.cells_total += cells;
    for (int c = 0; c < cells; ++c) {
      if (grid.accepted[c]) ++M.cells_accepted;
      const CellRect r = grid_cell(cam.width, cam.height, fc.ssim.grid_cols, fc.ssim.grid_rows, c);
      int covered = 0;
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x) covered += captured.changed_mask[static_cast<std::size_t>(y) * cam.width + x];
      if (2 * covered >= (r.x1 - r.x0) * (r.y1 - r.y0)) {
        ++M.altered_cells;
        if (!grid.accepted[c]) ++M.altered_cells_rejected;
      }
    }

    // FAST corners inside accepted cells, associated to landmarks in view.
    struct Candidate {
      std::size_t id;
      double score;
      int x, y;
    };
    std::map<std::size_t, Candidate> best;
    for (const Corner& k : fast_detect(pr.frame.image, fc.fast_threshold)) {
      const int cell = grid_cell_of(cam.width, cam.height, fc.ssim.grid_cols, fc.ssim.grid_rows, k.x, k.y);
      if (cell < 0 || !grid.accepted[cell]) continue;
      const LandmarkView* match = nullptr;
      double best_d = fc.association_px;
      for (const auto& v : pr.frame.in_view) {
        const double d = (v.uv - Vec2(k.x, k.y)).norm();
        if (d <= best_d) {
          best_d = d;
          match = &v;
        }
      }
      if (!match) continue;
      auto it = best.find(match->id);
      if (it == best.end() || k.score > it->second.score) best[match->id] = {match->id, k.score, k.x, k.y};
    }
    std::vector<Candidate> cands;
    for (const auto& [id, c] : best) cands.push_back(c);
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    // Correspondence with the captured frame: the landmark must still exist
    // and be visible from the true camera.
    const Pose T_C_W_true = T_W_C_true.inverse();
    std::vector<FeatureTrack> tracks;
    for (const Candidate& c : cands) {
      if (static_cast<int>(tracks.size()) >= fc.max_rendered) break;
      if (w.map.is_changed(c.id)) continue;
      const Landmark& lm = w.map.landmarks[c.id];
      const Vec3 p_C = T_C_W_true * lm.p_W;
      if (p_C.z() <= 0.1) continue;
      Vec2 uv = cam.to_pixel(project(p_C));
      if (!cam.in_bounds(uv)) continue;
      if (!cfg.scenario.noise_free) {
        uv.x() += cfg.noise.sigma_r * n01(render_rng);
        uv.y() += cfg.noise.sigma_r * n01(render_rng);
      }
      const int cell = grid_cell_of(cam.width, cam.height, fc.ssim.grid_cols, fc.ssim.grid_rows, c.x, c.y);
      if (cell < 0 || !grid.accepted[cell]) ++M.rendered_from_rejected_cells;
      if (w.map.is_changed(c.id)) ++M.altered_features_used;
      FeatureTrack t;
      t.id = c.id;
      t.source = FeatureSource::kRendered;
      t.obs.push_back({pr.cc, uv});
      t.anchor_W = lm.p_W;
      t.anchor_known = true;
      tracks.push_back(std::move(t));
    }
    pr.frame.image = ImagePlane();  // release memory
    if (tracks.empty()) return;
    const UpdateReport rep = rendered_update(fs, P, tracks, uopt);
    log_update(pr.frame.delivery_ts, FeatureSource::kRendered, rep);
    if (rep.accepted) {
      ++M.rendered_updates;
      M.rendered_features_used += rep.features_used;
    }
  };

  auto dispatch = [&](const Event& e) {
    try {
      switch (e.type) {
        case EventType::kImu: break;
        case EventType::kCamera: on_camera(w.frames[e.index]); break;
        case EventType::kRenderRequest: on_render_request(e.index); break;
        case EventType::kRenderDelivery: on_render_delivery(e.index); break;
      }
    } catch (const Error& err) {
      rethrow_with_time(err, e.t);
    }
  };

  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    if (e.type == EventType::kImu) {
      imu_covered = std::max(imu_covered, e.t);
    } else if (!blocked.empty() || (e.type == EventType::kCamera && e.t - t_d > imu_covered)) {
      blocked.push_back(e);
    } else {
      dispatch(e);
    }
    // Anything waiting on IMU data runs in arrival order once covered.
    while (!blocked.empty()) {
      const Event& b = blocked.front();
      if (b.type == EventType::kCamera && b.t - t_d > imu_covered) break;
      const Event run = b;
      blocked.pop_front();
      dispatch(run);
    }
  }
  if (!blocked.empty()) {
    // Frames past the end of the IMU stream cannot be processed.
    blocked.clear();
  }

  // ---- metrics
  if (res.est.size() >= 2) {
    const AteResult ate = compute_ate(res.est, res.gt);
    M.ate_rot_deg = ate.rot_deg;
    M.ate_pos_m = ate.pos_m;
    M.final_pos_err_m = (res.est.back().p_I_in_G - res.gt.back().p_I_in_G).norm();
  }
  if (M.nees_samples) M.nees_mean = nees_sum / M.nees_samples;
  if (M.gated) M.chi2_per_dof_mean = chi2_dof_sum / M.gated;
  res.timing.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::json j;
  j["ate_rot_deg"] = m.ate_rot_deg;
  j["ate_pos_m"] = m.ate_pos_m;
  j["final_pos_err_m"] = m.final_pos_err_m;
  j["init_rot_deg"] = m.init_rot_deg;
  j["init_pos_cm"] = m.init_pos_cm;
  j["captured_updates"] = m.captured_updates;
  j["rendered_updates"] = m.rendered_updates;
  j["captured_features_used"] = m.captured_features_used;
  j["rendered_features_used"] = m.rendered_features_used;
  j["gated"] = m.gated;
  j["gate_rejected"] = m.gate_rejected;
  j["chi2_per_dof_mean"] = m.chi2_per_dof_mean;
  j["renders_requested"] = m.renders_requested;
  j["renders_delivered"] = m.renders_delivered;
  j["renders_dropped"] = m.renders_dropped;
  j["cells_total"] = m.cells_total;
  j["cells_accepted"] = m.cells_accepted;
  j["altered_cells"] = m.altered_cells;
  j["altered_cells_rejected"] = m.altered_cells_rejected;
  j["rendered_from_rejected_cells"] = m.rendered_from_rejected_cells;
  j["altered_features_used"] = m.altered_features_used;
  j["nees_mean"] = m.nees_mean;
  j["nees_samples"] = m.nees_samples;
  return j.dump(2) + "\n";
}

std::string timing_json(const RunTiming& t) {
  nlohmann::json j;
  j["init_latency_s"] = t.init_latency_s;
  j["wall_s"] = t.wall_s;
  return j.dump(2) + "\n";
}

void write_outputs(const RunResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  auto save = [&](const char* name, auto&& writer) {
    std::ostringstream os;
    writer(os);
    write_file((d / name).string(), os.str());
  };
  save("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, r.est); });
  save("groundtruth.csv", [&](std::ostream& os) { write_trajectory_csv(os, r.gt); });
  save("updates.csv", [&](std::ostream& os) { write_update_log(os, r.updates); });
  save("trajectory.dat", [&](std::ostream& os) { write_gnuplot_dat(os, r.est, r.gt); });
  write_file((d / "metrics.json").string(), metrics_json(r.metrics));
  write_file((d / "timing.json").string(), timing_json(r.timing));
}

InitRegion init_region_for(const ExperimentConfig& cfg) {
  const TrajectorySpec& t = cfg.scenario.trajectory;
  InitRegion r;
  r.radius = t.radius;
  r.height = t.height;
  r.phase = t.start_phase;
  r.phase_spread = t.phase_jitter + 0.2;
  return r;
}

std::vector<TrainSample> make_init_dataset(const MapModel& map, const Calibration& calib, const InitRegion& region,
                                           int n, std::uint64_t seed, int image_size) {
  if (n <= 0 || image_size <= 0) throw InvalidArgument("dataset size and image size must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<TrainSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = region.radius + region.radius_spread * u(rng);
    const double h = region.height + region.height_spread * u(rng);
    const double phi = region.phase + region.phase_spread * u(rng);
    const double yaw = phi + std::numbers::pi + region.yaw_spread * u(rng);
    const double pitch = std::atan2(h, r) + region.pitch_spread * u(rng);
    const Mat3 R_ItoG = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY())).toRotationMatrix();
    const Vec3 p(r * std::cos(phi), r * std::sin(phi), h);
    const Pose T_W_C = camera_pose(R_ItoG.transpose(), p, calib);
    out.push_back({preprocess(render(map, T_W_C), image_size, image_size), T_W_C});
  }
  return out;
}

InitTraining train_init_model(const ExperimentConfig& cfg, const InitTrainingOptions& opt) {
  const MapModel map = build_map(cfg);
  const Calibration calib = default_calibration();
  const InitRegion region = init_region_for(cfg);
  const int size = cfg.filter.init_image_size;
  const auto data = make_init_dataset(map, calib, region, opt.samples, derive_seed(opt.train.seed, 100), size);
  InitTraining out;
  out.held_out = make_init_dataset(map, calib, region, opt.validation, derive_seed(opt.train.seed, 101), size);
  MlpModel init = make_mlp(size, size, opt.hidden, opt.depth, opt.train.seed);
  init.metric = MetricParam(cfg.metric_a);
  out.result = train(data, opt.train, init);
  Vec6 ms = Vec6::Zero();
  for (const auto& s : out.held_out) ms += pose_error(relocalize(out.result.model, s.image), s.gt_pose).cwiseAbs2();
  out.result.model.validation_ms = ms / static_cast<double>(out.held_out.size());
  return out;
}

}  // namespace mapvio
