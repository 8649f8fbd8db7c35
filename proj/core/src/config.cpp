#include "mapvio/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mapvio/error.hpp"

namespace mapvio {

using nlohmann::json;

const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::kGroundTruth: return "ground-truth";
    case InitMode::kLearned: return "learned";
    case InitMode::kPerturbed: return "perturbed";
  }
  return "?";
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "ground-truth") return InitMode::kGroundTruth;
  if (s == "learned") return InitMode::kLearned;
  if (s == "perturbed") return InitMode::kPerturbed;
  throw InvalidArgument("unknown init mode '" + s + "'");
}

namespace {

// Reads fields from a JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw FormatError(where() + " must be an object");
  }

  template <typename T>
  void field(const char* key, T& v) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      v = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw FormatError("bad value for " + path_ + key);
    }
  }

  void field(const char* key, double& v) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_number()) throw FormatError("bad value for " + path_ + key);
    v = j_.at(key).get<double>();
  }

  void field(const char* key, std::uint64_t& v) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_number_unsigned()) throw FormatError("bad value for " + path_ + key);
    v = j_.at(key).get<std::uint64_t>();
  }

  void field(const char* key, InitMode& v) {
    std::string s = to_string(v);
    field(key, s);
    try {
      v = init_mode_from_string(s);
    } catch (const InvalidArgument& e) {
      throw FormatError(path_ + key + ": " + e.what());
    }
  }

  void field(const char* key, Vec3& v) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array() || a.size() != 3) throw FormatError(path_ + key + " must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!a[i].is_number()) throw FormatError(path_ + key + " must be an array of 3 numbers");
      v[i] = a[i].get<double>();
    }
  }

  void field(const char* key, double (&v)[4]) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array() || a.size() != 4) throw FormatError(path_ + key + " must be an array of 4 numbers");
    for (int i = 0; i < 4; ++i) {
      if (!a[i].is_number()) throw FormatError(path_ + key + " must be an array of 4 numbers");
      v[i] = a[i].get<double>();
    }
  }

  template <typename F>
  void object(const char* key, F&& body) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), path_ + key + ".");
    body(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!known_.count(item.key())) throw FormatError("unknown key " + path_ + item.key());
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_.substr(0, path_.size() - 1); }

  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <typename T>
  void field(const char* key, T& v) {
    j_[key] = v;
  }
  void field(const char* key, InitMode& v) { j_[key] = to_string(v); }
  void field(const char* key, Vec3& v) { j_[key] = {v.x(), v.y(), v.z()}; }
  void field(const char* key, double (&v)[4]) { j_[key] = {v[0], v[1], v[2], v[3]}; }

  template <typename F>
  void object(const char* key, F&& body) {
    json sub;
    Writer w(sub);
    body(w);
    j_[key] = std::move(sub);
  }

 private:
  json& j_;
};

template <typename V>
void visit(V& v, ExperimentConfig& c) {
  v.object("scenario", [&](V& s) {
    ScenarioConfig& sc = c.scenario;
    s.object("trajectory", [&](V& t) {
      TrajectorySpec& tr = sc.trajectory;
      t.field("radius", tr.radius);
      t.field("height", tr.height);
      t.field("angular_rate", tr.angular_rate);
      t.field("bob_amplitude", tr.bob_amplitude);
      t.field("bob_cycles", tr.bob_cycles);
      t.field("yaw_wobble", tr.yaw_wobble);
      t.field("wobble_cycles", tr.wobble_cycles);
      t.field("stationary_time", tr.stationary_time);
      t.field("ramp_time", tr.ramp_time);
      t.field("start_phase", tr.start_phase);
      t.field("phase_jitter", tr.phase_jitter);
      t.field("duration", tr.duration);
      t.field("imu_rate", tr.imu_rate);
    });
    s.field("camera_rate", sc.camera_rate);
    s.field("render_rate", sc.render_rate);
    s.field("render_latency", sc.render_latency);
    s.field("world_seed", sc.world_seed);
    s.object("landmarks", [&](V& l) {
      l.field("table", sc.landmarks.table);
      l.field("wall", sc.landmarks.wall);
      l.field("amplitude_min", sc.landmarks.amplitude_min);
      l.field("amplitude_max", sc.landmarks.amplitude_max);
      l.field("sigma_px", sc.landmarks.sigma_px);
    });
    s.field("environment_change", sc.environment_change);
    s.field("change_region", sc.change_region);
    s.field("bias_g0_sigma", sc.bias_g0_sigma);
    s.field("bias_a0_sigma", sc.bias_a0_sigma);
    s.field("noise_free", sc.noise_free);
  });
  v.object("noise", [&](V& n) {
    n.field("sigma_g", c.noise.sigma_g);
    n.field("sigma_wg", c.noise.sigma_wg);
    n.field("sigma_a", c.noise.sigma_a);
    n.field("sigma_wa", c.noise.sigma_wa);
    n.field("sigma_px", c.noise.sigma_px);
    n.field("sigma_r", c.noise.sigma_r);
  });
  v.object("filter", [&](V& f) {
    FilterConfig& fc = c.filter;
    f.field("map_updates", fc.map_updates);
    f.field("init_mode", fc.init_mode);
    f.field("init_model", fc.init_model);
    f.field("perturb_deg", fc.perturb_deg);
    f.field("perturb_m", fc.perturb_m);
    f.field("max_clones", fc.max_clones);
    f.field("max_tracked", fc.max_tracked);
    f.field("max_update_features", fc.max_update_features);
    f.field("max_rendered", fc.max_rendered);
    f.field("chi2_probability", fc.chi2_probability);
    f.field("fast_threshold", fc.fast_threshold);
    f.field("association_px", fc.association_px);
    f.object("ssim", [&](V& s) {
      s.field("grid_cols", fc.ssim.grid_cols);
      s.field("grid_rows", fc.ssim.grid_rows);
      s.field("threshold", fc.ssim.threshold);
      s.field("k1", fc.ssim.k1);
      s.field("k2", fc.ssim.k2);
      s.field("dynamic_range", fc.ssim.dynamic_range);
      s.field("window", fc.ssim.window);
      s.field("window_sigma", fc.ssim.window_sigma);
    });
    f.field("init_image_size", fc.init_image_size);
    f.field("sigma_theta0", fc.sigma_theta0);
    f.field("sigma_p0", fc.sigma_p0);
    f.field("sigma_v0", fc.sigma_v0);
    f.field("sigma_bg0", fc.sigma_bg0);
    f.field("sigma_ba0", fc.sigma_ba0);
  });
  v.field("metric_a", c.metric_a);
  v.field("seed", c.seed);
  v.field("output_dir", c.output_dir);
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("invalid config: ") + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.trajectory.validate();
  noise.validate();
  require(scenario.camera_rate > 0.0 && scenario.render_rate > 0.0, "rates must be positive");
  require(scenario.render_rate <= scenario.camera_rate, "render rate must not exceed the camera rate");
  require(scenario.render_latency >= 0.0, "render latency must be non-negative");
  require(scenario.trajectory.imu_rate >= scenario.camera_rate, "IMU rate must be at least the camera rate");
  require(scenario.landmarks.table >= 0 && scenario.landmarks.wall >= 0, "landmark counts");
  require(scenario.landmarks.sigma_px > 0.0 && scenario.landmarks.amplitude_min >= 0.0 &&
              scenario.landmarks.amplitude_max >= scenario.landmarks.amplitude_min,
          "landmark appearance");
  require(scenario.change_region[0] <= scenario.change_region[1] && scenario.change_region[2] <= scenario.change_region[3],
          "change region");
  require(scenario.bias_g0_sigma >= 0.0 && scenario.bias_a0_sigma >= 0.0, "initial bias spread");
  require(filter.max_clones >= 2, "max_clones must be at least 2");
  require(filter.max_tracked > 0 && filter.max_update_features > 0 && filter.max_rendered >= 0, "feature limits");
  require(filter.chi2_probability > 0.0 && filter.chi2_probability < 1.0, "chi2_probability in (0, 1)");
  require(filter.fast_threshold > 0.0 && filter.association_px > 0.0, "detector thresholds");
  require(filter.ssim.grid_cols > 0 && filter.ssim.grid_rows > 0 && filter.ssim.window > 0, "SSIM grid");
  require(filter.init_image_size > 0, "init image size");
  require(filter.perturb_deg >= 0.0 && filter.perturb_m >= 0.0, "perturbation");
  require(filter.sigma_theta0 > 0.0 && filter.sigma_p0 > 0.0 && filter.sigma_v0 > 0.0 && filter.sigma_bg0 > 0.0 &&
              filter.sigma_ba0 > 0.0,
          "initial standard deviations must be positive");
  require(metric_a.allFinite() && metric_a.norm() < 1.0, "metric_a must have norm below 1");
  require(scenario.trajectory.duration > scenario.trajectory.stationary_time, "duration must exceed the stationary start");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Reader r(j, "");
  visit(r, cfg);
  r.finish();
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  ExperimentConfig copy = cfg;
  Writer w(j);
  visit(w, copy);
  return j.dump(2) + "\n";
}

}  // namespace mapvio
