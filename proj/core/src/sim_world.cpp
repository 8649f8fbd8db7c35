#include "mapvio/sim_world.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

Mat3 rot_z(double a) {
  Mat3 R;
  R << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return R;
}

Mat3 rot_y(double a) {
  Mat3 R;
  R << std::cos(a), 0.0, std::sin(a), 0.0, 1.0, 0.0, -std::sin(a), 0.0, std::cos(a);
  return R;
}

struct Phase {
  double phi = 0.0, dphi = 0.0, ddphi = 0.0;
};

// Orbit angle with a quintic smoothstep ramp on the angular rate.
Phase orbit_phase(const TrajectorySpec& s, double t) {
  Phase p;
  p.phi = s.start_phase;
  const double tau = t - s.stationary_time;
  if (s.angular_rate == 0.0 || tau <= 0.0) return p;
  const double w = s.angular_rate;
  const double T = s.ramp_time;
  if (tau < T) {
    const double u = tau / T;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    p.phi += w * T * (2.5 * u4 - 3.0 * u4 * u + u4 * u2);
    p.dphi = w * (10.0 * u3 - 15.0 * u4 + 6.0 * u4 * u);
    p.ddphi = w * (30.0 * u2 - 60.0 * u3 + 30.0 * u4) / T;
  } else {
    p.phi += w * T * 0.5 + w * (tau - T);
    p.dphi = w;
  }
  return p;
}

}  // namespace

void TrajectorySpec::validate() const {
  if (!(radius > 0.0)) throw InvalidArgument("orbit radius must be positive");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  if (!(imu_rate > 0.0)) throw InvalidArgument("IMU rate must be positive");
  if (!(ramp_time > 0.0) || !(stationary_time >= 0.0)) throw InvalidArgument("invalid ramp timing");
  if (!(height > 0.0) || !(bob_amplitude >= 0.0) || bob_amplitude >= height) {
    throw InvalidArgument("height must stay above the table");
  }
  if (!std::isfinite(angular_rate) || !std::isfinite(start_phase) || !(phase_jitter >= 0.0)) {
    throw InvalidArgument("invalid orbit phase parameters");
  }
}

TrajectorySpec TrajectorySpec::resolved() const {
  TrajectorySpec s = *this;
  if (phase_jitter > 0.0) {
    std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    s.start_phase += phase_jitter * u(rng);
  }
  s.phase_jitter = 0.0;
  return s;
}

TruthState evaluate_truth(const TrajectorySpec& s, double t) {
  const Phase ph = orbit_phase(s, t);
  const double d = ph.phi - s.start_phase;
  const double r = s.radius;
  const double b = s.bob_amplitude;
  const double k = s.bob_cycles;
  const double m = s.wobble_cycles;

  const double z = s.height + b * std::sin(k * d);
  const double dz = b * k * std::cos(k * d) * ph.dphi;
  const double ddz = b * k * (std::cos(k * d) * ph.ddphi - k * std::sin(k * d) * ph.dphi * ph.dphi);

  const double c = std::cos(ph.phi), sn = std::sin(ph.phi);
  TruthState out;
  out.t = t;
  out.p_I_in_G = {r * c, r * sn, z};
  out.v_I_in_G = {-r * sn * ph.dphi, r * c * ph.dphi, dz};
  out.a_I_in_G = {-r * c * ph.dphi * ph.dphi - r * sn * ph.ddphi, -r * sn * ph.dphi * ph.dphi + r * c * ph.ddphi, ddz};

  const double psi = ph.phi + std::numbers::pi + s.yaw_wobble * std::sin(m * d);
  const double dpsi = ph.dphi * (1.0 + s.yaw_wobble * m * std::cos(m * d));
  const double theta = std::atan2(z, r);
  const double dtheta = r * dz / (r * r + z * z);
  const Mat3 Ry = rot_y(theta);
  out.R_GtoI = (rot_z(psi) * Ry).transpose();
  out.omega_I = Ry.transpose() * Vec3::UnitZ() * dpsi + Vec3::UnitY() * dtheta;
  return out;
}

GroundTruth generate_truth(const TrajectorySpec& spec) {
  spec.validate();
  GroundTruth gt;
  gt.spec = spec.resolved();
  const long n = static_cast<long>(std::ceil(spec.duration * spec.imu_rate)) + 1;
  gt.samples.reserve(n + 1);
  for (long k = 0; k <= n; ++k) gt.samples.push_back(evaluate_truth(gt.spec, static_cast<double>(k) / spec.imu_rate));
  gt.bg.assign(gt.samples.size(), Vec3::Zero());
  gt.ba.assign(gt.samples.size(), Vec3::Zero());
  return gt;
}

std::vector<ImuSample> synthesize_imu(GroundTruth& gt, const NoiseParams& noise, std::uint64_t seed,
                                      const ImuSynthOptions& opt) {
  noise.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto draw = [&] { return Vec3(n01(rng), n01(rng), n01(rng)); };

  const double dt = 1.0 / gt.spec.imu_rate;
  const double sg = noise.sigma_g / std::sqrt(dt);
  const double sa = noise.sigma_a / std::sqrt(dt);
  const double swg = noise.sigma_wg * std::sqrt(dt);
  const double swa = noise.sigma_wa * std::sqrt(dt);

  Vec3 bg = opt.bg0;
  Vec3 ba = opt.ba0;
  std::vector<ImuSample> out;
  out.reserve(gt.samples.size());
  gt.bg.resize(gt.samples.size());
  gt.ba.resize(gt.samples.size());
  for (std::size_t k = 0; k < gt.samples.size(); ++k) {
    const TruthState& s = gt.samples[k];
    gt.bg[k] = bg;
    gt.ba[k] = ba;
    ImuSample m;
    m.t = s.t;
    m.omega_m = s.omega_I + bg;
    m.accel_m = s.R_GtoI * (s.a_I_in_G - opt.gravity) + ba;
    if (opt.white_noise) {
      m.omega_m += sg * draw();
      m.accel_m += sa * draw();
    }
    if (opt.bias_walk) {
      bg += swg * draw();
      ba += swa * draw();
    }
    out.push_back(m);
  }
  return out;
}

Calibration default_calibration() {
  Calibration c;
  c.R_ItoC << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  const Vec3 p_C_in_I(0.05, 0.0, 0.02);
  c.p_I_in_C = -c.R_ItoC * p_C_in_I;
  return c;
}

Pose camera_pose(const Mat3& R_GtoI, const Vec3& p_I_in_G, const Calibration& calib) {
  const Mat3 R_CtoG = R_GtoI.transpose() * calib.R_ItoC.transpose();
  const Vec3 p_C_in_I = -calib.R_ItoC.transpose() * calib.p_I_in_C;
  return {R_CtoG, p_I_in_G + R_GtoI.transpose() * p_C_in_I};
}

std::vector<CameraFrame> synthesize_camera(const GroundTruth& gt, const std::vector<Landmark>& landmarks,
                                           const CameraIntrinsics& cam, const Calibration& calib,
                                           std::uint64_t seed, const CameraSynthOptions& opt) {
  if (!(opt.rate > 0.0)) throw InvalidArgument("camera rate must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<CameraFrame> frames;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) / opt.rate;
    if (!(t < gt.spec.duration)) break;
    const TruthState s = evaluate_truth(gt.spec, t - opt.t_d);
    CameraFrame f;
    f.t = t;
    for (const auto& lm : landmarks) {
      const Vec3 p_C = calib.R_ItoC * s.R_GtoI * (lm.p_W - s.p_I_in_G) + calib.p_I_in_C;
      if (p_C.z() <= 0.1) continue;
      const Vec2 uv = cam.to_pixel(project(p_C));
      if (!cam.in_bounds(uv)) continue;
      FeatureObservation o{lm.id, uv};
      if (opt.noise) {
        o.uv.x() += opt.sigma_px * n01(rng);
        o.uv.y() += opt.sigma_px * n01(rng);
      }
      f.obs.push_back(o);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<Landmark> generate_landmarks(const SceneGeometry& scene, std::uint64_t seed, const LandmarkLayout& layout) {
  if (layout.table < 0 || layout.wall < 0) throw InvalidArgument("landmark counts must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<Landmark> out;
  const double h = scene.table_half - 0.02;
  for (int i = 0; i < layout.table; ++i) {
    Landmark lm;
    lm.id = out.size();
    lm.p_W = {uniform(-h, h), uniform(-h, h), 0.0};
    lm.amplitude = uniform(layout.amplitude_min, layout.amplitude_max);
    lm.sigma_px = layout.sigma_px;
    out.push_back(lm);
  }
  const double D = scene.wall_dist;
  for (int i = 0; i < layout.wall; ++i) {
    Landmark lm;
    lm.id = out.size();
    const double along = uniform(-D + 0.3, D - 0.3);
    const double z = uniform(0.1, 1.0);
    switch (i % 4) {
      case 0: lm.p_W = {D, along, z}; break;
      case 1: lm.p_W = {-D, along, z}; break;
      case 2: lm.p_W = {along, D, z}; break;
      default: lm.p_W = {along, -D, z}; break;
    }
    lm.amplitude = uniform(layout.amplitude_min, layout.amplitude_max);
    lm.sigma_px = layout.sigma_px;
    out.push_back(lm);
  }
  return out;
}

std::vector<std::size_t> landmarks_in_region(const std::vector<Landmark>& lms, double x0, double x1, double y0,
                                             double y1) {
  std::vector<std::size_t> ids;
  for (const auto& lm : lms) {
    if (lm.p_W.z() == 0.0 && lm.p_W.x() >= x0 && lm.p_W.x() <= x1 && lm.p_W.y() >= y0 && lm.p_W.y() <= y1) {
      ids.push_back(lm.id);
    }
  }
  return ids;
}

}  // namespace mapvio
