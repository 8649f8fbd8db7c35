#include "mapvio/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinViewDepth = 0.1;
constexpr double kBoardIntensity = 0.97;
constexpr double kSkyIntensity = 0.5;

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

double cloth(double x, double y) {
  return 0.42 + 0.05 * std::sin(kTwoPi * x / 0.31 + 0.4) * std::cos(kTwoPi * y / 0.23) +
         0.03 * std::sin(kTwoPi * (x + y) / 0.17);
}

double surround(double x, double y) { return 0.24 + 0.03 * std::sin(kTwoPi * x / 0.53) * std::sin(kTwoPi * y / 0.47); }

double wall(double s, double z) {
  const double rise = smoothstep(z / 0.4);
  return 0.24 + rise * (0.2 + 0.04 * std::sin(kTwoPi * s / 0.7) * std::cos(kTwoPi * z / 0.6));
}

struct Hit {
  Vec3 point = Vec3::Zero();
  double intensity = kSkyIntensity;
  bool valid = false;
};

Hit cast(const SceneGeometry& scene, const Vec3& o, const Vec3& d) {
  double best = std::numeric_limits<double>::infinity();
  int surface = -1;
  if (d.z() < 0.0 && o.z() > 0.0) {
    best = -o.z() / d.z();
    surface = 0;
  }
  const double D = scene.wall_dist;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) continue;
    const double target = d[axis] > 0.0 ? D : -D;
    const double t = (target - o[axis]) / d[axis];
    if (t > 0.0 && t < best) {
      best = t;
      surface = 1 + axis;
    }
  }
  Hit h;
  if (surface < 0) return h;
  h.valid = true;
  h.point = o + best * d;
  const Vec3& X = h.point;
  if (surface == 0) {
    const double band = 0.02;
    const double w = smoothstep((scene.table_half - std::abs(X.x())) / band + 0.5) *
                     smoothstep((scene.table_half - std::abs(X.y())) / band + 0.5);
    h.intensity = w * cloth(X.x(), X.y()) + (1.0 - w) * surround(X.x(), X.y());
  } else {
    const double s = surface == 1 ? X.y() : X.x();
    h.intensity = wall(s, X.z());
  }
  return h;
}

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool active = false;
  bool contains(const Vec3& p) const { return active && (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

Box change_box(const MapModel& map) {
  Box b;
  for (const auto& lm : map.landmarks) {
    if (!map.is_changed(lm.id)) continue;
    if (!b.active) {
      b.lo = b.hi = lm.p_W;
      b.active = true;
    } else {
      b.lo = b.lo.cwiseMin(lm.p_W);
      b.hi = b.hi.cwiseMax(lm.p_W);
    }
  }
  b.lo.array() -= map.change_margin;
  b.hi.array() += map.change_margin;
  return b;
}

// Background pass; optionally paints the change box and records its mask.
ImagePlane background(const MapModel& map, const Pose& T_W_C, const Box* board, std::vector<std::uint8_t>* mask) {
  const CameraIntrinsics& cam = map.camera;
  ImagePlane img(cam.width, cam.height);
  if (mask) mask->assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
  const Vec3& o = T_W_C.translation;
  const Mat3& R = T_W_C.rotation;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 d = R * Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const Hit h = cast(map.scene, o, d);
      double value = h.intensity;
      if (board && h.valid && board->contains(h.point)) {
        value = kBoardIntensity;
        (*mask)[static_cast<std::size_t>(v) * cam.width + u] = 1;
      }
      img(u, v) = value;
    }
  }
  return img;
}

void splat(ImagePlane& img, const MapModel& map, const Pose& T_W_C, bool skip_changed) {
  const CameraIntrinsics& cam = map.camera;
  const Pose T_C_W = T_W_C.inverse();
  for (const auto& lm : map.landmarks) {
    if (skip_changed && map.is_changed(lm.id)) continue;
    const Vec3 p = T_C_W * lm.p_W;
    if (p.z() <= kMinViewDepth) continue;
    const Vec2 uv = cam.to_pixel(project(p));
    const double s = lm.sigma_px;
    const int r = static_cast<int>(std::ceil(4.0 * s));
    const int u0 = static_cast<int>(std::floor(uv.x())) - r;
    const int v0 = static_cast<int>(std::floor(uv.y())) - r;
    const double inv = 1.0 / (2.0 * s * s);
    for (int v = std::max(0, v0); v <= std::min(cam.height - 1, v0 + 2 * r + 1); ++v) {
      for (int u = std::max(0, u0); u <= std::min(cam.width - 1, u0 + 2 * r + 1); ++u) {
        const double du = u - uv.x();
        const double dv = v - uv.y();
        img(u, v) += lm.amplitude * std::exp(-(du * du + dv * dv) * inv);
      }
    }
  }
  for (double& x : img.data()) x = std::clamp(x, 0.0, 1.0);
}

}  // namespace

void MapModel::validate() const {
  camera.validate();
  if (!(latency >= 0.0)) throw InvalidArgument("render latency must be non-negative");
  if (!(change_margin >= 0.0)) throw InvalidArgument("change margin must be non-negative");
  if (!(scene.table_half > 0.0) || !(scene.wall_dist > scene.table_half)) {
    throw InvalidArgument("invalid scene geometry");
  }
  for (const auto& lm : landmarks) {
    if (!lm.p_W.allFinite() || !(lm.sigma_px > 0.0) || !(lm.amplitude >= 0.0)) {
      throw InvalidArgument("invalid landmark " + std::to_string(lm.id));
    }
  }
}

MapModel MapModel::scaled(double s) const {
  if (!(s > 0.0)) throw InvalidArgument("scale must be positive");
  MapModel m = *this;
  m.camera.width = std::max(1, static_cast<int>(std::lround(camera.width * s)));
  m.camera.height = std::max(1, static_cast<int>(std::lround(camera.height * s)));
  m.camera.fx = camera.fx * s;
  m.camera.fy = camera.fy * s;
  m.camera.cx = (camera.cx + 0.5) * s - 0.5;
  m.camera.cy = (camera.cy + 0.5) * s - 0.5;
  for (auto& lm : m.landmarks) lm.sigma_px *= s;
  return m;
}

bool MapModel::is_changed(std::size_t id) const { return std::find(changed.begin(), changed.end(), id) != changed.end(); }

std::vector<LandmarkView> landmarks_in_view(const MapModel& map, const Pose& T_W_C, bool skip_changed) {
  std::vector<LandmarkView> out;
  const Pose T_C_W = T_W_C.inverse();
  for (const auto& lm : map.landmarks) {
    if (skip_changed && map.is_changed(lm.id)) continue;
    const Vec3 p = T_C_W * lm.p_W;
    if (p.z() <= kMinViewDepth) continue;
    const Vec2 uv = map.camera.to_pixel(project(p));
    if (map.camera.in_bounds(uv)) out.push_back({lm.id, uv, p.z()});
  }
  return out;
}

ImagePlane render_background(const MapModel& map, const Pose& T_W_C) {
  return background(map, T_W_C, nullptr, nullptr);
}

ImagePlane render(const MapModel& map, const Pose& T_W_C) {
  ImagePlane img = background(map, T_W_C, nullptr, nullptr);
  splat(img, map, T_W_C, false);
  return img;
}

WorldImage render_world(const MapModel& map, const Pose& T_W_C) {
  WorldImage out;
  const Box board = change_box(map);
  out.image = background(map, T_W_C, &board, &out.changed_mask);
  splat(out.image, map, T_W_C, true);
  return out;
}

RenderedFrame render_frame(const MapModel& map, const Pose& T_W_C, double request_ts) {
  RenderedFrame f;
  f.request_ts = request_ts;
  f.delivery_ts = request_ts + map.latency;
  f.pose_used = T_W_C;
  f.image = render(map, T_W_C);
  f.in_view = landmarks_in_view(map, T_W_C);
  return f;
}

std::vector<RenderEvent> schedule_renders(double camera_rate, double render_rate, double latency, double horizon) {
  if (!(camera_rate > 0.0) || !(render_rate > 0.0)) throw InvalidArgument("rates must be positive");
  if (render_rate > camera_rate) throw InvalidArgument("render rate must not exceed the camera rate");
  if (!(latency >= 0.0)) throw InvalidArgument("latency must be non-negative");
  std::vector<RenderEvent> out;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) / render_rate;
    if (!(t < horizon)) break;
    out.push_back({t, t + latency});
  }
  return out;
}

}  // namespace mapvio
