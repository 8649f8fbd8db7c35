#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mapvio/image.hpp"
#include "mapvio/msckf.hpp"
#include "mapvio/se3.hpp"

namespace mapvio {

/// A map point drawn as a Gaussian blob of fixed pixel width.
struct Landmark {
  std::size_t id = 0;
  Vec3 p_W = Vec3::Zero();
  double amplitude = 0.4;  // added intensity at the blob centre
  double sigma_px = 1.8;
};

/// Static room geometry: an infinite ground plane z = 0 carrying a square
/// tablecloth of side 2 * table_half, and four walls at |x| = wall_dist and
/// |y| = wall_dist.
struct SceneGeometry {
  double table_half = 0.5;
  double wall_dist = 3.0;
};

/// Prior-map oracle. Poses passed to the renderer are camera poses in the map
/// frame (x_W = T_W_C * x_C).
struct MapModel {
  std::vector<Landmark> landmarks;
  CameraIntrinsics camera;
  SceneGeometry scene;
  double latency = 0.2;  // s
  /// Landmarks that no longer exist in the real world. The real world shows a
  /// white board covering their bounding box (grown by change_margin).
  std::vector<std::size_t> changed;
  double change_margin = 0.06;  // m

  void validate() const;
  /// Same map at a different resolution (intrinsics and blob widths scaled).
  MapModel scaled(double s) const;
  bool is_changed(std::size_t id) const;
};

struct LandmarkView {
  std::size_t id = 0;
  Vec2 uv = Vec2::Zero();
  double depth = 0.0;
};

/// Landmarks with depth > 0.1 m that project inside the image.
std::vector<LandmarkView> landmarks_in_view(const MapModel& map, const Pose& T_W_C, bool skip_changed = false);

/// Background-only image (no landmark blobs).
ImagePlane render_background(const MapModel& map, const Pose& T_W_C);
/// Map-side rendering: background plus every landmark blob.
ImagePlane render(const MapModel& map, const Pose& T_W_C);

struct WorldImage {
  ImagePlane image;
  std::vector<std::uint8_t> changed_mask;  // 1 where the white board is visible
};
/// The real world as a camera sees it: changed landmarks are gone and the
/// white board is drawn over their region.
WorldImage render_world(const MapModel& map, const Pose& T_W_C);

struct RenderedFrame {
  double request_ts = 0.0;
  double delivery_ts = 0.0;
  Pose pose_used;  // T_W_C
  ImagePlane image;
  std::vector<LandmarkView> in_view;
};

/// render() wrapped with timing metadata: delivery_ts = request_ts + latency.
RenderedFrame render_frame(const MapModel& map, const Pose& T_W_C, double request_ts);

struct RenderEvent {
  double request_ts = 0.0;
  double delivery_ts = 0.0;
};

/// Requests at k / render_rate for k / render_rate < horizon. Throws
/// InvalidArgument for non-positive rates, negative latency or a render rate
/// above the camera rate.
std::vector<RenderEvent> schedule_renders(double camera_rate, double render_rate, double latency, double horizon);

}  // namespace mapvio
