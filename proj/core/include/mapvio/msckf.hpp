#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mapvio/filter_state.hpp"

namespace mapvio {

/// Pinhole intrinsics; pixel (u, v) = (fx x + cx, fy y + cy) for normalized (x, y).
struct CameraIntrinsics {
  int width = 320;
  int height = 240;
  double fx = 250.0;
  double fy = 250.0;
  double cx = 159.5;
  double cy = 119.5;

  Vec2 to_normalized(const Vec2& uv) const { return {(uv.x() - cx) / fx, (uv.y() - cy) / fy}; }
  Vec2 to_pixel(const Vec2& xy) const { return {fx * xy.x() + cx, fy * xy.y() + cy}; }
  /// Pixel centres span [0, width-1] x [0, height-1].
  bool in_bounds(const Vec2& uv) const {
    return uv.x() >= -0.5 && uv.y() >= -0.5 && uv.x() <= width - 0.5 && uv.y() <= height - 0.5;
  }
  void validate() const;
};

/// Minimum depth accepted by the perspective model.
inline constexpr double kMinDepth = 1e-6;

/// Pi([x y z]) = [x/z, y/z]; throws InvalidArgument when z <= kMinDepth.
Vec2 project(const Vec3& p_C);
Mat23 jacobian_project(const Vec3& p_C);

/// p_C = R_ItoC R_GtoI(clone) (p_G - p_I(clone)) + p_I_in_C for the clone
/// stamped clone_ts. Throws InvalidArgument when the clone is missing.
Vec3 transform_to_camera(const FilterState& fs, double clone_ts, const Vec3& p_G);

enum class FeatureSource { kCaptured, kRendered };

struct Observation {
  double t = 0.0;  // clone (camera) timestamp
  Vec2 uv = Vec2::Zero();
};

struct FeatureTrack {
  std::size_t id = 0;
  FeatureSource source = FeatureSource::kCaptured;
  std::vector<Observation> obs;
  /// Rendered tracks: landmark position in the map frame W.
  std::optional<Vec3> anchor_W;
  /// True when anchor_W comes from the map itself rather than triangulation.
  bool anchor_known = false;
};

/// A camera looking at the scene: p_C = R_GtoC (p_G - p_C_in_G).
struct CameraView {
  Mat3 R_GtoC = Mat3::Identity();
  Vec3 p_C_in_G = Vec3::Zero();
  Vec2 xy = Vec2::Zero();  // normalized image coordinates
};

struct TriangulationOptions {
  double min_baseline = 0.01;        // m
  double min_parallax_deg = 0.2;     // largest ray angle must exceed this
  int max_iterations = 20;
  double step_tolerance = 1e-8;      // m
  double max_rms_normalized = 0.02;  // reprojection RMS gate
};

/// Gauss-Newton reprojection-error minimisation seeded by a linear solution.
/// Throws NumericalError on insufficient baseline/parallax or divergence.
Vec3 triangulate(const std::vector<CameraView>& views, const TriangulationOptions& opt = {});
/// Views of `track` through the state's clones (observations without a clone
/// are skipped). When to_map is set, views are expressed in W via T_GW.
std::vector<CameraView> track_views(const FeatureTrack& track, const FilterState& fs,
                                    const CameraIntrinsics& cam, bool to_map = false);
Vec3 triangulate(const FeatureTrack& track, const FilterState& fs, const CameraIntrinsics& cam,
                 const TriangulationOptions& opt = {});

struct GateRecord {
  std::size_t id = 0;
  int dof = 0;
  double chi2 = 0.0;
  bool accepted = false;
};

struct UpdateReport {
  int residual_dim = 0;
  double chi2 = 0.0;
  bool accepted = false;
  double post_residual_norm = 0.0;  // whitened (pixel-scale) units
  int features_used = 0;
  int features_rejected = 0;
  int features_failed = 0;  // triangulation or geometry failures
  std::vector<GateRecord> gates;
};

struct UpdateOptions {
  CameraIntrinsics camera;
  double sigma_px = 1.0;
  double sigma_r = 1.0;
  double chi2_probability = 0.95;
  TriangulationOptions triangulation;
};

/// Left null space of Hf (rows x 3, rows > 3) from a full Householder QR.
Eigen::MatrixXd left_nullspace(const Eigen::MatrixXd& Hf);

/// Whitened linear system of one feature before or after projection.
struct LinearizedFeature {
  Eigen::MatrixXd Hx;
  Eigen::MatrixXd Hf;
  Eigen::VectorXd r;
};

/// Stacked residual/Jacobians of a captured track about p_G (whitened by sigma_px).
LinearizedFeature linearize_captured(const FeatureTrack& track, const FilterState& fs, const Vec3& p_G,
                                     const UpdateOptions& opt);
/// Stacked residual/Jacobians of a rendered track anchored at p_W; the noise
/// of every observation is inflated with sigma_init before whitening.
LinearizedFeature linearize_rendered(const FeatureTrack& track, const FilterState& fs, const Vec3& p_W,
                                     const UpdateOptions& opt);

/// 95% (or other) chi-square quantile for `dof` degrees of freedom.
double chi2_quantile(int dof, double probability = 0.95);

/// EKF update for a whitened system (unit measurement noise). Rows beyond the
/// state dimension are compressed with a QR first. Joseph-form covariance.
/// Returns the applied correction.
Eigen::VectorXd ekf_update(FilterState& fs, Covariance& P, const Eigen::MatrixXd& H, const Eigen::VectorXd& r);

/// MSCKF update with captured tracks: triangulate, linearize, project onto the
/// left null space of Hf, chi-square gate, stack, update.
UpdateReport captured_update(FilterState& fs, Covariance& P, const std::vector<FeatureTrack>& tracks,
                             const UpdateOptions& opt);

/// Clone closest in time to `render_start_ts`; ties go to the earlier clone.
/// Throws InvalidArgument when the window is empty.
double select_closest_clone(const FilterState& fs, double render_start_ts);

struct InflatedNoise {
  Mat2 cov = Mat2::Zero();
  bool repaired = false;  // eigenvalues were floored after symmetrisation
};

/// R' = R + [J_theta J_p] Sigma_init [J_theta J_p]^T. Throws InvalidArgument
/// when Sigma_init is not symmetric PSD.
InflatedNoise inflate_noise(const Mat2& base_cov, const Mat23& J_theta, const Mat23& J_p, const Mat6& sigma_init);

/// Update with prior-map features. Tracks with a known map anchor contribute
/// their residuals directly (the map point is a fixed reference); tracks with a
/// triangulated anchor are projected onto the left null space of Hf like
/// captured tracks. Noise is inflated by the initialization covariance.
UpdateReport rendered_update(FilterState& fs, Covariance& P, const std::vector<FeatureTrack>& tracks,
                             const UpdateOptions& opt);

}  // namespace mapvio
