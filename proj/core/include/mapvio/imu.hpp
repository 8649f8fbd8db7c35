#pragma once

#include <vector>

#include "mapvio/se3.hpp"

namespace mapvio {

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Gravitational acceleration in the global frame (+z up).
inline const Vec3 kDefaultGravity{0.0, 0.0, -9.81};

struct ImuSample {
  double t = 0.0;      // s
  Vec3 omega_m = Vec3::Zero();  // rad/s
  Vec3 accel_m = Vec3::Zero();  // m/s^2, specific force
};

/// Linear interpolation of two samples at time t (t may equal either end).
ImuSample interpolate(const ImuSample& a, const ImuSample& b, double t);

/// Inertial state. The attitude is stored as the rotation taking global
/// coordinates into the IMU frame, the matrix of the JPL quaternion q_GtoI.
struct ImuState {
  double t = 0.0;
  Mat3 R_GtoI = Mat3::Identity();
  Vec3 p_I_in_G = Vec3::Zero();
  Vec3 v_I_in_G = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
  Vec3 ba = Vec3::Zero();

  UnitQuaternion q_GtoI() const { return rot_to_quat(R_GtoI); }
  /// Pose of the IMU as the map from G coordinates to I coordinates.
  Pose T_G_to_I() const { return {R_GtoI, -R_GtoI * p_I_in_G}; }
};

/// Continuous-time noise densities plus the visual measurement noise.
struct NoiseParams {
  double sigma_g = 1.6968e-4;   // gyro white noise, rad/s/sqrt(Hz)
  double sigma_wg = 1.9393e-5;  // gyro bias random walk, rad/s^2/sqrt(Hz)
  double sigma_a = 2.0e-3;      // accel white noise, m/s^2/sqrt(Hz)
  double sigma_wa = 3.0e-3;     // accel bias random walk, m/s^3/sqrt(Hz)
  double sigma_px = 1.0;        // captured feature pixel noise
  double sigma_r = 1.0;         // rendered feature pixel noise

  /// Throws InvalidArgument unless every density is positive and finite.
  void validate() const;
  /// diag(sigma_g^2 I, sigma_wg^2 I, sigma_a^2 I, sigma_wa^2 I), noise order
  /// [n_g, n_wg, n_a, n_wa].
  Mat12 continuous_q() const;
};

/// Measurement model: omega_m = omega + bg + n_g,
///                    accel_m = R_GtoI (a_G - gravity) + ba + n_a.
/// Kinematics use the bias-corrected readings and are integrated with RK4
/// over the interval [a.t, b.t] with linearly interpolated measurements.
/// The returned state carries time b.t. Throws InvalidArgument unless
/// 0 < b.t - a.t <= 0.1 s.
ImuState propagate_mean(const ImuState& s, const ImuSample& a, const ImuSample& b,
                        const Vec3& gravity = kDefaultGravity);

/// Error-state order [dtheta, dp, dv, dbg, dba]. The attitude error is local:
/// R_GtoI = exp(-[dtheta x]) * R_GtoI_hat, i.e. q = dq (x) q_hat in JPL.
struct ErrorStateJacobians {
  Mat15 F;
  Mat15x12 G;
};

namespace imu_index {
inline constexpr int kTheta = 0;
inline constexpr int kPos = 3;
inline constexpr int kVel = 6;
inline constexpr int kBg = 9;
inline constexpr int kBa = 12;
inline constexpr int kDim = 15;
}  // namespace imu_index

ErrorStateJacobians error_state_jacobians(const ImuState& s, const ImuSample& sample);

/// P' = Phi P Phi^T + Phi G Q G^T Phi^T dt with Phi = I + F dt, symmetrised.
/// Throws InvalidArgument when P is not symmetric PSD (when check_psd).
Mat15 propagate_covariance(const Mat15& P, const Mat15& F, const Mat15x12& G, const Mat12& Q, double dt,
                           bool check_psd = true);

}  // namespace mapvio
