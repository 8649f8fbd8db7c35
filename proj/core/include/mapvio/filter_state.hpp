#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mapvio/imu.hpp"

namespace mapvio {

using Covariance = Eigen::MatrixXd;

/// Stochastic copy of an IMU pose, stamped with the camera time it serves.
struct CloneEntry {
  double t = 0.0;
  Mat3 R_GtoI = Mat3::Identity();
  Vec3 p_I_in_G = Vec3::Zero();
};

/// Camera-IMU extrinsics: p_C = R_ItoC * p_I + p_I_in_C.
struct Calibration {
  Mat3 R_ItoC = Mat3::Identity();
  Vec3 p_I_in_C = Vec3::Zero();
};

/// Full filter state. The error-state layout is
///   [imu(15) | clones(6 each: dtheta, dp) | slam(3 each) | calib(6) | t_d(1)]
/// where the calibration and time-offset blocks exist only when active.
struct FilterState {
  ImuState imu;
  std::vector<CloneEntry> clones;  // oldest first, strictly increasing t
  std::vector<Vec3> slam_features;
  Calibration calib;
  bool calib_active = false;
  double t_d = 0.0;  // camera clock minus IMU clock
  bool td_active = false;
  /// Map W -> G: x_G = T_GW.rotation * x_W + T_GW.translation.
  Pose T_GW;
  /// Covariance of (dtheta_GW, dp_GW), with R_GW = exp(-[dtheta x]) R_GW_hat.
  Mat6 sigma_init = Mat6::Zero();
  std::size_t max_clones = 11;

  int dim() const;
  int clone_offset(std::size_t i) const { return 15 + 6 * static_cast<int>(i); }
  int slam_offset(std::size_t i) const;
  /// -1 when inactive
  int calib_offset() const;
  int td_offset() const;

  /// Index of the clone stamped t (|dt| < 1e-9), if any.
  std::optional<std::size_t> find_clone(double t) const;
  const CloneEntry& clone_at(double t) const;
};

/// Appends the current IMU pose as a clone stamped t and augments P with the
/// exact copy Jacobian. Throws InvalidArgument when the window is already at
/// max_clones or t does not increase.
void clone_state(FilterState& fs, Covariance& P, double t);

enum class MarginalizePolicy { kOldest };

/// Drops the oldest clone and its rows/cols of P. Throws InvalidArgument when
/// there is no clone to drop.
void marginalize(FilterState& fs, Covariance& P, MarginalizePolicy policy = MarginalizePolicy::kOldest);

/// Adds a correction in the error-state layout to the nominal state.
void apply_correction(FilterState& fs, const Eigen::Ref<const Eigen::VectorXd>& dx);

/// Keeps rows/cols listed in `index` (new i takes old index[i]).
Covariance select_covariance(const Covariance& P, const std::vector<int>& index);

/// max |P - P^T| and the smallest eigenvalue, for invariant checks.
double asymmetry(const Covariance& P);
double min_eigenvalue(const Covariance& P);

}  // namespace mapvio
