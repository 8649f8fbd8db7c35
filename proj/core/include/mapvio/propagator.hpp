#pragma once

#include <span>

#include "mapvio/filter_state.hpp"

namespace mapvio {

/// Propagates the IMU mean and the full-state covariance from fs.imu.t to
/// t_target using the measurements in `samples` (sorted by time). The last
/// partial interval uses linearly interpolated readings, so `samples` must
/// bracket [fs.imu.t, t_target]. Cross-covariances with clones and the other
/// blocks are carried through Phi.
void propagate_filter(FilterState& fs, Covariance& P, std::span<const ImuSample> samples, double t_target,
                      const NoiseParams& noise, const Vec3& gravity = kDefaultGravity);

}  // namespace mapvio
