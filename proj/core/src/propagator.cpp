#include "mapvio/propagator.hpp"

#include <algorithm>

#include "mapvio/error.hpp"

namespace mapvio {

void propagate_filter(FilterState& fs, Covariance& P, std::span<const ImuSample> samples, double t_target,
                      const NoiseParams& noise, const Vec3& gravity) {
  const double t_start = fs.imu.t;
  if (t_target < t_start) throw InvalidArgument("cannot propagate backwards in time");
  if (t_target == t_start) return;
  if (samples.size() < 2 || samples.front().t > t_start || samples.back().t < t_target) {
    throw InvalidArgument("IMU samples do not cover the propagation interval");
  }
  const Mat12 Q = noise.continuous_q();
  const int n = static_cast<int>(P.rows());

  // first interval whose end lies after t_start
  auto it = std::upper_bound(samples.begin(), samples.end(), t_start,
                             [](double t, const ImuSample& s) { return t < s.t; });
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - samples.begin()));
  for (; k < samples.size() && fs.imu.t < t_target; ++k) {
    const ImuSample& lo = samples[k - 1];
    const ImuSample& hi = samples[k];
    const double ta = std::max(lo.t, fs.imu.t);
    const double tb = std::min(hi.t, t_target);
    if (tb - ta < 1e-12) {
      if (tb == t_target) fs.imu.t = t_target;
      continue;
    }
    const ImuSample sa = interpolate(lo, hi, ta);
    const ImuSample sb = interpolate(lo, hi, tb);
    const double dt = tb - ta;

    const ErrorStateJacobians J = error_state_jacobians(fs.imu, sa);
    const Mat15 Phi = Mat15::Identity() + J.F * dt;
    const Mat15 Qd = Phi * J.G * Q * J.G.transpose() * Phi.transpose() * dt;

    const Mat15 Pii = P.topLeftCorner<15, 15>();
    P.topLeftCorner<15, 15>() = Phi * Pii * Phi.transpose() + Qd;
    if (n > 15) {
      const Eigen::MatrixXd cross = Phi * P.topRightCorner(15, n - 15);
      P.topRightCorner(15, n - 15) = cross;
      P.bottomLeftCorner(n - 15, 15) = cross.transpose();
    }
    const Mat15 sym = 0.5 * (P.topLeftCorner<15, 15>() + P.topLeftCorner<15, 15>().transpose());
    P.topLeftCorner<15, 15>() = sym;

    fs.imu = propagate_mean(fs.imu, sa, sb, gravity);
  }
  fs.imu.t = t_target;
}

}  // namespace mapvio
