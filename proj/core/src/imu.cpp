#include "mapvio/imu.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mapvio/error.hpp"

namespace mapvio {

ImuSample interpolate(const ImuSample& a, const ImuSample& b, double t) {
  if (t == a.t) return a;
  if (t == b.t) return b;
  const double lambda = (t - a.t) / (b.t - a.t);
  return {t, (1.0 - lambda) * a.omega_m + lambda * b.omega_m, (1.0 - lambda) * a.accel_m + lambda * b.accel_m};
}

void NoiseParams::validate() const {
  for (double v : {sigma_g, sigma_wg, sigma_a, sigma_wa, sigma_px, sigma_r}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("noise densities must be positive");
  }
}

Mat12 NoiseParams::continuous_q() const {
  Mat12 Q = Mat12::Zero();
  Q.block<3, 3>(0, 0).diagonal().setConstant(sigma_g * sigma_g);
  Q.block<3, 3>(3, 3).diagonal().setConstant(sigma_wg * sigma_wg);
  Q.block<3, 3>(6, 6).diagonal().setConstant(sigma_a * sigma_a);
  Q.block<3, 3>(9, 9).diagonal().setConstant(sigma_wa * sigma_wa);
  return Q;
}

namespace {

struct Kin {
  Mat3 R_ItoG;
  Vec3 p;
  Vec3 v;
};

struct KinRate {
  Mat3 dR;
  Vec3 dp;
  Vec3 dv;
};

KinRate rate(const Kin& k, const Vec3& omega, const Vec3& accel, const Vec3& gravity) {
  return {k.R_ItoG * skew(omega), k.v, k.R_ItoG * accel + gravity};
}

Kin step(const Kin& k, const KinRate& r, double h) { return {k.R_ItoG + h * r.dR, k.p + h * r.dp, k.v + h * r.dv}; }

}  // namespace

ImuState propagate_mean(const ImuState& s, const ImuSample& a, const ImuSample& b, const Vec3& gravity) {
  const double dt = b.t - a.t;
  if (!(dt > 0.0) || dt > 0.1) throw InvalidArgument("IMU propagation interval must lie in (0, 0.1] s");

  const Vec3 w0 = a.omega_m - s.bg;
  const Vec3 w1 = b.omega_m - s.bg;
  const Vec3 f0 = a.accel_m - s.ba;
  const Vec3 f1 = b.accel_m - s.ba;
  const Vec3 wm = 0.5 * (w0 + w1);
  const Vec3 fm = 0.5 * (f0 + f1);

  const Kin k0{s.R_GtoI.transpose(), s.p_I_in_G, s.v_I_in_G};
  const KinRate r1 = rate(k0, w0, f0, gravity);
  const KinRate r2 = rate(step(k0, r1, 0.5 * dt), wm, fm, gravity);
  const KinRate r3 = rate(step(k0, r2, 0.5 * dt), wm, fm, gravity);
  const KinRate r4 = rate(step(k0, r3, dt), w1, f1, gravity);

  const double h6 = dt / 6.0;
  Kin k1{k0.R_ItoG + h6 * (r1.dR + 2.0 * r2.dR + 2.0 * r3.dR + r4.dR),
         k0.p + h6 * (r1.dp + 2.0 * r2.dp + 2.0 * r3.dp + r4.dp),
         k0.v + h6 * (r1.dv + 2.0 * r2.dv + 2.0 * r3.dv + r4.dv)};

  ImuState out = s;
  out.t = b.t;
  // project back onto SO(3)
  out.R_GtoI = Eigen::Quaterniond(k1.R_ItoG).normalized().toRotationMatrix().transpose();
  out.p_I_in_G = k1.p;
  out.v_I_in_G = k1.v;
  return out;
}

ErrorStateJacobians error_state_jacobians(const ImuState& s, const ImuSample& sample) {
  using namespace imu_index;
  const Vec3 w = sample.omega_m - s.bg;
  const Vec3 f = sample.accel_m - s.ba;
  const Mat3 Rt = s.R_GtoI.transpose();

  ErrorStateJacobians J;
  J.F.setZero();
  J.F.block<3, 3>(kTheta, kTheta) = -skew(w);
  J.F.block<3, 3>(kTheta, kBg) = -Mat3::Identity();
  J.F.block<3, 3>(kPos, kVel) = Mat3::Identity();
  J.F.block<3, 3>(kVel, kTheta) = -Rt * skew(f);
  J.F.block<3, 3>(kVel, kBa) = -Rt;

  J.G.setZero();
  J.G.block<3, 3>(kTheta, 0) = -Mat3::Identity();
  J.G.block<3, 3>(kBg, 3) = Mat3::Identity();
  J.G.block<3, 3>(kVel, 6) = -Rt;
  J.G.block<3, 3>(kBa, 9) = Mat3::Identity();
  return J;
}

Mat15 propagate_covariance(const Mat15& P, const Mat15& F, const Mat15x12& G, const Mat12& Q, double dt,
                           bool check_psd) {
  if (!(dt > 0.0)) throw InvalidArgument("covariance propagation needs dt > 0");
  if (check_psd) {
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      throw InvalidArgument("covariance is not symmetric");
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat15>(P, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (min_eig < -1e-10) throw InvalidArgument("covariance is not positive semi-definite");
  }
  const Mat15 Phi = Mat15::Identity() + F * dt;
  const Mat15 GQG = G * Q * G.transpose();
  Mat15 out = Phi * P * Phi.transpose() + Phi * GQG * Phi.transpose() * dt;
  return 0.5 * (out + out.transpose());
}

}  // namespace mapvio
