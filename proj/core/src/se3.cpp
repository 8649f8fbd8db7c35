#include "mapvio/se3.hpp"

#include <cmath>
#include <numbers>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

// sin(t)/t
double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

// (1 - cos t) / t^2, written without cancellation
double one_minus_cos_over_sq(double t) {
  const double h = sinc(0.5 * t);
  return 0.5 * h * h;
}

// (t - sin t) / t^3
double t_minus_sin_over_cube(double t) {
  if (std::abs(t) < 1e-3) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

// (1 - t sin t / (2 (1 - cos t))) / t^2, coefficient of W^2 in V^-1
double inv_v_coeff(double t) {
  if (std::abs(t) < 1e-3) {
    const double t2 = t * t;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  }
  return (1.0 - sinc(t) / (2.0 * one_minus_cos_over_sq(t))) / (t * t);
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<  0.0,  -v.z(),  v.y(),
       v.z(),   0.0,  -v.x(),
      -v.y(),  v.x(),   0.0;
  // clang-format on
  return s;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

UnitQuaternion::UnitQuaternion(double x, double y, double z, double w) {
  Vec4 q(x, y, z, w);
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw InvalidArgument("quaternion is not unit norm");
  }
  q /= n;
  if (q[3] < 0.0) q = -q;
  xyzw_ = q;
}

Mat3 quat_to_rot(const UnitQuaternion& q) {
  const Vec3 v(q.x(), q.y(), q.z());
  const double w = q.w();
  return (2.0 * w * w - 1.0) * Mat3::Identity() - 2.0 * w * skew(v) + 2.0 * v * v.transpose();
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(R.determinant() - 1.0) < tol;
}

UnitQuaternion rot_to_quat(const Mat3& R) {
  if (!is_rotation(R, 1e-6)) {
    throw InvalidArgument("matrix is not a proper rotation");
  }
  // The JPL matrix of q equals the transpose of the Hamilton matrix of q.
  const Eigen::Quaterniond h(Mat3(R.transpose()));
  return {h.x(), h.y(), h.z(), h.w()};
}

Pose Pose::checked(const Mat3& R, const Vec3& t) {
  if (!is_rotation(R)) throw InvalidArgument("pose rotation is not orthonormal");
  if (!t.allFinite()) throw InvalidArgument("pose translation is not finite");
  return {R, t};
}

Pose Pose::from_matrix(const Mat4& T) { return checked(T.topLeftCorner<3, 3>(), T.topRightCorner<3, 1>()); }

Pose Pose::inverse() const {
  const Mat3 Rt = rotation.transpose();
  return {Rt, -Rt * translation};
}

Pose Pose::operator*(const Pose& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

Mat4 Pose::matrix() const {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = rotation;
  T.topRightCorner<3, 1>() = translation;
  return T;
}

Vec6 Twist::vector() const {
  Vec6 xi;
  xi << omega, vel;
  return xi;
}

Twist Twist::from_vector(const Eigen::Ref<const Vec6>& xi) { return {xi.head<3>(), xi.tail<3>()}; }

Mat4 Twist::hat() const {
  Mat4 X = Mat4::Zero();
  X.topLeftCorner<3, 3>() = skew(omega);
  X.topRightCorner<3, 1>() = vel;
  return X;
}

MetricParam::MetricParam(const Vec3& a) : a_(a) {
  if (!a.allFinite() || a.norm() >= 1.0) {
    throw InvalidArgument("metric parameter must satisfy |a| < 1");
  }
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 W = skew(omega);
  return Mat3::Identity() + sinc(theta) * W + one_minus_cos_over_sq(theta) * W * W;
}

Vec3 so3_log(const Mat3& R) {
  const Vec3 axis2 = vee(R - R.transpose());  // 2 sin(theta) * axis
  const double s = 0.5 * axis2.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double theta = std::atan2(s, c);
  if (theta > std::numbers::pi - kLogAngleMargin) {
    throw DegenerateLog("rotation angle too close to pi for a canonical log");
  }
  return (0.5 / sinc(theta)) * axis2;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 W = skew(omega);
  return Mat3::Identity() + one_minus_cos_over_sq(theta) * W + t_minus_sin_over_cube(theta) * W * W;
}

Pose se3_exp(const Twist& xi) {
  return {so3_exp(xi.omega), so3_left_jacobian(xi.omega) * xi.vel};
}

Twist se3_log(const Pose& T) {
  const Vec3 omega = so3_log(T.rotation);
  const double theta = omega.norm();
  const Mat3 W = skew(omega);
  const Mat3 Vinv = Mat3::Identity() - 0.5 * W + inv_v_coeff(theta) * W * W;
  return {omega, Vinv * T.translation};
}

Mat6 se3_adjoint(const Pose& T) {
  Mat6 A = Mat6::Zero();
  A.topLeftCorner<3, 3>() = T.rotation;
  A.bottomRightCorner<3, 3>() = T.rotation;
  A.bottomLeftCorner<3, 3>() = skew(T.translation) * T.rotation;
  return A;
}

Mat6 se3_ad(const Twist& xi) {
  Mat6 A = Mat6::Zero();
  A.topLeftCorner<3, 3>() = skew(xi.omega);
  A.bottomRightCorner<3, 3>() = skew(xi.omega);
  A.bottomLeftCorner<3, 3>() = skew(xi.vel);
  return A;
}

Mat6 se3_left_jacobian(const Twist& xi) {
  // sum_n ad^n / (n+1)!; ad is block lower-triangular so the powers grow like
  // theta^n and n theta^(n-1) |v|, which keeps the series well conditioned.
  const Mat6 ad = se3_ad(xi);
  Mat6 J = Mat6::Identity();
  Mat6 term = Mat6::Identity();
  for (int n = 1; n < 200; ++n) {
    term = term * ad / static_cast<double>(n + 1);
    J += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20) break;
  }
  return J;
}

Mat6 se3_right_jacobian(const Twist& xi) { return se3_left_jacobian({-xi.omega, -xi.vel}); }

Mat4 metric_matrix(const Vec3& a) {
  if (!a.allFinite() || a.norm() >= 1.0) {
    throw InvalidArgument("metric parameter must satisfy |a| < 1");
  }
  Mat4 M = Mat4::Identity();
  M.topRightCorner<3, 1>() = a;
  M.bottomLeftCorner<1, 3>() = a.transpose();
  return M;
}

namespace {

void require_tangent(const Mat4& x) {
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  const Mat3 top = x.topLeftCorner<3, 3>();
  const bool skew_ok = (top + top.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  const bool bottom_ok = x.row(3).cwiseAbs().maxCoeff() == 0.0;
  if (!x.allFinite() || !skew_ok || !bottom_ok) {
    throw InvalidArgument("matrix is not an se(3) tangent matrix");
  }
}

}  // namespace

double inner_trace(const Mat4& x1, const Mat4& x2, const Mat4& M) {
  require_tangent(x1);
  require_tangent(x2);
  return (x1.transpose() * x2 * M).trace();
}

Mat6 metric_gram(const MetricParam& a) {
  Mat6 G = Mat6::Identity();
  G.topLeftCorner<3, 3>() *= 2.0;
  G.topRightCorner<3, 3>() = skew(a.a());
  G.bottomLeftCorner<3, 3>() = -skew(a.a());
  return G;
}

double inner_closed(const Twist& t1, const Twist& t2, const MetricParam& a) {
  const Vec3& av = a.a();
  return 2.0 * t1.omega.dot(t2.omega) + t1.omega.dot(av.cross(t2.vel)) - t1.vel.dot(av.cross(t2.omega)) +
         t1.vel.dot(t2.vel);
}

double geodesic_dist_sq(const Pose& S1, const Pose& S2, const MetricParam& a) {
  const Twist xi = se3_log(S1.inverse() * S2);
  return inner_closed(xi, xi, a);
}

double rotation_angle_between(const Mat3& Ra, const Mat3& Rb) {
  const Mat3 D = Ra.transpose() * Rb;
  const double s = 0.5 * vee(D - D.transpose()).norm();
  const double c = 0.5 * (D.trace() - 1.0);
  return std::atan2(s, c);
}

}  // namespace mapvio
