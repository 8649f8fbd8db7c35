#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mapvio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Rotations whose angle exceeds pi minus this margin have no canonical log.
inline constexpr double kLogAngleMargin = 1e-6;

/// skew(v) * u == v.cross(u)
Mat3 skew(const Vec3& v);
Vec3 vee(const Mat3& m);

/// Unit quaternion in the JPL convention, stored as (x, y, z, w).
///
/// The rotation matrix of q is
///   R(q) = (2w^2 - 1) I - 2 w [q_v x] + 2 q_v q_v^T,
/// i.e. the passive rotation that takes coordinates from the parent frame into
/// the child frame. The scalar part is kept non-negative.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  /// Throws InvalidArgument when |q| deviates from one by more than 1e-6.
  UnitQuaternion(double x, double y, double z, double w);

  static UnitQuaternion identity() { return {}; }

  double x() const { return xyzw_[0]; }
  double y() const { return xyzw_[1]; }
  double z() const { return xyzw_[2]; }
  double w() const { return xyzw_[3]; }
  const Vec4& coeffs() const { return xyzw_; }

 private:
  Vec4 xyzw_{0.0, 0.0, 0.0, 1.0};
};

Mat3 quat_to_rot(const UnitQuaternion& q);
/// Throws InvalidArgument when R is not orthonormal with det +1 (tol 1e-6).
UnitQuaternion rot_to_quat(const Mat3& R);

bool is_rotation(const Mat3& R, double tol = 1e-10);

/// Rigid transform x' = rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  /// Validates the rotation block (tol 1e-10) and throws InvalidArgument.
  static Pose checked(const Mat3& R, const Vec3& t);
  static Pose from_matrix(const Mat4& T);

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  Vec3 operator*(const Vec3& x) const { return rotation * x + translation; }
  Mat4 matrix() const;
};

/// Element of se(3): rotational part omega and translational part vel.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 vel = Vec3::Zero();

  Vec6 vector() const;
  static Twist from_vector(const Eigen::Ref<const Vec6>& xi);
  /// [[skew(omega), vel], [0, 0]]
  Mat4 hat() const;
};

/// Parameter of the left-invariant metric family; requires |a| < 1.
class MetricParam {
 public:
  MetricParam() = default;
  explicit MetricParam(const Vec3& a);
  const Vec3& a() const { return a_; }

 private:
  Vec3 a_ = Vec3::Zero();
};

Mat3 so3_exp(const Vec3& omega);
/// Throws DegenerateLog when the angle is within kLogAngleMargin of pi.
Vec3 so3_log(const Mat3& R);
/// Left Jacobian of SO(3): exp(w + d) ~= exp(J_l(w) d) exp(w).
Mat3 so3_left_jacobian(const Vec3& omega);

Pose se3_exp(const Twist& xi);
Twist se3_log(const Pose& T);

/// Adjoint of T acting on (omega, vel) twists.
Mat6 se3_adjoint(const Pose& T);
/// ad(xi) such that ad(xi) eta is the Lie bracket [xi, eta].
Mat6 se3_ad(const Twist& xi);
/// exp(xi + d) ~= exp(J_l(xi) d) exp(xi)
Mat6 se3_left_jacobian(const Twist& xi);
/// exp(xi + d) ~= exp(xi) exp(J_r(xi) d)
Mat6 se3_right_jacobian(const Twist& xi);

/// [[I3, a], [a^T, 1]]; throws InvalidArgument when |a| >= 1.
Mat4 metric_matrix(const Vec3& a);
inline Mat4 metric_matrix(const MetricParam& a) { return metric_matrix(a.a()); }

/// tr(x1^T x2 M) for tangent matrices x1, x2 of the form [[skew(w), v], [0, 0]].
/// Throws InvalidArgument when either argument lacks that structure.
double inner_trace(const Mat4& x1, const Mat4& x2, const Mat4& M);

/// The 6x6 Gram matrix [[2 I, skew(a)], [-skew(a), I]] of the closed-form inner product.
Mat6 metric_gram(const MetricParam& a);
double inner_closed(const Twist& t1, const Twist& t2, const MetricParam& a);

/// Squared geodesic distance through the relative element S1^-1 S2.
double geodesic_dist_sq(const Pose& S1, const Pose& S2, const MetricParam& a);

/// Angle of the rotation R_a^T R_b, in radians.
double rotation_angle_between(const Mat3& Ra, const Mat3& Rb);

}  // namespace mapvio
