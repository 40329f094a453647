#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace gk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Unit quaternion with w >= 0, so equal rotations serialize and hash equally.
Quat canonicalized(const Quat& q);

// Angle of the relative rotation between two unit quaternions, in [0, pi].
double geodesic_angle(const Quat& a, const Quat& b);

// Rigid transform in SE(3). Translation in meters, rotation kept unit-norm
// and canonicalized.
struct Pose {
  Vec3 translation{Vec3::Zero()};
  Quat rotation{Quat::Identity()};

  static Pose identity() { return Pose{}; }
  static Pose from_translation(const Vec3& t) { return Pose{t, Quat::Identity()}; }
  static Pose make(const Vec3& t, const Quat& q);

  Pose compose(const Pose& rhs) const;
  Pose operator*(const Pose& rhs) const { return compose(rhs); }
  Pose inverse() const;

  Vec3 apply(const Vec3& point) const { return rotation * point + translation; }
  Vec3 rotate(const Vec3& vec) const { return rotation * vec; }
  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

  bool approx_equal(const Pose& o, double tol_m = 1e-9, double tol_rad = 1e-9) const;
};

// d = |t_a - t_b| + rot_weight * geodesic_angle(q_a, q_b). rot_weight in
// meters per radian converts orientation mismatch into an equivalent
// displacement; default 0.05 is about half a finger length.
double pose_distance(const Pose& a, const Pose& b, double rot_weight = 0.05);

// Axis-aligned bounding box.
struct Aabb {
  Vec3 min{Vec3::Constant(std::numeric_limits<double>::infinity())};
  Vec3 max{Vec3::Constant(-std::numeric_limits<double>::infinity())};

  bool empty() const { return !(min.x() <= max.x()); }
  void expand(const Vec3& p);
  void expand(const Aabb& b);
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extents() const { return max - min; }
  double volume() const;
  bool contains(const Vec3& p) const;
  bool overlaps(const Aabb& o) const;
  Aabb inflated(double margin) const;
};

// Some orthonormal vector perpendicular to v (|v| > 0). Deterministic.
Vec3 any_perpendicular(const Vec3& v);

}  // namespace gk
