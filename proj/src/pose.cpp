#include "graspkit/pose.hpp"

#include <algorithm>
#include <cmath>

namespace gk {

Quat canonicalized(const Quat& q) {
  Quat n = q.normalized();
  if (n.w() < 0.0) {
    n.coeffs() = -n.coeffs();
  }
  return n;
}

double geodesic_angle(const Quat& a, const Quat& b) {
  double d = std::abs(a.dot(b));
  d = std::min(d, 1.0);
  return 2.0 * std::acos(d);
}

Pose Pose::make(const Vec3& t, const Quat& q) { return Pose{t, canonicalized(q)}; }

Pose Pose::compose(const Pose& rhs) const {
  return Pose{rotation * rhs.translation + translation, canonicalized(rotation * rhs.rotation)};
}

Pose Pose::inverse() const {
  Quat qi = rotation.conjugate();
  return Pose{qi * (-translation), canonicalized(qi)};
}

bool Pose::approx_equal(const Pose& o, double tol_m, double tol_rad) const {
  return (translation - o.translation).norm() <= tol_m &&
         geodesic_angle(rotation, o.rotation) <= tol_rad;
}

double pose_distance(const Pose& a, const Pose& b, double rot_weight) {
  return (a.translation - b.translation).norm() +
         rot_weight * geodesic_angle(a.rotation, b.rotation);
}

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void Aabb::expand(const Aabb& b) {
  if (b.empty()) return;
  min = min.cwiseMin(b.min);
  max = max.cwiseMax(b.max);
}

double Aabb::volume() const {
  if (empty()) return 0.0;
  Vec3 e = extents();
  return e.x() * e.y() * e.z();
}

bool Aabb::contains(const Vec3& p) const {
  return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y() &&
         p.z() >= min.z() && p.z() <= max.z();
}

bool Aabb::overlaps(const Aabb& o) const {
  return min.x() <= o.max.x() && max.x() >= o.min.x() && min.y() <= o.max.y() &&
         max.y() >= o.min.y() && min.z() <= o.max.z() && max.z() >= o.min.z();
}

Aabb Aabb::inflated(double margin) const {
  Aabb r = *this;
  r.min -= Vec3::Constant(margin);
  r.max += Vec3::Constant(margin);
  return r;
}

Vec3 any_perpendicular(const Vec3& v) {
  Vec3 axis = Vec3::UnitX();
  double ax = std::abs(v.x()), ay = std::abs(v.y()), az = std::abs(v.z());
  if (ay <= ax && ay <= az) {
    axis = Vec3::UnitY();
  } else if (az <= ax && az <= ay) {
    axis = Vec3::UnitZ();
  }
  return v.cross(axis).normalized();
}

}  // namespace gk
