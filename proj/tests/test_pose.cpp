#include "graspkit/pose.hpp"

#include <cmath>

#include "doctest.h"
#include "graspkit/common.hpp"

using namespace gk;

namespace {

Quat random_quat(Rng& rng) {
  // uniform on SO(3) via Shoemake
  double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  double s1 = std::sqrt(1 - u1), s2 = std::sqrt(u1);
  return Quat(s2 * std::cos(2 * M_PI * u3), s1 * std::sin(2 * M_PI * u2),
              s1 * std::cos(2 * M_PI * u2), s2 * std::sin(2 * M_PI * u3));
}

Pose random_pose(Rng& rng) {
  return Pose::make(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                    random_quat(rng));
}

}  // namespace

TEST_CASE("quaternion canonicalization keeps w nonnegative and unit norm") {
  Quat q(-0.5, 0.5, 0.5, 0.5);
  Quat c = canonicalized(q);
  CHECK(c.w() >= 0.0);
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // same rotation
  CHECK(geodesic_angle(q.normalized(), c) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("compose with inverse gives identity within 1e-9") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    Pose p = random_pose(rng);
    Pose id = p * p.inverse();
    CHECK(id.translation.norm() <= 1e-9);
    CHECK(geodesic_angle(id.rotation, Quat::Identity()) <= 1e-9);
  }
}

TEST_CASE("pose_distance of identical poses is zero") {
  Pose p = Pose::make(Vec3(0.1, -0.2, 0.3), Quat(0.9, 0.1, 0.2, 0.3));
  CHECK(pose_distance(p, p, 0.05) == 0.0);
}

TEST_CASE("pose_distance with equal rotation is translation norm") {
  Pose a = Pose::from_translation(Vec3(0, 0, 0));
  Pose b = Pose::from_translation(Vec3(0.03, 0, 0));
  CHECK(pose_distance(a, b, 0.05) == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("pose_distance at 180 degrees equals rot_weight * pi") {
  Pose a;
  Pose b = Pose::make(Vec3::Zero(), Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitZ())));
  // geodesic angle formula 2*acos(|<qa,qb>|) gives pi for a half turn
  CHECK(geodesic_angle(a.rotation, b.rotation) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(pose_distance(a, b, 0.05) == doctest::Approx(0.05 * M_PI).epsilon(1e-12));
}

TEST_CASE("pose_distance satisfies metric axioms on random triples") {
  Rng rng(17);
  const double w = 0.05;
  for (int i = 0; i < 10000; ++i) {
    Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    double dab = pose_distance(a, b, w);
    double dba = pose_distance(b, a, w);
    double dac = pose_distance(a, c, w);
    double dcb = pose_distance(c, b, w);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(dab >= 0.0);
    CHECK(dab <= dac + dcb + 1e-12);
  }
}

TEST_CASE("pose_distance is zero only for equal poses") {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    Pose a = random_pose(rng), b = random_pose(rng);
    if (pose_distance(a, b, 0.05) < 1e-12) {
      CHECK((a.translation - b.translation).norm() < 1e-9);
      CHECK(geodesic_angle(a.rotation, b.rotation) < 1e-9);
    }
  }
}

TEST_CASE("apply and rotate compose correctly") {
  Pose p = Pose::make(Vec3(1, 2, 3), Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ())));
  Vec3 v = p.apply(Vec3(1, 0, 0));
  CHECK((v - Vec3(1, 3, 3)).norm() < 1e-12);
  Vec3 r = p.rotate(Vec3(1, 0, 0));
  CHECK((r - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("aabb volume and containment") {
  Aabb box;
  box.expand(Vec3(-1, -1, -1));
  box.expand(Vec3(1, 1, 1));
  CHECK(box.volume() == doctest::Approx(8.0));
  CHECK(box.contains(Vec3(0.5, 0, 0)));
  CHECK(!box.contains(Vec3(1.5, 0, 0)));
  Aabb other;
  other.expand(Vec3(0.9, 0.9, 0.9));
  other.expand(Vec3(2, 2, 2));
  CHECK(box.overlaps(other));
}

TEST_CASE("any_perpendicular is unit and orthogonal") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (v.norm() < 1e-6) continue;
    Vec3 p = any_perpendicular(v);
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(p.dot(v)) < 1e-9 * v.norm());
  }
}
