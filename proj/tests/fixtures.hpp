#pragma once

// Shared synthetic fixtures for unit and acceptance tests.

#include <cmath>

#include "graspkit/kinematics.hpp"

namespace gk::fixtures {

// Planar two-revolute-joint arm with unit links, hinges about z.
inline KinematicChain planar_2r() {
  KinematicChain chain;
  ChainJoint j1;
  j1.name = "q1";
  j1.axis = Vec3::UnitZ();
  j1.lo = -M_PI;
  j1.hi = M_PI;
  chain.joints.push_back(j1);
  ChainJoint j2 = j1;
  j2.name = "q2";
  j2.origin = Pose::from_translation(Vec3(1, 0, 0));
  chain.joints.push_back(j2);
  chain.ee_offset = Pose::from_translation(Vec3(1, 0, 0));
  return chain;
}

// Single prismatic joint along z.
inline KinematicChain single_slide() {
  KinematicChain chain;
  ChainJoint j;
  j.name = "s";
  j.kind = ChainJoint::Kind::Slide;
  j.axis = Vec3::UnitZ();
  j.lo = -1.0;
  j.hi = 1.0;
  chain.joints.push_back(j);
  return chain;
}

// 7-DoF arm with the published Panda link dimensions, expressed as
// modified-DH screws: origin_i = RotX(alpha) * TransX(a) * TransZ(d),
// motion about the post-origin z axis.
inline KinematicChain arm_7dof() {
  struct Row {
    double a, d, alpha, lo, hi;
  };
  const Row rows[7] = {
      {0.0, 0.333, 0.0, -2.8973, 2.8973},
      {0.0, 0.0, -M_PI_2, -1.7628, 1.7628},
      {0.0, 0.316, M_PI_2, -2.8973, 2.8973},
      {0.0825, 0.0, M_PI_2, -3.0718, -0.0698},
      {-0.0825, 0.384, -M_PI_2, -2.8973, 2.8973},
      {0.0, 0.0, M_PI_2, -0.0175, 3.7525},
      {0.088, 0.0, M_PI_2, -2.8973, 2.8973},
  };
  KinematicChain chain;
  for (int i = 0; i < 7; ++i) {
    ChainJoint j;
    j.name = "q" + std::to_string(i + 1);
    Quat rx(Eigen::AngleAxisd(rows[i].alpha, Vec3::UnitX()));
    j.origin = Pose::make(rx * Vec3(rows[i].a, 0, rows[i].d), rx);
    j.axis = Vec3::UnitZ();
    j.lo = rows[i].lo;
    j.hi = rows[i].hi;
    chain.joints.push_back(j);
  }
  chain.ee_offset = Pose::from_translation(Vec3(0, 0, 0.107));
  return chain;
}

}  // namespace gk::fixtures
