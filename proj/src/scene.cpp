#include "graspkit/scene.hpp"

#include <map>
#include <set>

#include "graspkit/common.hpp"

namespace gk {

int SceneGraph::body_index(const std::string& id) const {
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int SceneGraph::joint_index(const std::string& id) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int SceneGraph::parent_joint_of(int body_index) const {
  if (body_index < 0 || body_index >= static_cast<int>(bodies.size())) return -1;
  const std::string& id = bodies[body_index].id;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joints[j].child == id) return static_cast<int>(j);
  }
  return -1;
}

const BodySpec& SceneGraph::body(const std::string& id) const {
  int i = body_index(id);
  if (i < 0) throw ValidationError("unknown body '" + id + "'");
  return bodies[i];
}

void SceneGraph::validate() const {
  std::set<std::string> ids;
  for (const BodySpec& b : bodies) {
    if (!ids.insert(b.id).second) {
      throw ValidationError("duplicate body id '" + b.id + "'");
    }
    if (!b.fixed()) {
      if (!(b.mass > 0)) {
        throw ValidationError("free body '" + b.id + "' must have mass > 0");
      }
      Eigen::SelfAdjointEigenSolver<Mat3> es(b.inertia);
      if (es.eigenvalues().minCoeff() <= 0) {
        throw ValidationError("free body '" + b.id + "' needs positive-definite inertia");
      }
    }
    for (const ConvexPiece& p : b.colliders) validate_convex_piece(p);
  }
  std::set<std::string> joint_ids;
  std::map<std::string, std::string> parent_of;
  for (const JointSpec& j : joints) {
    if (!joint_ids.insert(j.id).second) {
      throw ValidationError("duplicate joint id '" + j.id + "'");
    }
    if (body_index(j.parent) < 0) {
      throw ValidationError("joint '" + j.id + "' references missing parent '" + j.parent + "'");
    }
    if (body_index(j.child) < 0) {
      throw ValidationError("joint '" + j.id + "' references missing child '" + j.child + "'");
    }
    if (!(j.lo < j.hi)) {
      throw ValidationError("joint '" + j.id + "' needs lo < hi");
    }
    if (j.lo > 0.0 || j.hi < 0.0) {
      throw ValidationError("joint '" + j.id + "' range must contain 0 (the initial pose)");
    }
    if (std::abs(j.axis.norm() - 1.0) > 1e-6) {
      throw ValidationError("joint '" + j.id + "' axis must be unit length");
    }
    if (!parent_of.emplace(j.child, j.parent).second) {
      throw ValidationError("body '" + j.child + "' is the child of two joints");
    }
  }
  // cycle check: walk up from every body
  for (const BodySpec& b : bodies) {
    std::set<std::string> seen;
    std::string cur = b.id;
    while (parent_of.count(cur)) {
      if (!seen.insert(cur).second) {
        throw ValidationError("joint cycle involving body '" + cur + "'");
      }
      cur = parent_of[cur];
    }
  }
}

WorldState initial_state(const SceneGraph& scene) {
  WorldState s;
  s.bodies.resize(scene.bodies.size());
  for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
    s.bodies[i].pose = scene.bodies[i].initial_pose;
  }
  s.joint_positions.assign(scene.joints.size(), 0.0);
  s.joint_velocities.assign(scene.joints.size(), 0.0);
  return s;
}

Pose joint_child_pose(const SceneGraph& scene, int joint_index, const Pose& parent_pose,
                      double q) {
  const JointSpec& j = scene.joints[joint_index];
  int pi = scene.body_index(j.parent);
  int ci = scene.body_index(j.child);
  Pose rest = scene.bodies[pi].initial_pose.inverse() * scene.bodies[ci].initial_pose;
  Pose motion;
  if (j.kind == JointSpec::Kind::Slide) {
    motion = Pose::from_translation(j.axis * q);
  } else {
    Quat rot(Eigen::AngleAxisd(q, j.axis));
    // rotation about the axis through the anchor point
    motion = Pose::make(j.anchor - rot * j.anchor, rot);
  }
  return parent_pose * motion * rest;
}

void propagate_joint_poses(const SceneGraph& scene, WorldState& state) {
  // Repeated passes handle chains in any declaration order; depth is small.
  for (std::size_t pass = 0; pass < scene.joints.size() + 1; ++pass) {
    bool changed = false;
    for (std::size_t j = 0; j < scene.joints.size(); ++j) {
      int pi = scene.body_index(scene.joints[j].parent);
      int ci = scene.body_index(scene.joints[j].child);
      Pose want = joint_child_pose(scene, static_cast<int>(j), state.bodies[pi].pose,
                                   state.joint_positions[j]);
      if (!want.approx_equal(state.bodies[ci].pose, 1e-12, 1e-12)) {
        state.bodies[ci].pose = want;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

Mat3 box_inertia(double mass, const Vec3& e) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = mass / 12.0 * (e.y() * e.y() + e.z() * e.z());
  m(1, 1) = mass / 12.0 * (e.x() * e.x() + e.z() * e.z());
  m(2, 2) = mass / 12.0 * (e.x() * e.x() + e.y() * e.y());
  return m;
}

Mat3 sphere_inertia(double mass, double radius) {
  return Mat3::Identity() * (0.4 * mass * radius * radius);
}

}  // namespace gk
