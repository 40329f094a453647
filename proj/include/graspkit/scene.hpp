#pragma once

#include <string>
#include <vector>

#include "graspkit/convex.hpp"
#include "graspkit/pose.hpp"

namespace gk {

struct BodySpec {
  enum class Mobility { Fixed, Free };

  std::string id;
  Mobility mobility = Mobility::Free;
  std::vector<ConvexPiece> colliders;
  double mass = 1.0;               // kg, ignored for fixed bodies
  Mat3 inertia = Mat3::Identity(); // kg m^2, body frame
  double friction = 0.8;           // Coulomb coefficient
  Pose initial_pose;

  bool fixed() const { return mobility == Mobility::Fixed; }
};

struct JointSpec {
  enum class Kind { Hinge, Slide };

  std::string id;
  std::string parent;
  std::string child;
  Kind kind = Kind::Hinge;
  Vec3 axis{0, 0, 1};   // unit, parent body frame
  Vec3 anchor{0, 0, 0}; // parent body frame, meters
  double lo = 0.0;      // rad or m; joint position 0 is the initial configuration,
  double hi = 1.0;      // so the range must contain 0

  double range() const { return hi - lo; }
};

struct SceneGraph {
  std::vector<BodySpec> bodies;
  std::vector<JointSpec> joints;
  Vec3 gravity{0, 0, -9.81};

  int body_index(const std::string& id) const;
  int joint_index(const std::string& id) const;
  // joint driving a body, or -1 when the body is a root
  int parent_joint_of(int body_index) const;
  const BodySpec& body(const std::string& id) const;

  // Unique ids, endpoints exist, no joint cycles, free-body mass/inertia
  // positivity, unit axes, lo < hi with 0 inside. Throws ValidationError.
  void validate() const;
};

struct BodyState {
  Pose pose;
  Vec3 linear_velocity{0, 0, 0};
  Vec3 angular_velocity{0, 0, 0};
  double low_motion_time = 0.0;
  bool asleep = false;
};

struct PendingForce {
  int body = -1;
  Vec3 force{0, 0, 0};
  double remaining = 0.0;  // seconds of stepping left to apply
};

struct WorldState {
  std::vector<BodyState> bodies;       // index-aligned with SceneGraph::bodies
  std::vector<double> joint_positions; // aligned with SceneGraph::joints
  std::vector<double> joint_velocities;
  std::vector<PendingForce> pending_forces;
};

WorldState initial_state(const SceneGraph& scene);

// Pose of a joint-driven child given parent pose and joint position. The rest
// relative pose is parent_initial^-1 * child_initial at q = 0.
Pose joint_child_pose(const SceneGraph& scene, int joint_index, const Pose& parent_pose,
                      double q);

// Recomputes poses of all joint-driven bodies from their parents (roots are
// taken from `state` as-is).
void propagate_joint_poses(const SceneGraph& scene, WorldState& state);

Mat3 box_inertia(double mass, const Vec3& full_extents);
Mat3 sphere_inertia(double mass, double radius);

}  // namespace gk
