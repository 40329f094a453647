#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graspkit/engine.hpp"
#include "graspkit/grasp_gen.hpp"

namespace gk {

struct PerturbationSpec {
  std::vector<Vec3> linear_offsets;   // m, gripper frame
  std::vector<Vec3> angular_offsets;  // rotation vectors, rad, gripper frame
  double hold_duration = 0.25;        // s per excursion leg

  // +-1 cm along each gripper axis, +-10 degrees about each axis.
  static PerturbationSpec defaults();
  void validate() const;
};

enum class FailureReason {
  None,
  Slip,
  LiftTooLargeObject,
  VerticalClearance,
  TrajectoryCollision,
  LiftsInsteadOfActuating,
  ArticulationPathCollision,
  ObstacleBlocks,
  Misalignment,
};

const char* to_string(FailureReason reason);
FailureReason failure_reason_from_string(const std::string& name);

struct InSituChecks {
  bool pregrasp_clear = true;
  bool grasp_clear = true;
  bool trajectory_clear = true;
  bool motion_ok = false;  // lift_ok or articulate_ok depending on mode
};

struct VerificationResult {
  std::string grasp_id;
  bool rigid_robust = false;
  std::optional<bool> actuation_ok;  // unset for rigid-only verification
  InSituChecks in_situ;
  FailureReason failure_reason = FailureReason::None;

  // measured quantities
  double max_relative_slip = 0.0;   // m, object motion in the palm frame
  double lift_height = 0.0;         // m
  double reached_up = 0.0;          // share of commanded opening motion
  double reached_down = 0.0;
};

struct VerifyParams {
  double closing_force = 40.0;      // N per finger
  double slip_threshold = 5e-3;     // m
  double finger_mass = 0.5;         // kg, dynamic finger bodies
  double contact_probe = 2e-3;      // m, pad counts as touching within this
  double lift_height = 0.10;        // m commanded
  double lift_min_gain = 0.05;      // m for success
  double min_actuation_fraction = 0.70;
  int sweep_steps = 256;
  double close_duration = 0.4;      // s
  double settle_hold = 0.25;        // s after closing before perturbing
};

// Analytic two-contact Coulomb check: does gravity (plus an optional extra
// acceleration magnitude) fit inside both friction cones under the applied
// closing force? closing_dir is expressed in the gravity frame.
bool wrench_slip_oracle(double mass, double mu, double closing_force,
                        const Vec3& closing_dir = Vec3::UnitX(),
                        const Vec3& gravity = Vec3(0, 0, -9.81), double extra_accel = 0.0);

// Dynamic robustness check: the gripper palm is driven kinematically, the
// fingers close with a constant force, and the scripted perturbations must
// not break either fingertip contact nor move the object more than
// slip_threshold relative to the palm.
VerificationResult verify_rigid(const GraspCandidate& grasp, const BodySpec& object,
                                const Backend& backend, const PerturbationSpec& perturb,
                                const VerifyParams& params = {});

// Actuation feasibility: with the gripper rigidly attached at the grasp, the
// joint must sweep at least min_actuation_fraction of its range in both
// directions without the gripper or the moving subtree colliding.
VerificationResult verify_articulated(const GraspCandidate& grasp,
                                      const ArticulatedTarget& target, const Backend& backend,
                                      const VerifyParams& params = {});

enum class InSituMode { Lift, Articulate };

// Full-scene test: pre-grasp / grasp / approach collision checkpoints, then
// closing and either a 10 cm lift or a joint-path articulation. For the
// articulate mode the object id names the leaf (handle) body of its joint.
VerificationResult in_situ_test(const GraspCandidate& grasp, const SceneGraph& scene,
                                const WorldState& state, const std::string& object_id,
                                const Backend& backend, InSituMode mode,
                                const VerifyParams& params = {});

}  // namespace gk
