#pragma once

#include <string>
#include <vector>

#include "graspkit/pose.hpp"

namespace gk {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct ChainJoint {
  enum class Kind { Hinge, Slide };

  std::string name;
  Kind kind = Kind::Hinge;
  Pose origin;          // fixed transform from the parent link frame
  Vec3 axis{0, 0, 1};   // unit, in the post-origin frame
  double lo = -3.14;
  double hi = 3.14;
};

// Serial chain: base -> joints in order -> end-effector offset.
struct KinematicChain {
  std::vector<ChainJoint> joints;
  Pose ee_offset;

  std::size_t dof() const { return joints.size(); }
  JointVector clamp(const JointVector& q) const;
  bool within_limits(const JointVector& q, double tol = 1e-9) const;
  void validate() const;  // lo < hi, unit axes
};

// End-effector pose; optionally writes every joint frame (post-motion) into
// `link_poses` (size dof + 1, the last entry being the EE frame).
Pose fk(const KinematicChain& chain, const JointVector& q,
        std::vector<Pose>* link_poses = nullptr);

// Geometric Jacobian at the end effector: rows 0-2 linear (m/rad or m/m),
// rows 3-5 angular (rad/rad or 0). Hinge column: (z_i x (p_e - p_i); z_i),
// slide column: (z_i; 0).
Jacobian jacobian(const KinematicChain& chain, const JointVector& q);

struct IkParams {
  int max_iters = 200;
  double lambda0 = 1e-3;          // initial damping
  double lambda_shrink = 0.5;     // on accepted step
  double lambda_grow = 4.0;       // on rejected step
  double lambda_floor = 1e-9;
  double lambda_cap = 1e3;
  double pos_tolerance = 1e-5;    // m
  double ori_tolerance = 1e-4;    // rad
  JointVector q_rest;             // posture target; empty = mid-range
  double null_space_gain = 0.1;
  double step_clamp = 0.5;        // rad (or m) per joint per iteration
};

struct IkSolution {
  JointVector q;
  bool converged = false;
  int iterations = 0;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
};

// Damped-least-squares iteration with adaptive damping and a null-space
// posture term: dq = (J^T J + lambda I)^-1 J^T e + k (I - J+ J)(q_rest - q).
// Joint limits are enforced by clamping each iterate. A singular system at
// the damping floor yields a non-converged result, not an exception.
IkSolution ik_solve(const KinematicChain& chain, const Pose& target, const JointVector& q0,
                    const IkParams& params = {});

// Element-wise identical to sequential ik_solve; runs on `threads` workers
// (0 = hardware concurrency). Output order matches input order.
std::vector<IkSolution> ik_solve_batch(const KinematicChain& chain,
                                       const std::vector<Pose>& targets,
                                       const std::vector<JointVector>& seeds,
                                       const IkParams& params = {}, int threads = 0);

// Orientation error as the rotation vector of R_target * R_current^T.
Vec3 orientation_error(const Quat& target, const Quat& current);

}  // namespace gk
