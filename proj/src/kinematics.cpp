#include "graspkit/kinematics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "graspkit/common.hpp"

namespace gk {

JointVector KinematicChain::clamp(const JointVector& q) const {
  JointVector out = q;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    out[i] = std::clamp(out[i], joints[i].lo, joints[i].hi);
  }
  return out;
}

bool KinematicChain::within_limits(const JointVector& q, double tol) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (q[i] < joints[i].lo - tol || q[i] > joints[i].hi + tol) return false;
  }
  return true;
}

void KinematicChain::validate() const {
  for (const ChainJoint& j : joints) {
    if (!(j.lo < j.hi)) throw ValidationError("chain joint '" + j.name + "' needs lo < hi");
    if (std::abs(j.axis.norm() - 1.0) > 1e-6) {
      throw ValidationError("chain joint '" + j.name + "' axis must be unit length");
    }
  }
}

Pose fk(const KinematicChain& chain, const JointVector& q, std::vector<Pose>* link_poses) {
  if (static_cast<std::size_t>(q.size()) != chain.dof()) {
    throw ValidationError("fk: dim(q) != joint count");
  }
  if (link_poses) link_poses->clear();
  Pose cur;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const ChainJoint& j = chain.joints[i];
    cur = cur * j.origin;
    if (j.kind == ChainJoint::Kind::Hinge) {
      cur = cur * Pose::make(Vec3::Zero(), Quat(Eigen::AngleAxisd(q[i], j.axis)));
    } else {
      cur = cur * Pose::from_translation(j.axis * q[i]);
    }
    if (link_poses) link_poses->push_back(cur);
  }
  cur = cur * chain.ee_offset;
  if (link_poses) link_poses->push_back(cur);
  return cur;
}

Jacobian jacobian(const KinematicChain& chain, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof()) {
    throw ValidationError("jacobian: dim(q) != joint count");
  }
  std::vector<Pose> frames;
  Pose ee = fk(chain, q, &frames);
  Vec3 p_e = ee.translation;
  Jacobian jac(6, chain.dof());
  Pose cur;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const ChainJoint& j = chain.joints[i];
    Pose pre = cur * j.origin;  // frame before the joint motion
    Vec3 z = pre.rotate(j.axis);
    if (j.kind == ChainJoint::Kind::Hinge) {
      jac.col(i).head<3>() = z.cross(p_e - pre.translation);
      jac.col(i).tail<3>() = z;
    } else {
      jac.col(i).head<3>() = z;
      jac.col(i).tail<3>().setZero();
    }
    cur = frames[i];
  }
  return jac;
}

Vec3 orientation_error(const Quat& target, const Quat& current) {
  Quat rel = canonicalized(target * current.conjugate());
  Eigen::AngleAxisd aa(rel);
  return aa.angle() * aa.axis();
}

namespace {

Eigen::Matrix<double, 6, 1> task_error(const Pose& target, const Pose& current) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.translation - current.translation;
  e.tail<3>() = orientation_error(target.rotation, current.rotation);
  return e;
}

}  // namespace

IkSolution ik_solve(const KinematicChain& chain, const Pose& target, const JointVector& q0,
                    const IkParams& params) {
  if (static_cast<std::size_t>(q0.size()) != chain.dof()) {
    throw ValidationError("ik_solve: dim(q0) != joint count");
  }
  if (!chain.within_limits(q0)) {
    throw ValidationError("ik_solve: q0 outside joint limits");
  }
  const std::size_t n = chain.dof();
  JointVector q_rest = params.q_rest;
  if (q_rest.size() == 0) {
    q_rest.resize(n);
    for (std::size_t i = 0; i < n; ++i) q_rest[i] = 0.5 * (chain.joints[i].lo + chain.joints[i].hi);
  }

  IkSolution sol;
  sol.q = q0;
  double lambda = params.lambda0;
  Eigen::Matrix<double, 6, 1> err = task_error(target, fk(chain, sol.q));
  double err_norm = err.norm();

  auto candidate = [&](const Jacobian& jac, double damping, bool with_posture) -> JointVector {
    Eigen::MatrixXd damped =
        jac.transpose() * jac + damping * Eigen::MatrixXd::Identity(n, n);
    JointVector dq = Eigen::LDLT<Eigen::MatrixXd>(damped).solve(jac.transpose() * err);
    if (with_posture && params.null_space_gain > 0.0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
      Eigen::MatrixXd null_proj =
          Eigen::MatrixXd::Identity(n, n) - cod.pseudoInverse() * jac;
      dq += params.null_space_gain * (null_proj * (q_rest - sol.q));
    }
    for (std::size_t i = 0; i < n; ++i) {
      dq[i] = std::clamp(dq[i], -params.step_clamp, params.step_clamp);
    }
    return dq;
  };

  for (int iter = 0; iter < params.max_iters; ++iter) {
    sol.iterations = iter;
    sol.position_residual = err.head<3>().norm();
    sol.orientation_residual = err.tail<3>().norm();
    if (sol.position_residual <= params.pos_tolerance &&
        sol.orientation_residual <= params.ori_tolerance) {
      sol.converged = true;
      return sol;
    }

    Jacobian jac = jacobian(chain, sol.q);
    // posture shaping matters on approach; the final refinement is pure task,
    // so a nonzero gain can never hold the residual above tolerance
    const bool posture_active =
        err_norm > 10.0 * std::max(params.pos_tolerance, params.ori_tolerance);
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      // posture-regularized step first; if the null-space term blocks
      // progress, retry the pure task step at the same damping
      for (bool with_posture : {posture_active, false}) {
        JointVector q_new = chain.clamp(sol.q + candidate(jac, lambda, with_posture));
        Eigen::Matrix<double, 6, 1> err_new = task_error(target, fk(chain, q_new));
        if (err_new.norm() < err_norm) {
          sol.q = q_new;
          err = err_new;
          err_norm = err_new.norm();
          lambda = std::max(lambda * params.lambda_shrink, params.lambda_floor);
          accepted = true;
          break;
        }
        if (!with_posture || params.null_space_gain <= 0.0) break;
      }
      if (!accepted) {
        if (lambda >= params.lambda_cap) break;
        lambda = std::min(lambda * params.lambda_grow, params.lambda_cap);
      }
    }
    if (!accepted) break;  // stalled at the damping cap: report as-is
  }
  if (sol.iterations < params.max_iters) ++sol.iterations;
  sol.position_residual = err.head<3>().norm();
  sol.orientation_residual = err.tail<3>().norm();
  sol.converged = sol.position_residual <= params.pos_tolerance &&
                  sol.orientation_residual <= params.ori_tolerance;
  if (!sol.converged && params.null_space_gain > 0.0) {
    // posture shaping must not cost solutions: retry the pure task problem
    IkParams pure = params;
    pure.null_space_gain = 0.0;
    IkSolution fallback = ik_solve(chain, target, q0, pure);
    if (fallback.converged) return fallback;
  }
  return sol;
}

std::vector<IkSolution> ik_solve_batch(const KinematicChain& chain,
                                       const std::vector<Pose>& targets,
                                       const std::vector<JointVector>& seeds,
                                       const IkParams& params, int threads) {
  if (targets.size() != seeds.size()) {
    throw ValidationError("ik_solve_batch: |targets| != |seeds|");
  }
  std::vector<IkSolution> out(targets.size());
  if (targets.empty()) return out;
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(targets.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      out[i] = ik_solve(chain, targets[i], seeds[i], params);
    }
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= targets.size()) return;
        out[i] = ik_solve(chain, targets[i], seeds[i], params);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return out;
}

}  // namespace gk
