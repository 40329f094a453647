#include "graspkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "graspkit/common.hpp"

namespace gk {

namespace {

enum class Role { Dynamic, Kinematic, Slaved };

struct ContactConstraint {
  int a, b;
  Vec3 point, normal, t1, t2;
  Vec3 ra, rb;
  double bias = 0;
  double friction = 0;
  double mass_n = 0, mass_t1 = 0, mass_t2 = 0;
  double impulse_n = 0, impulse_t1 = 0, impulse_t2 = 0;
};

struct DynState {
  double inv_mass = 0;
  Mat3 inv_inertia = Mat3::Zero();  // world frame
};

void check_finite(const SceneGraph& scene, const WorldState& state, const char* where) {
  for (std::size_t i = 0; i < state.bodies.size(); ++i) {
    const BodyState& b = state.bodies[i];
    if (!b.pose.translation.allFinite() || !b.pose.rotation.coeffs().allFinite() ||
        !b.linear_velocity.allFinite() || !b.angular_velocity.allFinite()) {
      throw NumericalError(std::string(where) + ": NaN in state of body '" +
                           scene.bodies[i].id + "'");
    }
  }
}

double pair_friction(double a, double b) { return std::sqrt(a * b); }

}  // namespace

std::vector<int> joint_subtree(const SceneGraph& scene, int joint_index) {
  std::vector<int> out;
  std::vector<int> frontier{scene.body_index(scene.joints[joint_index].child)};
  while (!frontier.empty()) {
    int b = frontier.back();
    frontier.pop_back();
    out.push_back(b);
    for (const JointSpec& j : scene.joints) {
      if (j.parent == scene.bodies[b].id) {
        frontier.push_back(scene.body_index(j.child));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

WorldState BuiltinBackend::step_with_contacts(const SceneGraph& scene, const WorldState& state,
                                              double dt,
                                              std::vector<ContactImpulse>* contacts_out) const {
  if (contacts_out) contacts_out->clear();
  if (dt < 1e-4 - 1e-12 || dt > 1e-2 + 1e-12) {
    throw ValidationError("step: dt must be within [1e-4, 1e-2] s");
  }
  if (state.bodies.size() != scene.bodies.size()) {
    throw ValidationError("step: state does not match scene body count");
  }
  check_finite(scene, state, "step");

  WorldState next = state;
  propagate_joint_poses(scene, next);

  const std::size_t n = scene.bodies.size();
  std::vector<Role> role(n, Role::Dynamic);
  for (std::size_t i = 0; i < n; ++i) {
    if (scene.parent_joint_of(static_cast<int>(i)) >= 0) {
      role[i] = Role::Slaved;
    } else if (scene.bodies[i].fixed()) {
      role[i] = Role::Kinematic;
    }
  }

  // velocity integration: gravity plus pending external forces
  std::vector<DynState> dyn(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (role[i] != Role::Dynamic) continue;
    const BodySpec& spec = scene.bodies[i];
    dyn[i].inv_mass = 1.0 / spec.mass;
    Mat3 r = next.bodies[i].pose.rotation_matrix();
    dyn[i].inv_inertia = r * spec.inertia.inverse() * r.transpose();
    if (!next.bodies[i].asleep) {
      next.bodies[i].linear_velocity += dt * scene.gravity;
    }
  }
  for (const PendingForce& f : next.pending_forces) {
    if (f.body < 0 || role[f.body] != Role::Dynamic) continue;
    double scale = std::min(f.remaining, dt) / dt;
    next.bodies[f.body].asleep = false;
    next.bodies[f.body].linear_velocity += dt * scale * f.force * dyn[f.body].inv_mass;
  }

  // contact generation at current poses
  std::vector<ContactConstraint> constraints;
  std::vector<double> deepest(n, 0.0);  // per-body max penetration, gates sleeping
  for (std::size_t a = 0; a < n; ++a) {
    if (scene.bodies[a].colliders.empty()) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (scene.bodies[b].colliders.empty()) continue;
      bool a_static = role[a] != Role::Dynamic || next.bodies[a].asleep;
      bool b_static = role[b] != Role::Dynamic || next.bodies[b].asleep;
      if (a_static && b_static) continue;
      Aabb box_a = body_aabb(scene.bodies[a].colliders, next.bodies[a].pose);
      Aabb box_b = body_aabb(scene.bodies[b].colliders, next.bodies[b].pose);
      if (!box_a.inflated(params_.contact_tolerance).overlaps(box_b)) continue;
      double mu = pair_friction(scene.bodies[a].friction, scene.bodies[b].friction);
      for (const ConvexPiece& pa : scene.bodies[a].colliders) {
        for (const ConvexPiece& pb : scene.bodies[b].colliders) {
          auto manifold = contact_manifold(pa, next.bodies[a].pose, pb, next.bodies[b].pose,
                                           params_.contact_tolerance);
          if (!manifold) continue;
          for (const ContactPoint& cp : manifold->points) {
            deepest[a] = std::max(deepest[a], cp.depth);
            deepest[b] = std::max(deepest[b], cp.depth);
            ContactConstraint c;
            c.a = static_cast<int>(a);
            c.b = static_cast<int>(b);
            c.point = cp.point;
            c.normal = manifold->normal;
            c.t1 = any_perpendicular(c.normal);
            c.t2 = c.normal.cross(c.t1);
            c.ra = cp.point - next.bodies[a].pose.translation;
            c.rb = cp.point - next.bodies[b].pose.translation;
            c.bias = std::min(params_.baumgarte / dt * std::max(0.0, cp.depth - params_.contact_slop),
                              params_.max_depenetration_speed);
            c.friction = mu;
            auto eff_mass = [&](const Vec3& d) {
              double k = dyn[a].inv_mass + dyn[b].inv_mass;
              Vec3 rad = c.ra.cross(d);
              Vec3 rbd = c.rb.cross(d);
              k += d.dot((dyn[a].inv_inertia * rad).cross(c.ra));
              k += d.dot((dyn[b].inv_inertia * rbd).cross(c.rb));
              return k > 1e-12 ? 1.0 / k : 0.0;
            };
            c.mass_n = eff_mass(c.normal);
            c.mass_t1 = eff_mass(c.t1);
            c.mass_t2 = eff_mass(c.t2);
            constraints.push_back(c);
          }
        }
      }
    }
  }

  // Projected impulse iterations in fixed order for determinism. Normals are
  // solved to convergence first: normal impulses alone cannot spin a body
  // about the contact normal, so the friction phase then starts from a clean
  // velocity field instead of feeding on transient torque waves.
  auto rel_vel = [&](const ContactConstraint& c) -> Vec3 {
    const BodyState& ba = next.bodies[c.a];
    const BodyState& bb = next.bodies[c.b];
    return bb.linear_velocity + bb.angular_velocity.cross(c.rb) - ba.linear_velocity -
           ba.angular_velocity.cross(c.ra);
  };
  auto apply = [&](const ContactConstraint& c, const Vec3& impulse) {
    BodyState& ba = next.bodies[c.a];
    BodyState& bb = next.bodies[c.b];
    ba.linear_velocity -= impulse * dyn[c.a].inv_mass;
    ba.angular_velocity -= dyn[c.a].inv_inertia * c.ra.cross(impulse);
    bb.linear_velocity += impulse * dyn[c.b].inv_mass;
    bb.angular_velocity += dyn[c.b].inv_inertia * c.rb.cross(impulse);
  };
  for (int iter = 0; iter < params_.solver_iterations; ++iter) {
    for (ContactConstraint& c : constraints) {
      double vn = c.normal.dot(rel_vel(c));
      double old_n = c.impulse_n;
      c.impulse_n = std::max(0.0, old_n + (c.bias - vn) * c.mass_n);
      apply(c, (c.impulse_n - old_n) * c.normal);
    }
  }
  for (int iter = 0; iter < params_.solver_iterations; ++iter) {
    for (ContactConstraint& c : constraints) {
      const double cap = c.friction * c.impulse_n;
      double vt1 = c.t1.dot(rel_vel(c));
      double old_t1 = c.impulse_t1;
      c.impulse_t1 = std::clamp(old_t1 - vt1 * c.mass_t1, -cap, cap);
      apply(c, (c.impulse_t1 - old_t1) * c.t1);

      double vt2 = c.t2.dot(rel_vel(c));
      double old_t2 = c.impulse_t2;
      c.impulse_t2 = std::clamp(old_t2 - vt2 * c.mass_t2, -cap, cap);
      apply(c, (c.impulse_t2 - old_t2) * c.t2);
    }
  }

  if (contacts_out) {
    for (const ContactConstraint& c : constraints) {
      contacts_out->push_back({c.a, c.b, c.point, c.normal, c.impulse_n});
    }
  }

  // position integration for dynamic and kinematic bodies, then slaved poses
  for (std::size_t i = 0; i < n; ++i) {
    BodyState& b = next.bodies[i];
    if (role[i] == Role::Slaved) continue;
    if (role[i] == Role::Dynamic && b.asleep) {
      double sp = b.linear_velocity.norm();
      double sa = b.angular_velocity.norm();
      if (sp > 2 * params_.sleep_linear || sa > 2 * params_.sleep_angular) {
        b.asleep = false;  // woken by contact impulses
        b.low_motion_time = 0;
      } else {
        b.linear_velocity.setZero();
        b.angular_velocity.setZero();
        continue;
      }
    }
    b.pose.translation += dt * b.linear_velocity;
    Vec3 w = b.angular_velocity;
    if (w.squaredNorm() > 0) {
      Quat dq(0, 0.5 * dt * w.x(), 0.5 * dt * w.y(), 0.5 * dt * w.z());
      Quat q = b.pose.rotation;
      q.coeffs() += (dq * q).coeffs();
      b.pose.rotation = canonicalized(q);
    }
    if (role[i] == Role::Dynamic) {
      bool slow = b.linear_velocity.norm() < params_.sleep_linear &&
                  b.angular_velocity.norm() < params_.sleep_angular &&
                  deepest[i] <= 2 * params_.contact_slop;
      b.low_motion_time = slow ? b.low_motion_time + dt : 0.0;
      if (b.low_motion_time >= params_.sleep_delay) {
        b.asleep = true;
        b.linear_velocity.setZero();
        b.angular_velocity.setZero();
      }
    }
  }
  propagate_joint_poses(scene, next);

  // consume pending forces
  std::vector<PendingForce> remaining;
  for (PendingForce f : next.pending_forces) {
    f.remaining -= dt;
    if (f.remaining > 1e-12) remaining.push_back(f);
  }
  next.pending_forces = std::move(remaining);

  check_finite(scene, next, "step(out)");
  return next;
}

WorldState BuiltinBackend::step(const SceneGraph& scene, const WorldState& state,
                                double dt) const {
  return step_with_contacts(scene, state, dt, nullptr);
}

SettleResult BuiltinBackend::settle(const SceneGraph& scene, const WorldState& state,
                                    double duration) const {
  if (!(duration > 0)) throw ValidationError("settle: duration must be positive");
  const double dt = params_.default_dt;
  const int steps = static_cast<int>(std::ceil(duration / dt));
  const int window_start = std::max(0, steps - static_cast<int>(std::round(1.0 / dt)));
  SettleResult result;
  result.state = state;
  result.final_window_displacement.assign(scene.bodies.size(), 0.0);
  std::vector<Vec3> window_ref(scene.bodies.size(), Vec3::Zero());
  for (int k = 0; k < steps; ++k) {
    if (k == window_start) {
      for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        window_ref[i] = result.state.bodies[i].pose.translation;
      }
    }
    result.state = step(scene, result.state, dt);
    if (k >= window_start) {
      for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        double d = (result.state.bodies[i].pose.translation - window_ref[i]).norm();
        result.final_window_displacement[i] = std::max(result.final_window_displacement[i], d);
      }
    }
  }
  result.max_displacement = 0;
  for (double d : result.final_window_displacement) {
    result.max_displacement = std::max(result.max_displacement, d);
  }
  return result;
}

WorldState BuiltinBackend::apply_external_force(const SceneGraph& scene, const WorldState& state,
                                                const std::string& body_id, const Vec3& force,
                                                double duration) const {
  int bi = scene.body_index(body_id);
  if (bi < 0) throw ValidationError("apply_external_force: unknown body '" + body_id + "'");
  if (scene.bodies[bi].fixed()) {
    throw ValidationError("apply_external_force: body '" + body_id + "' is fixed");
  }
  if (scene.parent_joint_of(bi) >= 0) {
    throw ValidationError("apply_external_force: body '" + body_id +
                          "' is joint-driven; actuate the joint instead");
  }
  WorldState next = state;
  if (force.squaredNorm() > 0.0) {
    next.pending_forces.push_back({bi, force, duration});
    next.bodies[bi].asleep = false;
    next.bodies[bi].low_motion_time = 0;
  }
  return next;
}

SweepResult BuiltinBackend::kinematic_joint_sweep(const SceneGraph& scene,
                                                  const WorldState& state,
                                                  const std::string& joint_id,
                                                  double target_fraction, int steps) const {
  int ji = scene.joint_index(joint_id);
  if (ji < 0) throw ValidationError("kinematic_joint_sweep: unknown joint '" + joint_id + "'");
  if (steps < 1) throw ValidationError("kinematic_joint_sweep: steps must be >= 1");
  target_fraction = std::clamp(target_fraction, 0.0, 1.0);
  const JointSpec& joint = scene.joints[ji];

  std::vector<int> subtree = joint_subtree(scene, ji);
  std::set<int> subtree_set(subtree.begin(), subtree.end());

  SweepResult result;
  result.state = state;
  propagate_joint_poses(scene, result.state);

  const double q_start = state.joint_positions[ji];
  const double q_target = joint.lo + target_fraction * joint.range();

  auto blockers_at = [&](WorldState& probe, double q) {
    probe.joint_positions[ji] = q;
    propagate_joint_poses(scene, probe);
    std::set<std::string> hit;
    for (int s : subtree) {
      if (scene.bodies[s].colliders.empty()) continue;
      for (std::size_t o = 0; o < scene.bodies.size(); ++o) {
        if (subtree_set.count(static_cast<int>(o))) continue;
        if (scene.bodies[o].colliders.empty()) continue;
        CollisionQuery q2 = collide_bodies(scene.bodies[s].colliders, probe.bodies[s].pose,
                                           scene.bodies[o].colliders, probe.bodies[o].pose);
        if (q2.contact && q2.contact->penetration > params_.sweep_block_depth) {
          hit.insert(scene.bodies[o].id);
        }
      }
    }
    return hit;
  };

  WorldState probe = result.state;
  double q_stop = q_start;
  std::set<std::string> first_blockers = blockers_at(probe, q_start);
  if (first_blockers.empty()) {
    for (int k = 1; k <= steps; ++k) {
      double q = q_start + (q_target - q_start) * k / steps;
      std::set<std::string> hit = blockers_at(probe, q);
      if (!hit.empty()) {
        first_blockers = std::move(hit);
        break;
      }
      q_stop = q;
    }
  }

  result.blockers.assign(first_blockers.begin(), first_blockers.end());
  result.reached_fraction = joint.range() > 0 ? (q_stop - joint.lo) / joint.range() : 0.0;
  result.completed = q_target == q_start
                         ? 1.0
                         : std::abs(q_stop - q_start) / std::abs(q_target - q_start);
  result.state.joint_positions[ji] = q_stop;
  propagate_joint_poses(scene, result.state);
  return result;
}

std::vector<std::string> backend_conformance(const Backend& backend, const SceneGraph& scene,
                                             const WorldState& state) {
  std::vector<std::string> violations;
  auto states_equal = [](const WorldState& a, const WorldState& b) {
    if (a.bodies.size() != b.bodies.size()) return false;
    for (std::size_t i = 0; i < a.bodies.size(); ++i) {
      if (a.bodies[i].pose.translation != b.bodies[i].pose.translation) return false;
      if (a.bodies[i].pose.rotation.coeffs() != b.bodies[i].pose.rotation.coeffs()) return false;
      if (a.bodies[i].linear_velocity != b.bodies[i].linear_velocity) return false;
      if (a.bodies[i].angular_velocity != b.bodies[i].angular_velocity) return false;
    }
    return a.joint_positions == b.joint_positions;
  };

  WorldState s1 = state, s2 = state;
  for (int k = 0; k < 50; ++k) {
    s1 = backend.step(scene, s1, 2e-3);
    s2 = backend.step(scene, s2, 2e-3);
  }
  if (!states_equal(s1, s2)) {
    violations.push_back("step is not deterministic over 50 iterations");
  }

  bool all_fixed = true;
  for (const BodySpec& b : scene.bodies) {
    if (!b.fixed()) all_fixed = false;
  }
  if (all_fixed && scene.joints.empty()) {
    WorldState stepped = backend.step(scene, state, 2e-3);
    if (!states_equal(stepped, state)) {
      violations.push_back("all-fixed scene changed under step");
    }
  }

  for (const BodySpec& b : scene.bodies) {
    if (!b.fixed()) continue;
    try {
      backend.apply_external_force(scene, state, b.id, Vec3(0, 0, 1), 0.1);
      violations.push_back("apply_external_force accepted a fixed body");
    } catch (const std::exception&) {
      // expected
    }
    break;
  }

  if (!scene.joints.empty()) {
    SweepResult r1 = backend.kinematic_joint_sweep(scene, state, scene.joints[0].id, 1.0, 64);
    SweepResult r2 = backend.kinematic_joint_sweep(scene, state, scene.joints[0].id, 1.0, 64);
    if (r1.reached_fraction != r2.reached_fraction || r1.blockers != r2.blockers) {
      violations.push_back("kinematic_joint_sweep is not deterministic");
    }
  }
  return violations;
}

}  // namespace gk
