#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/scene.hpp"

namespace gk {

struct SettleResult {
  WorldState state;
  std::vector<double> final_window_displacement;  // per body, over the last 1 s
  double max_displacement = 0.0;
};

struct SweepResult {
  double reached_fraction = 0.0;  // absolute joint position as a range fraction
  double completed = 1.0;         // share of the commanded motion accomplished
  std::vector<std::string> blockers;  // sorted ids touching the subtree at the stop
  WorldState state;               // joint left at the reached position
};

struct ContactImpulse {
  int body_a = -1;
  int body_b = -1;
  Vec3 point{0, 0, 0};
  Vec3 normal{0, 0, 0};       // from a toward b
  double normal_impulse = 0;  // N s accumulated over the step
};

// Simulation backend contract. Any implementation of these four operations is
// usable by the scene QA and grasp verification layers.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual WorldState step(const SceneGraph& scene, const WorldState& state, double dt) const = 0;
  virtual SettleResult settle(const SceneGraph& scene, const WorldState& state,
                              double duration) const = 0;
  virtual WorldState apply_external_force(const SceneGraph& scene, const WorldState& state,
                                          const std::string& body_id, const Vec3& force,
                                          double duration) const = 0;
  virtual SweepResult kinematic_joint_sweep(const SceneGraph& scene, const WorldState& state,
                                            const std::string& joint_id, double target_fraction,
                                            int steps) const = 0;

  // Optional richer step for support-fraction analysis; the default discards
  // contact information.
  virtual WorldState step_with_contacts(const SceneGraph& scene, const WorldState& state,
                                        double dt, std::vector<ContactImpulse>* contacts) const {
    if (contacts) contacts->clear();
    return step(scene, state, dt);
  }
};

struct EngineParams {
  double default_dt = 2e-3;        // s
  int solver_iterations = 20;
  double baumgarte = 0.2;
  double contact_slop = 5e-4;      // m of tolerated rest penetration
  double contact_tolerance = 1e-3; // m, manifold activation distance
  double max_depenetration_speed = 0.05;  // m/s cap on the Baumgarte push
  double sleep_linear = 1e-4;      // m/s
  double sleep_angular = 1e-3;     // rad/s
  double sleep_delay = 0.5;        // s below threshold before freezing
  double sweep_block_depth = 2e-3; // m, penetration that counts as blocking
};

// Deterministic impulse-based rigid-body backend: semi-implicit Euler,
// projected contact impulses with Coulomb friction, Baumgarte stabilization,
// zero restitution. Joint-driven bodies move only kinematically.
class BuiltinBackend : public Backend {
 public:
  explicit BuiltinBackend(EngineParams params = {}) : params_(params) {}

  WorldState step(const SceneGraph& scene, const WorldState& state, double dt) const override;
  SettleResult settle(const SceneGraph& scene, const WorldState& state,
                      double duration) const override;
  WorldState apply_external_force(const SceneGraph& scene, const WorldState& state,
                                  const std::string& body_id, const Vec3& force,
                                  double duration) const override;
  SweepResult kinematic_joint_sweep(const SceneGraph& scene, const WorldState& state,
                                    const std::string& joint_id, double target_fraction,
                                    int steps) const override;
  WorldState step_with_contacts(const SceneGraph& scene, const WorldState& state, double dt,
                                std::vector<ContactImpulse>* contacts) const override;

  const EngineParams& params() const { return params_; }

 private:
  EngineParams params_;
};

// Body ids of the kinematic subtree moved by a joint: the child and every
// body attached below it through further joints.
std::vector<int> joint_subtree(const SceneGraph& scene, int joint_index);

// Conformance checks for a backend implementation: determinism of step and
// sweep, all-fixed invariance, and force bookkeeping. Returns human-readable
// violations; empty means conformant.
std::vector<std::string> backend_conformance(const Backend& backend, const SceneGraph& scene,
                                             const WorldState& state);

}  // namespace gk
