#include "graspkit/kinematics.hpp"

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "graspkit/common.hpp"

using namespace gk;

namespace {

JointVector jv(std::initializer_list<double> vals) {
  JointVector q(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) q[i++] = v;
  return q;
}

JointVector random_config(const KinematicChain& chain, Rng& rng) {
  JointVector q(chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    q[i] = rng.uniform(chain.joints[i].lo, chain.joints[i].hi);
  }
  return q;
}

// central-difference geometric Jacobian, the oracle for the analytic one
Jacobian fd_jacobian(const KinematicChain& chain, const JointVector& q, double h = 1e-6) {
  Jacobian jac(6, chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    JointVector qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    Pose pp = fk(chain, qp);
    Pose pm = fk(chain, qm);
    jac.col(i).head<3>() = (pp.translation - pm.translation) / (2 * h);
    jac.col(i).tail<3>() = orientation_error(pp.rotation, pm.rotation) / (2 * h);
  }
  return jac;
}

}  // namespace

TEST_CASE("2R chain at zero reaches (2,0,0)") {
  KinematicChain chain = fixtures::planar_2r();
  chain.validate();
  Pose ee = fk(chain, jv({0, 0}));
  CHECK((ee.translation - Vec3(2, 0, 0)).norm() < 1e-12);
}

TEST_CASE("2R chain at (90deg, 0) reaches (0,2,0)") {
  Pose ee = fk(fixtures::planar_2r(), jv({M_PI_2, 0}));
  CHECK((ee.translation - Vec3(0, 2, 0)).norm() < 1e-12);
}

TEST_CASE("slide joint translates the end effector along its axis") {
  Pose ee = fk(fixtures::single_slide(), jv({0.3}));
  CHECK((ee.translation - Vec3(0, 0, 0.3)).norm() < 1e-15);
}

TEST_CASE("fk rejects dimension mismatches") {
  CHECK_THROWS_AS(fk(fixtures::planar_2r(), jv({0.0})), ValidationError);
  CHECK_THROWS_AS(jacobian(fixtures::planar_2r(), jv({0.0, 0.0, 0.0})), ValidationError);
}

TEST_CASE("2R Jacobian at zero matches the closed form") {
  Jacobian jac = jacobian(fixtures::planar_2r(), jv({0, 0}));
  CHECK((jac.col(0).head<3>() - Vec3(0, 2, 0)).norm() < 1e-12);
  CHECK((jac.col(1).head<3>() - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK((jac.col(0).tail<3>() - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("slide-only chain has zero angular rows") {
  Jacobian jac = jacobian(fixtures::single_slide(), jv({0.2}));
  CHECK(jac.col(0).tail<3>().norm() == 0.0);
  CHECK((jac.col(0).head<3>() - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("analytic Jacobian matches finite differences on random configurations") {
  KinematicChain chain = fixtures::arm_7dof();
  chain.validate();
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    JointVector q = random_config(chain, rng);
    Jacobian analytic = jacobian(chain, q);
    Jacobian fd = fd_jacobian(chain, q);
    CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("ik reaches the stretched boundary target from a perturbed seed") {
  KinematicChain chain = fixtures::planar_2r();
  IkParams params;
  params.pos_tolerance = 1e-7;
  params.max_iters = 500;
  IkSolution sol = ik_solve(chain, Pose::from_translation(Vec3(2, 0, 0)), jv({0.1, -0.1}),
                            params);
  CHECK(sol.converged);
  CHECK((fk(chain, sol.q).translation - Vec3(2, 0, 0)).norm() < 1e-6);
  // the boundary point is reached only by q = (0, 0); the quadratic
  // singularity means 1e-7 task error bounds |q| near sqrt-scale
  CHECK(sol.q.norm() < 2e-3);
}

TEST_CASE("ik solution for (1,1,0) matches an analytic 2R solution") {
  KinematicChain chain = fixtures::planar_2r();
  IkParams params;
  params.pos_tolerance = 1e-8;
  IkSolution sol = ik_solve(chain, Pose::from_translation(Vec3(1, 1, 0)), jv({0.3, 0.3}),
                            params);
  REQUIRE(sol.converged);
  CHECK((fk(chain, sol.q).translation - Vec3(1, 1, 0)).norm() < 1e-6);
  // closed-form solutions: (0, pi/2) and (pi/2, -pi/2)
  double d1 = (sol.q - jv({0, M_PI_2})).norm();
  double d2 = (sol.q - jv({M_PI_2, -M_PI_2})).norm();
  CHECK(std::min(d1, d2) < 1e-4);
}

TEST_CASE("unreachable target reports non-convergence with a residual") {
  KinematicChain chain = fixtures::planar_2r();
  IkSolution sol = ik_solve(chain, Pose::from_translation(Vec3(3, 0, 0)), jv({0.2, 0.2}));
  CHECK(!sol.converged);
  CHECK(sol.position_residual > 0.5);
}

TEST_CASE("ik rejects seeds outside the limits") {
  KinematicChain chain = fixtures::planar_2r();
  CHECK_THROWS_AS(ik_solve(chain, Pose::identity(), jv({10.0, 0.0})), ValidationError);
}

TEST_CASE("position-only convergence: orientation is also solved for fk targets") {
  KinematicChain chain = fixtures::arm_7dof();
  Rng rng(7);
  JointVector q_true = random_config(chain, rng);
  Pose target = fk(chain, q_true);
  JointVector seed = chain.clamp(q_true + JointVector::Constant(7, 0.1));
  IkSolution sol = ik_solve(chain, target, seed);
  REQUIRE(sol.converged);
  Pose reached = fk(chain, sol.q);
  CHECK((reached.translation - target.translation).norm() <= 1e-5);
  CHECK(geodesic_angle(reached.rotation, target.rotation) <= 2e-4);
}

TEST_CASE("fk/ik round trip succeeds for at least 90% of noisy seeds") {
  KinematicChain chain = fixtures::arm_7dof();
  Rng rng(31);
  int converged = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    JointVector q_true = random_config(chain, rng);
    Pose target = fk(chain, q_true);
    JointVector noise(7);
    for (int i = 0; i < 7; ++i) noise[i] = rng.uniform(-0.3, 0.3);
    JointVector seed = chain.clamp(q_true + noise);
    IkSolution sol = ik_solve(chain, target, seed);
    if (sol.converged) {
      ++converged;
      CHECK(chain.within_limits(sol.q));
      CHECK(sol.position_residual <= 1e-5);
      CHECK(sol.orientation_residual <= 1e-4);
    }
  }
  CHECK(converged >= 900);
}

TEST_CASE("null-space posture term never breaks convergence") {
  KinematicChain chain = fixtures::arm_7dof();
  Rng rng(67);
  IkParams no_ns;
  no_ns.null_space_gain = 0.0;
  IkParams with_ns;
  with_ns.null_space_gain = 0.3;
  for (int t = 0; t < 50; ++t) {
    JointVector q_true = random_config(chain, rng);
    Pose target = fk(chain, q_true);
    JointVector noise(7);
    for (int i = 0; i < 7; ++i) noise[i] = rng.uniform(-0.2, 0.2);
    JointVector seed = chain.clamp(q_true + noise);
    IkSolution plain = ik_solve(chain, target, seed, no_ns);
    if (!plain.converged) continue;
    IkSolution reg = ik_solve(chain, target, seed, with_ns);
    CHECK(reg.converged);
    CHECK(reg.position_residual <= with_ns.pos_tolerance);
  }
}

TEST_CASE("batch solves equal sequential solves bitwise and keep order") {
  KinematicChain chain = fixtures::arm_7dof();
  Rng rng(97);
  std::vector<Pose> targets;
  std::vector<JointVector> seeds;
  for (int t = 0; t < 64; ++t) {
    JointVector q_true = random_config(chain, rng);
    targets.push_back(fk(chain, q_true));
    JointVector noise(7);
    for (int i = 0; i < 7; ++i) noise[i] = rng.uniform(-0.2, 0.2);
    seeds.push_back(chain.clamp(q_true + noise));
  }
  auto parallel = ik_solve_batch(chain, targets, seeds, {}, 4);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    IkSolution seq = ik_solve(chain, targets[i], seeds[i]);
    CHECK(seq.converged == parallel[i].converged);
    CHECK(seq.iterations == parallel[i].iterations);
    CHECK(seq.q == parallel[i].q);  // bitwise
  }
}

TEST_CASE("batch of one equals ik_solve and empty batch is empty") {
  KinematicChain chain = fixtures::planar_2r();
  Pose target = Pose::from_translation(Vec3(1, 1, 0));
  auto batch = ik_solve_batch(chain, {target}, {jv({0.3, 0.3})});
  IkSolution single = ik_solve(chain, target, jv({0.3, 0.3}));
  REQUIRE(batch.size() == 1);
  CHECK(batch[0].q == single.q);
  CHECK(ik_solve_batch(chain, {}, {}).empty());
  CHECK_THROWS_AS(ik_solve_batch(chain, {target}, {}), ValidationError);
}
