#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/bvh.hpp"
#include "graspkit/gripper.hpp"
#include "graspkit/scene.hpp"

namespace gk {

struct ContactPair {
  Vec3 p1{0, 0, 0};  // object frame, m
  Vec3 p2{0, 0, 0};
  Vec3 n1{0, 0, 1};  // outward unit normals at the contacts
  Vec3 n2{0, 0, -1};

  double width() const { return (p2 - p1).norm(); }
  Vec3 closing_dir() const { return (p2 - p1) / width(); }
};

struct GraspFlags {
  bool collision_free_isolated = false;
  bool robust = false;
  bool in_situ_ok = false;
};

struct GraspCandidate {
  Pose pose;  // gripper frame in object frame
  ContactPair contacts;
  int roll_index = 0;
  double bias_score = 0.0;
  GraspFlags flags;
};

struct ScoredPair {
  ContactPair pair;
  double bias_score;
};

// An articulated grasp target: the object fragment, the joint to actuate,
// and the leaf (handle) body the grasp must attach to.
struct ArticulatedTarget {
  SceneGraph object;
  std::string joint_id;
  std::string leaf_body;

  void validate() const;  // joint exists, leaf is on the child side
};

// Antipodal pair sampling: surface points are cast along their inward normal;
// a hit is accepted when the pair fits in the jaw and both normals lie within
// `friction_angle` of the closing line. Deterministic for a given seed.
std::vector<ContactPair> sample_antipodal(const TriangleMesh& mesh, const GripperSpec& gripper,
                                          std::size_t n, std::uint64_t seed,
                                          double friction_angle = 15.0 * M_PI / 180.0);

// Score of a contact located at (y_off, z_off) from the pad center. Peaks at
// the pad center, or at the distal pad edge for thin objects, and falls to
// zero at the farthest pad corner.
double pad_bias_score(double y_off, double z_off, const GripperSpec& gripper, bool thin);

// How deep the palm can approach: distance from the palm face to the contact
// line, limited by the object extent behind the contact and clamped so the
// contact stays on the pad.
double insertion_depth(const GripperSpec& gripper, const ContactPair& pair,
                       const Vec3& object_extent, bool thin);

constexpr double kThinObjectExtent = 0.012;  // m, threshold for edge biasing

// Pads score higher the closer the achievable contact location sits to the
// preferred pad point. Output sorted by descending score (stable).
std::vector<ScoredPair> bias_contacts(const std::vector<ContactPair>& pairs,
                                      const GripperSpec& gripper, const Vec3& object_extent);

// Realize a contact pair as 6-DoF gripper poses: closing axis along p2 - p1,
// pads covering the contacts symmetrically, `rolls` orientations evenly
// spaced about the closing axis. Insertion depth uses the object extent when
// given, else the pad center.
std::vector<GraspCandidate> grasp_poses_from_pair(const ContactPair& pair,
                                                  const GripperSpec& gripper, int rolls,
                                                  double bias_score = 0.0,
                                                  const std::optional<Vec3>& object_extent =
                                                      std::nullopt);

struct FilterReport {
  GraspCandidate candidate;
  bool pregrasp_clear = true;
  bool grasp_clear = true;
  bool trajectory_clear = true;
  int first_blocked_step = -1;  // 0 = pre-grasp, 11 = grasp, 1..10 = approach
};

// Collision checks with the jaw opened to width + 5 mm: pre-grasp pose
// (pregrasp_offset back along local z), the grasp pose, and 10 interpolated
// poses. Candidates are flagged, never dropped. When a scene is given, the
// checks also run against every scene body (object pose taken from `state`).
FilterReport collision_filter(const GraspCandidate& candidate, const MeshBvh& object_bvh,
                              const GripperSpec& gripper, const SceneGraph* scene = nullptr,
                              const WorldState* state = nullptr,
                              const std::string& object_id = "");

// Greedy farthest-point clustering under the SE(3) pose metric; one
// representative per cluster by highest bias score, emitted in cluster
// creation order so every prefix is itself diverse. Zero-distance duplicates
// collapse.
std::vector<GraspCandidate> cluster_and_select(const std::vector<GraspCandidate>& candidates,
                                               std::size_t max_out = 1000,
                                               double rot_weight = 0.05);

// Leaf-restricted sampling for articulated objects: surface samples come from
// the leaf body's collider mesh only, and pairs whose closing segment sweeps
// through non-leaf geometry are discarded.
std::vector<ContactPair> sample_articulated(const ArticulatedTarget& target,
                                            const GripperSpec& gripper, std::size_t n,
                                            std::uint64_t seed,
                                            double friction_angle = 15.0 * M_PI / 180.0);

}  // namespace gk
