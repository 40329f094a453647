#include "graspkit/grasp_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graspkit/common.hpp"

namespace gk {

void ArticulatedTarget::validate() const {
  object.validate();
  int ji = object.joint_index(joint_id);
  if (ji < 0) throw ValidationError("articulated target: unknown joint '" + joint_id + "'");
  // the leaf must sit on the child side of the joint
  int leaf = object.body_index(leaf_body);
  if (leaf < 0) throw ValidationError("articulated target: unknown leaf body '" + leaf_body + "'");
  std::string cur = leaf_body;
  const std::string& child = object.joints[ji].child;
  for (std::size_t guard = 0; guard <= object.joints.size(); ++guard) {
    if (cur == child) return;
    int pj = object.parent_joint_of(object.body_index(cur));
    if (pj < 0) break;
    cur = object.joints[pj].parent;
  }
  throw ValidationError("articulated target: leaf '" + leaf_body +
                        "' is not on the child side of joint '" + joint_id + "'");
}

std::vector<ContactPair> sample_antipodal(const TriangleMesh& mesh, const GripperSpec& gripper,
                                          std::size_t n, std::uint64_t seed,
                                          double friction_angle) {
  if (n == 0) throw ValidationError("sample_antipodal: n must be >= 1");
  if (!(friction_angle > 0.0) || !(friction_angle < M_PI_2)) {
    throw ValidationError("sample_antipodal: friction angle must be in (0, pi/2)");
  }
  gripper.validate();
  const double cos_cone = std::cos(friction_angle);
  MeshBvh bvh(mesh);
  std::vector<ContactPair> out;
  for (const SurfaceSample& s : surface_sample(mesh, n, seed)) {
    auto hit = bvh.ray_cast(s.point, -s.normal);
    if (!hit) continue;
    ContactPair pair{s.point, hit->point, s.normal, hit->normal};
    double w = pair.width();
    if (w < 1e-6 || w > gripper.max_opening) continue;
    Vec3 d = (pair.p2 - pair.p1) / w;
    if (pair.n1.dot(-d) < cos_cone) continue;
    if (pair.n2.dot(d) < cos_cone) continue;
    out.push_back(pair);
  }
  return out;
}

double pad_bias_score(double y_off, double z_off, const GripperSpec& gripper, bool thin) {
  const double w = gripper.pad_width, h = gripper.pad_height;
  const double target_z = thin ? 0.5 * h : 0.0;
  const double dist = std::hypot(y_off, z_off - target_z);
  const double dist_max = thin ? std::hypot(0.5 * w, h) : std::hypot(0.5 * w, 0.5 * h);
  return std::clamp(1.0 - dist / dist_max, 0.0, 1.0);
}

double insertion_depth(const GripperSpec& gripper, const ContactPair& pair,
                       const Vec3& object_extent, bool thin) {
  Vec3 d = pair.closing_dir();
  // object half-extent behind the contact midline along the best approach
  // direction perpendicular to the closing axis (AABB proxy)
  double blocked = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    Vec3 u = Vec3::Unit(k) - Vec3::Unit(k).dot(d) * d;
    double len = u.norm();
    if (len < 1e-9) continue;
    u /= len;
    double width = 0.0;
    for (int j = 0; j < 3; ++j) width += object_extent[j] * std::abs(u[j]);
    blocked = std::min(blocked, 0.5 * width);
  }
  if (!std::isfinite(blocked)) blocked = 0.0;
  const double desired = thin ? gripper.finger_length : gripper.pad_center_depth();
  return std::clamp(std::max(desired, blocked), gripper.finger_length - gripper.pad_height,
                    gripper.finger_length);
}

std::vector<ScoredPair> bias_contacts(const std::vector<ContactPair>& pairs,
                                      const GripperSpec& gripper, const Vec3& object_extent) {
  const bool thin = object_extent.minCoeff() < kThinObjectExtent;
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  for (const ContactPair& pair : pairs) {
    double s = insertion_depth(gripper, pair, object_extent, thin);
    double z_off = s - gripper.pad_center_depth();
    out.push_back({pair, pad_bias_score(0.0, z_off, gripper, thin)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredPair& a, const ScoredPair& b) {
                     return a.bias_score > b.bias_score;
                   });
  return out;
}

std::vector<GraspCandidate> grasp_poses_from_pair(const ContactPair& pair,
                                                  const GripperSpec& gripper, int rolls,
                                                  double bias_score,
                                                  const std::optional<Vec3>& object_extent) {
  if (rolls < 1) throw ValidationError("grasp_poses_from_pair: rolls must be >= 1");
  double w = pair.width();
  if (w < 1e-6) throw ValidationError("grasp_poses_from_pair: degenerate pair (zero width)");
  Vec3 x = (pair.p2 - pair.p1) / w;
  Vec3 z0 = x.cross(any_perpendicular(x));
  Vec3 mid = 0.5 * (pair.p1 + pair.p2);
  bool thin = object_extent && object_extent->minCoeff() < kThinObjectExtent;
  double s = object_extent ? insertion_depth(gripper, pair, *object_extent, thin)
                           : gripper.pad_center_depth();
  std::vector<GraspCandidate> out;
  out.reserve(rolls);
  for (int k = 0; k < rolls; ++k) {
    double theta = 2.0 * M_PI * k / rolls;
    Vec3 z = Quat(Eigen::AngleAxisd(theta, x)) * z0;
    Vec3 y = z.cross(x);
    Mat3 rot;
    rot.col(0) = x;
    rot.col(1) = y;
    rot.col(2) = z;
    GraspCandidate c;
    c.pose = Pose::make(mid - s * z, Quat(rot));
    c.contacts = pair;
    c.roll_index = k;
    c.bias_score = bias_score;
    out.push_back(c);
  }
  return out;
}

FilterReport collision_filter(const GraspCandidate& candidate, const MeshBvh& object_bvh,
                              const GripperSpec& gripper, const SceneGraph* scene,
                              const WorldState* state, const std::string& object_id) {
  FilterReport report;
  report.candidate = candidate;
  const double opening = std::min(candidate.contacts.width() + 5e-3, gripper.max_opening);
  std::vector<ConvexPiece> shapes = gripper.collision_shapes(opening);

  const Pose grasp = candidate.pose;
  const Pose pregrasp = grasp * Pose::from_translation(Vec3(0, 0, -gripper.pregrasp_offset));
  std::vector<Pose> path;
  for (int k = 0; k <= 11; ++k) {
    double t = k / 11.0;
    path.push_back(Pose::make((1 - t) * pregrasp.translation + t * grasp.translation,
                              grasp.rotation));
  }

  int object_index = -1;
  Pose object_pose;  // identity: candidate poses live in the object frame
  if (scene) {
    object_index = scene->body_index(object_id);
    if (object_index < 0) {
      throw ValidationError("collision_filter: unknown object '" + object_id + "'");
    }
    object_pose = state ? state->bodies[object_index].pose
                        : scene->bodies[object_index].initial_pose;
  }

  bool isolated_clear = true;
  for (int k = 0; k < static_cast<int>(path.size()); ++k) {
    bool hit = false;
    for (const ConvexPiece& shape : shapes) {
      if (auto c = collide_piece_mesh(shape, path[k], object_bvh, Pose::identity());
          c && c->penetration > 1e-5) {
        hit = true;
        break;
      }
    }
    if (hit) {
      isolated_clear = false;
      if (report.first_blocked_step < 0) report.first_blocked_step = k;
    }

    if (scene) {
      bool scene_hit = hit;
      Pose world = object_pose * path[k];
      for (std::size_t b = 0; b < scene->bodies.size() && !scene_hit; ++b) {
        if (static_cast<int>(b) == object_index) continue;  // already checked via the mesh
        if (scene->bodies[b].colliders.empty()) continue;
        Pose body_pose = state ? state->bodies[b].pose : scene->bodies[b].initial_pose;
        for (const ConvexPiece& shape : shapes) {
          CollisionQuery q = collide_bodies({shape}, world, scene->bodies[b].colliders,
                                            body_pose);
          if (q.contact && q.contact->penetration > 1e-5) {
            scene_hit = true;
            break;
          }
        }
      }
      if (scene_hit) {
        if (k == 0) {
          report.pregrasp_clear = false;
        } else if (k == 11) {
          report.grasp_clear = false;
        } else {
          report.trajectory_clear = false;
        }
        if (report.first_blocked_step < 0) report.first_blocked_step = k;
      }
    }
  }
  report.candidate.flags.collision_free_isolated = isolated_clear;
  report.candidate.flags.in_situ_ok =
      scene && report.pregrasp_clear && report.grasp_clear && report.trajectory_clear;
  return report;
}

std::vector<GraspCandidate> cluster_and_select(const std::vector<GraspCandidate>& candidates,
                                               std::size_t max_out, double rot_weight) {
  if (max_out < 1) throw ValidationError("cluster_and_select: max_out must be >= 1");
  if (candidates.empty()) return {};
  const std::size_t n = candidates.size();
  const std::size_t k_max = std::min(max_out, n);

  // seed with the best-scored candidate, then greedy farthest-point traversal
  std::size_t seed = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (candidates[i].bias_score > candidates[seed].bias_score) seed = i;
  }
  std::vector<std::size_t> centers{seed};
  std::vector<double> dist(n);
  std::vector<std::size_t> nearest(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = pose_distance(candidates[i].pose, candidates[seed].pose, rot_weight);
  }
  while (centers.size() < k_max) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (dist[i] > dist[far]) far = i;
    }
    if (dist[far] <= 0.0) break;  // every remaining pose duplicates a center
    std::size_t ci = centers.size();
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) {
      double d = pose_distance(candidates[i].pose, candidates[far].pose, rot_weight);
      if (d < dist[i]) {
        dist[i] = d;
        nearest[i] = ci;
      }
    }
  }

  // best-biased representative per cluster (the center wins ties), emitted in
  // center order
  std::vector<std::size_t> rep(centers.begin(), centers.end());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = nearest[i];
    if (candidates[i].bias_score > candidates[rep[c]].bias_score) rep[c] = i;
  }
  std::vector<GraspCandidate> out;
  out.reserve(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) out.push_back(candidates[rep[c]]);
  return out;
}

std::vector<ContactPair> sample_articulated(const ArticulatedTarget& target,
                                            const GripperSpec& gripper, std::size_t n,
                                            std::uint64_t seed, double friction_angle) {
  target.validate();
  const BodySpec& leaf = target.object.body(target.leaf_body);
  if (leaf.colliders.empty()) {
    throw ValidationError("sample_articulated: leaf body '" + target.leaf_body +
                          "' has no collider geometry");
  }
  TriangleMesh leaf_mesh = body_to_mesh(leaf.colliders);
  std::vector<ContactPair> pairs =
      sample_antipodal(leaf_mesh, gripper, n, seed, friction_angle);

  // drop pairs whose closing segment sweeps through non-leaf geometry
  const Pose leaf_pose = leaf.initial_pose;
  std::vector<ContactPair> out;
  for (const ContactPair& pair : pairs) {
    Vec3 a = leaf_pose.apply(pair.p1);
    Vec3 b = leaf_pose.apply(pair.p2);
    Vec3 mid = 0.5 * (a + b);
    Vec3 d = (b - a).normalized();
    Vec3 ref = any_perpendicular(d);
    Mat3 rot;
    rot.col(0) = ref;
    rot.col(1) = d.cross(ref);
    rot.col(2) = d;
    ConvexPiece sweep = ConvexPiece::capsule(0.5 * gripper.finger_thickness,
                                             0.5 * (b - a).norm());
    Pose sweep_pose = Pose::make(mid, Quat(rot));
    bool clipped = false;
    for (const BodySpec& body : target.object.bodies) {
      if (body.id == target.leaf_body || body.colliders.empty()) continue;
      CollisionQuery q =
          collide_bodies({sweep}, sweep_pose, body.colliders, body.initial_pose);
      if (q.contact && q.contact->penetration > 1e-5) {
        clipped = true;
        break;
      }
    }
    if (!clipped) out.push_back(pair);
  }
  return out;
}

}  // namespace gk
