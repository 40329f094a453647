#pragma once

#include <optional>
#include <vector>

#include "graspkit/mesh.hpp"
#include "graspkit/pose.hpp"

namespace gk {

// One convex collider: a hull vertex set or a tagged primitive, placed by a
// local pose within its owning body's frame. Hull vertex sets must be their
// own convex hull (see validate_convex_piece).
struct ConvexPiece {
  enum class Kind { Hull, Box, Sphere, Capsule };

  Kind kind = Kind::Hull;
  std::vector<Vec3> vertices;   // Hull
  Vec3 half_extents{0, 0, 0};   // Box
  double radius = 0.0;          // Sphere, Capsule
  double half_length = 0.0;     // Capsule, segment along local z
  Pose local_pose;

  static ConvexPiece box(const Vec3& half_extents, const Pose& local = Pose::identity());
  static ConvexPiece sphere(double radius, const Pose& local = Pose::identity());
  static ConvexPiece capsule(double radius, double half_length,
                             const Pose& local = Pose::identity());
  static ConvexPiece hull(std::vector<Vec3> vertices, const Pose& local = Pose::identity());

  // Support point of the "core" shape in piece-local coordinates. For spheres
  // and capsules the core is the center point / axis segment; the radius acts
  // as a margin around it, which keeps GJK witness points exact.
  Vec3 support_local(const Vec3& dir) const;
  double margin() const;
  Aabb local_aabb() const;  // includes margin
};

Aabb piece_world_aabb(const ConvexPiece& piece, const Pose& body_pose);
Aabb body_aabb(const std::vector<ConvexPiece>& pieces, const Pose& body_pose);

// Throws ValidationError if a Hull piece has vertices interior to the hull of
// the others by more than 1e-6 m, or fewer than 4 non-coplanar vertices.
void validate_convex_piece(const ConvexPiece& piece);

struct Contact {
  Vec3 point;        // world, midway between the witness surfaces
  Vec3 normal;       // world, unit, pointing from shape A toward shape B
  double penetration;  // > 0 when overlapping
};

struct CollisionQuery {
  std::optional<Contact> contact;    // set when shapes touch or overlap
  std::optional<double> separation;  // set when separated by <= 0.1 m
};

// Deepest-penetration contact between two convex pieces (support-function
// GJK for the separated case, EPA for penetration).
CollisionQuery collide(const ConvexPiece& a, const Pose& a_pose, const ConvexPiece& b,
                       const Pose& b_pose);

// Deepest contact over all piece pairs of two collider sets.
CollisionQuery collide_bodies(const std::vector<ConvexPiece>& a, const Pose& a_pose,
                              const std::vector<ConvexPiece>& b, const Pose& b_pose);

// Overlap test between a convex piece and a triangle mesh (each triangle is
// itself convex). Returns deepest contact if any triangle overlaps.
std::optional<Contact> collide_piece_mesh(const ConvexPiece& piece, const Pose& piece_pose,
                                          const class MeshBvh& bvh, const Pose& mesh_pose);

struct ContactPoint {
  Vec3 point;
  double depth;
};

struct ContactManifold {
  Vec3 normal;  // from A to B
  std::vector<ContactPoint> points;
};

// Multi-point contact patch for resting stability: supporting-face clipping
// around the single-contact normal. Pairs separated by more than `tolerance`
// produce no manifold.
std::optional<ContactManifold> contact_manifold(const ConvexPiece& a, const Pose& a_pose,
                                                const ConvexPiece& b, const Pose& b_pose,
                                                double tolerance = 1e-3);

struct HullFaces {
  std::vector<Vec3> vertices;                         // subset of the input
  std::vector<std::array<std::uint32_t, 3>> faces;    // outward winding
};

// 3D quickhull. Throws ValidationError for degenerate (planar) input.
HullFaces convex_hull(const std::vector<Vec3>& points);

// Triangle mesh of a piece (hull faces, or a tessellated primitive).
TriangleMesh piece_to_mesh(const ConvexPiece& piece);
TriangleMesh body_to_mesh(const std::vector<ConvexPiece>& pieces);

}  // namespace gk
