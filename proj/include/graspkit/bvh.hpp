#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "graspkit/mesh.hpp"

namespace gk {

struct RayHit {
  Vec3 point;
  Vec3 normal;        // host triangle's outward normal
  std::uint32_t triangle;
  double distance;
};

// Watertight enough for grasp sampling: Moller-Trumbore with a small epsilon.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

// Median-split AABB tree over mesh triangles. The mesh must outlive the index.
class MeshBvh {
 public:
  explicit MeshBvh(const TriangleMesh& mesh);

  // Nearest intersection with distance > min_distance (1e-8 m by default, so
  // rays cast from the surface skip their own triangle).
  std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& dir,
                                 double min_distance = 1e-8) const;

  // Indices of triangles whose AABB overlaps `box`; exact test is the caller's.
  void overlapping_triangles(const Aabb& box, std::vector<std::uint32_t>& out) const;

  const TriangleMesh& mesh() const { return *mesh_; }

 private:
  struct Node {
    Aabb box;
    std::int32_t left = -1;    // internal: child indices; leaf: -1
    std::int32_t right = -1;
    std::uint32_t first = 0;   // leaf: range into prim_
    std::uint32_t count = 0;
  };

  std::int32_t build(std::uint32_t first, std::uint32_t count);

  const TriangleMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> prim_;
  std::vector<Vec3> centroids_;
};

// Brute-force reference used by tests and by ray_cast on tiny meshes.
std::optional<RayHit> ray_cast_brute(const TriangleMesh& mesh, const Vec3& origin,
                                     const Vec3& dir, double min_distance = 1e-8);

}  // namespace gk
