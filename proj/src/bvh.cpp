#include "graspkit/bvh.hpp"

#include <algorithm>
#include <cmath>

#include "graspkit/common.hpp"

namespace gk {

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  constexpr double eps = 1e-12;
  Vec3 e1 = b - a;
  Vec3 e2 = c - a;
  Vec3 p = dir.cross(e2);
  double det = e1.dot(p);
  if (std::abs(det) < eps) return std::nullopt;
  double inv = 1.0 / det;
  Vec3 tvec = origin - a;
  double u = tvec.dot(p) * inv;
  if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  Vec3 q = tvec.cross(e1);
  double v = dir.dot(q) * inv;
  if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
  double t = e2.dot(q) * inv;
  if (t < 0.0) return std::nullopt;
  return t;
}

namespace {

RayHit make_hit(const TriangleMesh& mesh, const Vec3& origin, const Vec3& dir, double t,
                std::uint32_t tri) {
  return RayHit{origin + t * dir, mesh.normals[tri], tri, t};
}

bool ray_aabb(const Vec3& origin, const Vec3& inv_dir, const Aabb& box, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double lo = (box.min[k] - origin[k]) * inv_dir[k];
    double hi = (box.max[k] - origin[k]) * inv_dir[k];
    if (inv_dir[k] < 0.0) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<RayHit> ray_cast_brute(const TriangleMesh& mesh, const Vec3& origin,
                                     const Vec3& dir, double min_distance) {
  if (dir.norm() == 0.0) throw ValidationError("ray_cast: zero direction");
  Vec3 d = dir.normalized();
  double best = std::numeric_limits<double>::infinity();
  std::int64_t best_tri = -1;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    auto hit = ray_triangle(origin, d, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                            mesh.vertices[tri[2]]);
    if (hit && *hit > min_distance && *hit < best) {
      best = *hit;
      best_tri = static_cast<std::int64_t>(t);
    }
  }
  if (best_tri < 0) return std::nullopt;
  return make_hit(mesh, origin, d, best, static_cast<std::uint32_t>(best_tri));
}

MeshBvh::MeshBvh(const TriangleMesh& mesh) : mesh_(&mesh) {
  prim_.resize(mesh.triangles.size());
  centroids_.resize(mesh.triangles.size());
  for (std::uint32_t t = 0; t < prim_.size(); ++t) {
    prim_[t] = t;
    const auto& tri = mesh.triangles[t];
    centroids_[t] =
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
  }
  nodes_.reserve(2 * prim_.size());
  if (!prim_.empty()) build(0, static_cast<std::uint32_t>(prim_.size()));
}

std::int32_t MeshBvh::build(std::uint32_t first, std::uint32_t count) {
  Node node;
  for (std::uint32_t i = first; i < first + count; ++i) {
    const auto& tri = mesh_->triangles[prim_[i]];
    node.box.expand(mesh_->vertices[tri[0]]);
    node.box.expand(mesh_->vertices[tri[1]]);
    node.box.expand(mesh_->vertices[tri[2]]);
  }
  std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (count <= 4) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }
  Aabb cbox;
  for (std::uint32_t i = first; i < first + count; ++i) cbox.expand(centroids_[prim_[i]]);
  Vec3 ext = cbox.extents();
  int axis = 0;
  if (ext.y() > ext.x()) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;
  std::uint32_t mid = first + count / 2;
  std::nth_element(prim_.begin() + first, prim_.begin() + mid, prim_.begin() + first + count,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids_[a][axis] != centroids_[b][axis])
                       return centroids_[a][axis] < centroids_[b][axis];
                     return a < b;
                   });
  std::int32_t left = build(first, mid - first);
  std::int32_t right = build(mid, first + count - mid);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<RayHit> MeshBvh::ray_cast(const Vec3& origin, const Vec3& dir,
                                        double min_distance) const {
  if (dir.norm() == 0.0) throw ValidationError("ray_cast: zero direction");
  if (nodes_.empty()) return std::nullopt;
  Vec3 d = dir.normalized();
  Vec3 inv_dir(1.0 / d.x(), 1.0 / d.y(), 1.0 / d.z());
  double best = std::numeric_limits<double>::infinity();
  std::int64_t best_tri = -1;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    std::int32_t ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (!ray_aabb(origin, inv_dir, node.box, best)) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        std::uint32_t t = prim_[i];
        const auto& tri = mesh_->triangles[t];
        auto hit = ray_triangle(origin, d, mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                mesh_->vertices[tri[2]]);
        if (hit && *hit > min_distance && *hit < best) {
          best = *hit;
          best_tri = t;
        }
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (best_tri < 0) return std::nullopt;
  return make_hit(*mesh_, origin, d, best, static_cast<std::uint32_t>(best_tri));
}

void MeshBvh::overlapping_triangles(const Aabb& box, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (nodes_.empty()) return;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    std::int32_t ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (!node.box.overlaps(box)) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) out.push_back(prim_[i]);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace gk
