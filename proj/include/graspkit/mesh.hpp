#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "graspkit/common.hpp"
#include "graspkit/pose.hpp"

namespace gk {

// Indexed triangle soup with per-triangle outward normals (from winding).
// Watertightness is not required. Degenerate triangles are dropped at load.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;      // per triangle, unit length
  std::size_t degenerate_dropped = 0;

  std::size_t triangle_count() const { return triangles.size(); }
  double triangle_area(std::size_t t) const;
  double surface_area() const;
  Aabb aabb() const;

  // Recomputes normals and drops triangles with area < 1e-12 m^2 or
  // out-of-range indices. Returns the number dropped.
  std::size_t finalize();
};

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
  std::uint32_t triangle;
};

// Loads an ASCII OBJ (v/f records, 1-based indices, polygons fan-triangulated)
// or a binary STL (80-byte header, little-endian). Format chosen by file
// extension, `.obj` vs anything else. Throws ParseError with line/offset
// context on malformed input, and on meshes that are empty after filtering.
TriangleMesh load_mesh(const std::string& path);

TriangleMesh parse_obj(std::istream& in, const std::string& name);
TriangleMesh parse_stl_binary(std::istream& in, const std::string& name);

void save_obj(const TriangleMesh& mesh, const std::string& path);

// Area-weighted uniform surface samples; deterministic for a given seed.
// Normals are the host triangle's. Throws ValidationError when n == 0.
std::vector<SurfaceSample> surface_sample(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed);

// Procedural fixture meshes (unit tests and CLI fixtures).
TriangleMesh make_box_mesh(const Vec3& full_extents, const Vec3& center = Vec3::Zero());
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriangleMesh make_cylinder(double radius, double height, int segments,
                           const Vec3& center = Vec3::Zero());

}  // namespace gk
