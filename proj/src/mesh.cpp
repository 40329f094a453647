#include "graspkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gk {

namespace {

constexpr double kDegenerateArea = 1e-12;

Vec3 triangle_normal_unnormalized(const TriangleMesh& m, const std::array<std::uint32_t, 3>& t) {
  const Vec3& a = m.vertices[t[0]];
  const Vec3& b = m.vertices[t[1]];
  const Vec3& c = m.vertices[t[2]];
  return (b - a).cross(c - a);
}

}  // namespace

double TriangleMesh::triangle_area(std::size_t t) const {
  return 0.5 * triangle_normal_unnormalized(*this, triangles[t]).norm();
}

double TriangleMesh::surface_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
  return a;
}

Aabb TriangleMesh::aabb() const {
  Aabb box;
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

std::size_t TriangleMesh::finalize() {
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(triangles.size());
  normals.clear();
  std::size_t dropped = 0;
  const std::uint32_t nv = static_cast<std::uint32_t>(vertices.size());
  for (const auto& t : triangles) {
    if (t[0] >= nv || t[1] >= nv || t[2] >= nv) {
      ++dropped;
      continue;
    }
    Vec3 n = triangle_normal_unnormalized(*this, t);
    double area = 0.5 * n.norm();
    if (area < kDegenerateArea) {
      ++dropped;
      continue;
    }
    kept.push_back(t);
    normals.push_back(n / (2.0 * area));
  }
  triangles = std::move(kept);
  degenerate_dropped += dropped;
  return dropped;
}

TriangleMesh parse_obj(std::istream& in, const std::string& name) {
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": malformed vertex record");
      }
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ls >> tok) {
        // accept v, v/vt, v//vn, v/vt/vn
        std::size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        long v = 0;
        try {
          v = std::stol(head);
        } catch (const std::exception&) {
          throw ParseError(name + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
        }
        if (v < 0) v = static_cast<long>(mesh.vertices.size()) + v + 1;  // relative index
        if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size()) {
          throw ParseError(name + ":" + std::to_string(lineno) + ": face index out of range");
        }
        idx.push_back(static_cast<std::uint32_t>(v - 1));
      }
      if (idx.size() < 3) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
    // vn / vt / comments / groups ignored
  }
  if (mesh.triangles.empty()) {
    throw ParseError(name + ": no faces found");
  }
  mesh.finalize();
  if (mesh.triangles.empty()) {
    throw ParseError(name + ": mesh empty after dropping degenerate triangles");
  }
  return mesh;
}

TriangleMesh parse_stl_binary(std::istream& in, const std::string& name) {
  char header[80];
  in.read(header, 80);
  if (in.gcount() != 80) {
    throw ParseError(name + ": truncated STL header (offset " +
                     std::to_string(in.gcount()) + " of 80)");
  }
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (in.gcount() != 4) {
    throw ParseError(name + ": truncated STL triangle count");
  }
  TriangleMesh mesh;
  // binary STL has no shared vertices; merge exact duplicates
  std::map<std::array<float, 3>, std::uint32_t> vertex_ids;
  auto vertex_id = [&](const std::array<float, 3>& v) {
    auto it = vertex_ids.find(v);
    if (it != vertex_ids.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.emplace_back(v[0], v[1], v[2]);
    vertex_ids.emplace(v, id);
    return id;
  };
  for (std::uint32_t t = 0; t < count; ++t) {
    float rec[12];
    in.read(reinterpret_cast<char*>(rec), 48);
    if (in.gcount() != 48) {
      throw ParseError(name + ": truncated STL record at triangle " + std::to_string(t));
    }
    std::uint16_t attr = 0;
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (in.gcount() != 2) {
      throw ParseError(name + ": truncated STL attribute at triangle " + std::to_string(t));
    }
    std::array<std::uint32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      tri[k] = vertex_id({rec[3 + 3 * k], rec[4 + 3 * k], rec[5 + 3 * k]});
    }
    mesh.triangles.push_back(tri);
  }
  if (mesh.triangles.empty()) {
    throw ParseError(name + ": STL contains no triangles");
  }
  mesh.finalize();
  if (mesh.triangles.empty()) {
    throw ParseError(name + ": mesh empty after dropping degenerate triangles");
  }
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  std::string lower = path;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const bool is_obj = lower.size() >= 4 && lower.compare(lower.size() - 4, 4, ".obj") == 0;
  std::ifstream in(path, is_obj ? std::ios::in : (std::ios::in | std::ios::binary));
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  return is_obj ? parse_obj(in, path) : parse_stl_binary(in, path);
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path + ": cannot open for writing");
  }
  out.precision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  }
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
}

std::vector<SurfaceSample> surface_sample(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed) {
  if (n == 0) {
    throw ValidationError("surface_sample: n must be >= 1");
  }
  if (mesh.triangles.empty()) {
    throw ValidationError("surface_sample: empty mesh");
  }
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += mesh.triangle_area(t);
    cumulative[t] = total;
  }
  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = rng.uniform() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t t = std::min<std::size_t>(std::distance(cumulative.begin(), it),
                                          mesh.triangles.size() - 1);
    const auto& tri = mesh.triangles[t];
    double u = rng.uniform();
    double v = rng.uniform();
    double su = std::sqrt(u);
    double b0 = 1.0 - su;
    double b1 = su * (1.0 - v);
    double b2 = su * v;
    Vec3 p = b0 * mesh.vertices[tri[0]] + b1 * mesh.vertices[tri[1]] + b2 * mesh.vertices[tri[2]];
    out.push_back({p, mesh.normals[t], static_cast<std::uint32_t>(t)});
  }
  return out;
}

TriangleMesh make_box_mesh(const Vec3& full_extents, const Vec3& center) {
  Vec3 h = 0.5 * full_extents;
  TriangleMesh m;
  for (int zi = -1; zi <= 1; zi += 2)
    for (int yi = -1; yi <= 1; yi += 2)
      for (int xi = -1; xi <= 1; xi += 2)
        m.vertices.push_back(center + Vec3(xi * h.x(), yi * h.y(), zi * h.z()));
  // index layout: bit0 = +x, bit1 = +y, bit2 = +z
  auto quad = [&m](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  };
  quad(1, 3, 7, 5);  // +x
  quad(2, 0, 4, 6);  // -x
  quad(3, 2, 6, 7);  // +y
  quad(0, 1, 5, 4);  // -y
  quad(4, 5, 7, 6);  // +z
  quad(0, 2, 3, 1);  // -z
  m.finalize();
  return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  std::vector<std::array<std::uint32_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      std::uint32_t id = static_cast<std::uint32_t>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      std::uint32_t ab = midpoint(f[0], f[1]);
      std::uint32_t bc = midpoint(f[1], f[2]);
      std::uint32_t ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  TriangleMesh m;
  m.vertices.reserve(verts.size());
  for (const Vec3& v : verts) m.vertices.push_back(center + radius * v);
  m.triangles = std::move(faces);
  m.finalize();
  return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments, const Vec3& center) {
  TriangleMesh m;
  const double hz = 0.5 * height;
  for (int ring = 0; ring < 2; ++ring) {
    double z = ring == 0 ? -hz : hz;
    for (int s = 0; s < segments; ++s) {
      double a = 2.0 * M_PI * s / segments;
      m.vertices.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), z));
    }
  }
  std::uint32_t bottom_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back(center + Vec3(0, 0, -hz));
  std::uint32_t top_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back(center + Vec3(0, 0, hz));
  auto lower = [&](int s) { return static_cast<std::uint32_t>(s % segments); };
  auto upper = [&](int s) { return static_cast<std::uint32_t>(segments + s % segments); };
  for (int s = 0; s < segments; ++s) {
    m.triangles.push_back({lower(s), lower(s + 1), upper(s + 1)});
    m.triangles.push_back({lower(s), upper(s + 1), upper(s)});
    m.triangles.push_back({bottom_center, lower(s + 1), lower(s)});
    m.triangles.push_back({top_center, upper(s), upper(s + 1)});
  }
  m.finalize();
  return m;
}

}  // namespace gk
