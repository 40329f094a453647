#include "graspkit/convex.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "graspkit/bvh.hpp"
#include "graspkit/common.hpp"

namespace gk {

ConvexPiece ConvexPiece::box(const Vec3& half_extents, const Pose& local) {
  ConvexPiece p;
  p.kind = Kind::Box;
  p.half_extents = half_extents;
  p.local_pose = local;
  return p;
}

ConvexPiece ConvexPiece::sphere(double radius, const Pose& local) {
  ConvexPiece p;
  p.kind = Kind::Sphere;
  p.radius = radius;
  p.local_pose = local;
  return p;
}

ConvexPiece ConvexPiece::capsule(double radius, double half_length, const Pose& local) {
  ConvexPiece p;
  p.kind = Kind::Capsule;
  p.radius = radius;
  p.half_length = half_length;
  p.local_pose = local;
  return p;
}

ConvexPiece ConvexPiece::hull(std::vector<Vec3> vertices, const Pose& local) {
  ConvexPiece p;
  p.kind = Kind::Hull;
  p.vertices = std::move(vertices);
  p.local_pose = local;
  return p;
}

Vec3 ConvexPiece::support_local(const Vec3& dir) const {
  switch (kind) {
    case Kind::Box:
      return Vec3(dir.x() >= 0 ? half_extents.x() : -half_extents.x(),
                  dir.y() >= 0 ? half_extents.y() : -half_extents.y(),
                  dir.z() >= 0 ? half_extents.z() : -half_extents.z());
    case Kind::Sphere:
      return Vec3::Zero();
    case Kind::Capsule:
      return Vec3(0, 0, dir.z() >= 0 ? half_length : -half_length);
    case Kind::Hull: {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < vertices.size(); ++i) {
        double d = vertices[i].dot(dir);
        if (d > best) {
          best = d;
          best_i = i;
        }
      }
      return vertices[best_i];
    }
  }
  return Vec3::Zero();
}

double ConvexPiece::margin() const {
  return (kind == Kind::Sphere || kind == Kind::Capsule) ? radius : 0.0;
}

Aabb ConvexPiece::local_aabb() const {
  Aabb box;
  switch (kind) {
    case Kind::Box:
      box.expand(-half_extents);
      box.expand(half_extents);
      break;
    case Kind::Sphere:
      box.expand(Vec3::Zero());
      break;
    case Kind::Capsule:
      box.expand(Vec3(0, 0, -half_length));
      box.expand(Vec3(0, 0, half_length));
      break;
    case Kind::Hull:
      for (const Vec3& v : vertices) box.expand(v);
      break;
  }
  return box.inflated(margin());
}

Aabb piece_world_aabb(const ConvexPiece& piece, const Pose& body_pose) {
  Pose world = body_pose * piece.local_pose;
  Aabb local = piece.local_aabb();
  Aabb out;
  for (int i = 0; i < 8; ++i) {
    Vec3 corner((i & 1) ? local.max.x() : local.min.x(), (i & 2) ? local.max.y() : local.min.y(),
                (i & 4) ? local.max.z() : local.min.z());
    out.expand(world.apply(corner));
  }
  return out;
}

Aabb body_aabb(const std::vector<ConvexPiece>& pieces, const Pose& body_pose) {
  Aabb out;
  for (const ConvexPiece& p : pieces) out.expand(piece_world_aabb(p, body_pose));
  return out;
}

// ---------------------------------------------------------------------------
// GJK / EPA

namespace {

struct SupportVert {
  Vec3 v;  // a - b, Minkowski difference
  Vec3 a;
  Vec3 b;
};

struct WorldSupport {
  const ConvexPiece* piece;
  Pose world;

  Vec3 operator()(const Vec3& dir_world) const {
    Vec3 dir_local = world.rotation.conjugate() * dir_world;
    return world.apply(piece->support_local(dir_local));
  }
};

struct TriSupport {
  std::array<Vec3, 3> verts;  // world

  Vec3 operator()(const Vec3& dir) const {
    double d0 = verts[0].dot(dir), d1 = verts[1].dot(dir), d2 = verts[2].dot(dir);
    if (d0 >= d1 && d0 >= d2) return verts[0];
    return d1 >= d2 ? verts[1] : verts[2];
  }
};

template <class SA, class SB>
SupportVert mink_support(const SA& sa, const SB& sb, const Vec3& dir) {
  Vec3 a = sa(dir);
  Vec3 b = sb(-dir);
  return {a - b, a, b};
}

// Closest point to origin on a simplex; reduces the simplex to the supporting face
// and returns barycentric weights aligned with the reduced simplex.
struct SimplexClosest {
  Vec3 point;
  std::array<double, 4> bary{};
  int count = 0;
};

SimplexClosest closest_on_segment(const SupportVert& a, const SupportVert& b,
                                  std::array<SupportVert, 4>& out) {
  Vec3 ab = b.v - a.v;
  double denom = ab.squaredNorm();
  double t = denom > 0 ? -a.v.dot(ab) / denom : 0.0;
  SimplexClosest r;
  if (t <= 0.0) {
    out[0] = a;
    r = {a.v, {1.0}, 1};
  } else if (t >= 1.0) {
    out[0] = b;
    r = {b.v, {1.0}, 1};
  } else {
    out[0] = a;
    out[1] = b;
    r = {a.v + t * ab, {1.0 - t, t}, 2};
  }
  return r;
}

SimplexClosest closest_on_triangle(const SupportVert& a, const SupportVert& b,
                                   const SupportVert& c, std::array<SupportVert, 4>& out) {
  // Ericson, Real-Time Collision Detection, 5.1.5; target point is the origin.
  Vec3 ab = b.v - a.v, ac = c.v - a.v, ap = -a.v;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    out[0] = a;
    return {a.v, {1.0}, 1};
  }
  Vec3 bp = -b.v;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    out[0] = b;
    return {b.v, {1.0}, 1};
  }
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double t = d1 / (d1 - d3);
    out[0] = a;
    out[1] = b;
    return {a.v + t * ab, {1.0 - t, t}, 2};
  }
  Vec3 cp = -c.v;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    out[0] = c;
    return {c.v, {1.0}, 1};
  }
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double t = d2 / (d2 - d6);
    out[0] = a;
    out[1] = c;
    return {a.v + t * ac, {1.0 - t, t}, 2};
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    out[0] = b;
    out[1] = c;
    return {b.v + t * (c.v - b.v), {1.0 - t, t}, 2};
  }
  if (std::abs(va + vb + vc) < 1e-30) {
    // collinear support points: treat as a segment through the two extremes
    auto r = closest_on_segment(a, c, out);
    return r;
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  out[0] = a;
  out[1] = b;
  out[2] = c;
  return {a.v + ab * v + ac * w, {1.0 - v - w, v, w}, 3};
}

SimplexClosest closest_on_simplex(std::array<SupportVert, 4>& s, int n, bool* contains_origin) {
  *contains_origin = false;
  std::array<SupportVert, 4> tmp;
  if (n == 1) {
    return {s[0].v, {1.0}, 1};
  }
  if (n == 2) {
    auto r = closest_on_segment(s[0], s[1], tmp);
    s = tmp;
    return r;
  }
  if (n == 3) {
    auto r = closest_on_triangle(s[0], s[1], s[2], tmp);
    s = tmp;
    return r;
  }
  // Tetrahedron: test origin against the four faces.
  auto signed_vol = [](const Vec3& p, const Vec3& q, const Vec3& r, const Vec3& t) {
    return (q - p).cross(r - p).dot(t - p);
  };
  const Vec3 o = Vec3::Zero();
  double v0123 = signed_vol(s[0].v, s[1].v, s[2].v, s[3].v);
  if (std::abs(v0123) < 1e-18) {
    // degenerate tetra, fall back to the best triangle
    auto r = closest_on_triangle(s[0], s[1], s[2], tmp);
    s = tmp;
    return r;
  }
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  SimplexClosest best_r;
  std::array<SupportVert, 4> best_s{};
  const int faces[4][3] = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  const int opp[4] = {3, 2, 1, 0};
  for (int f = 0; f < 4; ++f) {
    const Vec3& p = s[faces[f][0]].v;
    const Vec3& q = s[faces[f][1]].v;
    const Vec3& r3 = s[faces[f][2]].v;
    double vo = signed_vol(p, q, r3, o);
    double vopp = signed_vol(p, q, r3, s[opp[f]].v);
    if (vo * vopp < 0.0) {
      inside = false;
      auto r = closest_on_triangle(s[faces[f][0]], s[faces[f][1]], s[faces[f][2]], tmp);
      double d = r.point.squaredNorm();
      if (d < best) {
        best = d;
        best_r = r;
        best_s = tmp;
      }
    }
  }
  if (inside) {
    *contains_origin = true;
    return {Vec3::Zero(), {}, 4};
  }
  s = best_s;
  return best_r;
}

struct GjkOut {
  bool intersecting = false;
  double distance = 0.0;  // core-to-core
  Vec3 witness_a, witness_b;
  std::array<SupportVert, 4> simplex{};
  int simplex_n = 0;
};

template <class SA, class SB>
GjkOut gjk(const SA& sa, const SB& sb, const Vec3& initial_dir) {
  GjkOut out;
  Vec3 d0 = initial_dir.squaredNorm() > 1e-20 ? initial_dir : Vec3::UnitX();
  std::array<SupportVert, 4> s;
  s[0] = mink_support(sa, sb, d0);
  int n = 1;
  Vec3 v = s[0].v;
  std::array<double, 4> bary{1.0};
  for (int iter = 0; iter < 128; ++iter) {
    double vlen2 = v.squaredNorm();
    if (vlen2 < 1e-22) {
      out.intersecting = true;
      out.simplex = s;
      out.simplex_n = n;
      return out;
    }
    SupportVert w = mink_support(sa, sb, -v);
    // termination: support in -v direction makes no progress
    if (vlen2 - v.dot(w.v) <= 1e-12 * vlen2 + 1e-24) break;
    bool dup = false;
    for (int i = 0; i < n; ++i) {
      if ((s[i].v - w.v).squaredNorm() < 1e-24) dup = true;
    }
    if (dup) break;
    s[n < 4 ? n : 3] = w;
    n = std::min(n + 1, 4);
    bool contains = false;
    auto r = closest_on_simplex(s, n, &contains);
    if (contains) {
      out.intersecting = true;
      out.simplex = s;
      out.simplex_n = 4;
      return out;
    }
    v = r.point;
    bary = r.bary;
    n = r.count;
  }
  out.distance = v.norm();
  out.witness_a = Vec3::Zero();
  out.witness_b = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    out.witness_a += bary[i] * s[i].a;
    out.witness_b += bary[i] * s[i].b;
  }
  out.simplex = s;
  out.simplex_n = n;
  return out;
}

struct EpaFace {
  std::array<std::uint32_t, 3> idx;
  Vec3 normal;  // unit, away from origin
  double dist;  // normal . vertex
  bool alive = true;
};

struct EpaOut {
  bool ok = false;
  Vec3 normal;  // minimal translation direction (push B along +normal)
  double depth = 0.0;
  Vec3 witness_a, witness_b;
};

template <class SA, class SB>
bool expand_to_tetra(const SA& sa, const SB& sb, std::vector<SupportVert>& verts) {
  auto add_unique = [&](const SupportVert& w) {
    for (const auto& v : verts) {
      if ((v.v - w.v).squaredNorm() < 1e-20) return false;
    }
    verts.push_back(w);
    return true;
  };
  const Vec3 dirs[14] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},  {0, -1, 0}, {0, 0, 1},
                         {0, 0, -1}, {1, 1, 1},  {-1, 1, 1}, {1, -1, 1}, {1, 1, -1},
                         {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}, {-1, -1, -1}};
  for (const Vec3& d : dirs) {
    if (verts.size() >= 4) break;
    add_unique(mink_support(sa, sb, d.normalized()));
  }
  if (verts.size() < 4) return false;
  // ensure the four verts are not coplanar; swap in later dirs if needed
  auto vol = [&]() {
    return std::abs((verts[1].v - verts[0].v)
                        .cross(verts[2].v - verts[0].v)
                        .dot(verts[3].v - verts[0].v));
  };
  if (vol() < 1e-18) {
    for (const Vec3& d : dirs) {
      SupportVert w = mink_support(sa, sb, d.normalized());
      for (int k = 3; k >= 1 && vol() < 1e-18; --k) {
        SupportVert saved = verts[k];
        verts[k] = w;
        if (vol() < 1e-18) verts[k] = saved;
      }
      if (vol() >= 1e-18) break;
    }
  }
  return vol() >= 1e-18;
}

template <class SA, class SB>
EpaOut epa(const SA& sa, const SB& sb, const GjkOut& seed) {
  EpaOut out;
  std::vector<SupportVert> verts(seed.simplex.begin(), seed.simplex.begin() + seed.simplex_n);
  if (verts.size() < 4 || !expand_to_tetra(sa, sb, verts)) {
    if (!expand_to_tetra(sa, sb, verts)) return out;
  }
  verts.resize(4);
  Vec3 interior = 0.25 * (verts[0].v + verts[1].v + verts[2].v + verts[3].v);

  std::vector<EpaFace> faces;
  auto push_face = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Vec3 n = (verts[b].v - verts[a].v).cross(verts[c].v - verts[a].v);
    double len = n.norm();
    if (len < 1e-18) return;
    n /= len;
    if (n.dot(verts[a].v - interior) < 0) {
      std::swap(b, c);
      n = -n;
    }
    faces.push_back({{a, b, c}, n, n.dot(verts[a].v), true});
  };
  push_face(0, 1, 2);
  push_face(0, 1, 3);
  push_face(0, 2, 3);
  push_face(1, 2, 3);
  if (faces.empty()) return out;

  for (int iter = 0; iter < 128; ++iter) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].dist < best_d) {
        best_d = faces[f].dist;
        best = static_cast<int>(f);
      }
    }
    if (best < 0) return out;
    const EpaFace face = faces[best];
    SupportVert w = mink_support(sa, sb, face.normal);
    double grow = face.normal.dot(w.v) - face.dist;
    if (grow < 1e-10 || verts.size() > 256) {
      // converged: project origin onto the face, read off barycentrics
      const Vec3& pa = verts[face.idx[0]].v;
      const Vec3& pb = verts[face.idx[1]].v;
      const Vec3& pc = verts[face.idx[2]].v;
      Vec3 proj = face.dist * face.normal;
      Vec3 v0 = pb - pa, v1 = pc - pa, v2 = proj - pa;
      double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
      double d20 = v2.dot(v0), d21 = v2.dot(v1);
      double denom = d00 * d11 - d01 * d01;
      double v = 0, wgt = 0;
      if (std::abs(denom) > 1e-18) {
        v = (d11 * d20 - d01 * d21) / denom;
        wgt = (d00 * d21 - d01 * d20) / denom;
      }
      v = std::clamp(v, 0.0, 1.0);
      wgt = std::clamp(wgt, 0.0, 1.0 - v);
      double u = 1.0 - v - wgt;
      out.ok = true;
      out.normal = face.normal;
      out.depth = std::max(0.0, face.dist);
      out.witness_a =
          u * verts[face.idx[0]].a + v * verts[face.idx[1]].a + wgt * verts[face.idx[2]].a;
      out.witness_b =
          u * verts[face.idx[0]].b + v * verts[face.idx[1]].b + wgt * verts[face.idx[2]].b;
      return out;
    }
    std::uint32_t wi = static_cast<std::uint32_t>(verts.size());
    verts.push_back(w);
    // remove faces visible from w, keep horizon
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_count;
    auto add_edge = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      edge_count[{key.first, key.second}]++;
    };
    bool removed_any = false;
    for (auto& f : faces) {
      if (!f.alive) continue;
      if (f.normal.dot(w.v) > f.dist + 1e-12) {
        f.alive = false;
        removed_any = true;
        add_edge(f.idx[0], f.idx[1]);
        add_edge(f.idx[1], f.idx[2]);
        add_edge(f.idx[2], f.idx[0]);
      }
    }
    if (!removed_any) {
      faces[best].alive = false;  // numerical stall; drop the face and retry
      continue;
    }
    for (const auto& [edge, count] : edge_count) {
      if (count == 1) push_face(edge.first, edge.second, wi);
    }
  }
  return out;
}

struct PieceQueryResult {
  bool overlapping = false;
  Contact contact;       // valid when overlapping (or margin-touching)
  double separation = std::numeric_limits<double>::infinity();
};

template <class SA, class SB>
PieceQueryResult query_supports(const SA& sa, double margin_a, const SB& sb, double margin_b,
                                const Vec3& dir_hint) {
  PieceQueryResult res;
  GjkOut g = gjk(sa, sb, dir_hint);
  const double margins = margin_a + margin_b;
  if (!g.intersecting && g.distance > 1e-12) {
    double sep = g.distance - margins;
    Vec3 n = (g.witness_b - g.witness_a) / g.distance;  // A -> B
    if (sep > 0.0) {
      res.separation = sep;
      return res;
    }
    res.overlapping = true;
    Vec3 pa = g.witness_a + margin_a * n;
    Vec3 pb = g.witness_b - margin_b * n;
    res.contact = {0.5 * (pa + pb), n, -sep};
    return res;
  }
  EpaOut e = epa(sa, sb, g);
  if (!e.ok) {
    // fully degenerate overlap; report zero-depth contact at the witness
    res.overlapping = true;
    res.contact = {sa(Vec3::UnitZ()), Vec3::UnitZ(), margins};
    return res;
  }
  Vec3 n = e.normal;  // push B along +n
  Vec3 pa = e.witness_a + margin_a * n;
  Vec3 pb = e.witness_b - margin_b * n;
  res.overlapping = true;
  res.contact = {0.5 * (pa + pb), n, e.depth + margins};
  return res;
}

}  // namespace

CollisionQuery collide(const ConvexPiece& a, const Pose& a_pose, const ConvexPiece& b,
                       const Pose& b_pose) {
  WorldSupport sa{&a, a_pose * a.local_pose};
  WorldSupport sb{&b, b_pose * b.local_pose};
  Vec3 hint = sb.world.translation - sa.world.translation;
  PieceQueryResult r = query_supports(sa, a.margin(), sb, b.margin(), hint);
  CollisionQuery q;
  if (r.overlapping) {
    q.contact = r.contact;
  } else if (r.separation <= 0.1) {
    q.separation = r.separation;
  }
  return q;
}

CollisionQuery collide_bodies(const std::vector<ConvexPiece>& a, const Pose& a_pose,
                              const std::vector<ConvexPiece>& b, const Pose& b_pose) {
  CollisionQuery best;
  double best_depth = -std::numeric_limits<double>::infinity();
  double best_sep = std::numeric_limits<double>::infinity();
  for (const ConvexPiece& pa : a) {
    for (const ConvexPiece& pb : b) {
      if (!piece_world_aabb(pa, a_pose).inflated(0.1).overlaps(piece_world_aabb(pb, b_pose))) {
        continue;
      }
      CollisionQuery q = collide(pa, a_pose, pb, b_pose);
      if (q.contact) {
        if (q.contact->penetration > best_depth) {
          best_depth = q.contact->penetration;
          best.contact = q.contact;
          best.separation.reset();
        }
      } else if (!best.contact && q.separation && *q.separation < best_sep) {
        best_sep = *q.separation;
        best.separation = q.separation;
      }
    }
  }
  return best;
}

std::optional<Contact> collide_piece_mesh(const ConvexPiece& piece, const Pose& piece_pose,
                                          const MeshBvh& bvh, const Pose& mesh_pose) {
  Aabb query = piece_world_aabb(piece, piece_pose);
  // move the query box into mesh frame (conservative: transformed corners)
  Pose to_mesh = mesh_pose.inverse();
  Aabb mesh_frame_box;
  for (int i = 0; i < 8; ++i) {
    Vec3 corner((i & 1) ? query.max.x() : query.min.x(), (i & 2) ? query.max.y() : query.min.y(),
                (i & 4) ? query.max.z() : query.min.z());
    mesh_frame_box.expand(to_mesh.apply(corner));
  }
  std::vector<std::uint32_t> tris;
  bvh.overlapping_triangles(mesh_frame_box, tris);
  WorldSupport sp{&piece, piece_pose * piece.local_pose};
  std::optional<Contact> best;
  for (std::uint32_t t : tris) {
    const auto& tri = bvh.mesh().triangles[t];
    TriSupport st{{mesh_pose.apply(bvh.mesh().vertices[tri[0]]),
                   mesh_pose.apply(bvh.mesh().vertices[tri[1]]),
                   mesh_pose.apply(bvh.mesh().vertices[tri[2]])}};
    Vec3 hint = (st.verts[0] + st.verts[1] + st.verts[2]) / 3.0 - sp.world.translation;
    PieceQueryResult r = query_supports(sp, piece.margin(), st, 0.0, hint);
    if (r.overlapping && (!best || r.contact.penetration > best->penetration)) {
      best = r.contact;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Contact manifolds

namespace {

std::vector<Vec3> support_set(const ConvexPiece& piece, const Pose& world, const Vec3& n_world,
                              double slab) {
  Vec3 n_local = world.rotation.conjugate() * n_world;
  std::vector<Vec3> local;
  switch (piece.kind) {
    case ConvexPiece::Kind::Sphere:
      local.push_back(Vec3::Zero());
      break;
    case ConvexPiece::Kind::Capsule: {
      Vec3 top(0, 0, piece.half_length), bot(0, 0, -piece.half_length);
      double dt = top.dot(n_local), db = bot.dot(n_local);
      double m = std::max(dt, db);
      if (dt >= m - slab) local.push_back(top);
      if (db >= m - slab) local.push_back(bot);
      break;
    }
    case ConvexPiece::Kind::Box: {
      double m = -std::numeric_limits<double>::infinity();
      std::vector<Vec3> corners;
      for (int i = 0; i < 8; ++i) {
        Vec3 c(((i & 1) ? 1 : -1) * piece.half_extents.x(),
               ((i & 2) ? 1 : -1) * piece.half_extents.y(),
               ((i & 4) ? 1 : -1) * piece.half_extents.z());
        corners.push_back(c);
        m = std::max(m, c.dot(n_local));
      }
      for (const Vec3& c : corners) {
        if (c.dot(n_local) >= m - slab) local.push_back(c);
      }
      break;
    }
    case ConvexPiece::Kind::Hull: {
      double m = -std::numeric_limits<double>::infinity();
      for (const Vec3& v : piece.vertices) m = std::max(m, v.dot(n_local));
      for (const Vec3& v : piece.vertices) {
        if (v.dot(n_local) >= m - slab) local.push_back(v);
      }
      break;
    }
  }
  std::vector<Vec3> out;
  out.reserve(local.size());
  for (const Vec3& v : local) out.push_back(world.apply(v));
  return out;
}

// Sutherland-Hodgman clip of `subject` against convex `clip`, both 2D and
// counter-clockwise.
std::vector<Eigen::Vector2d> clip_polygon(std::vector<Eigen::Vector2d> subject,
                                          const std::vector<Eigen::Vector2d>& clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Eigen::Vector2d& e0 = clip[i];
    const Eigen::Vector2d& e1 = clip[(i + 1) % clip.size()];
    Eigen::Vector2d edge = e1 - e0;
    auto inside = [&](const Eigen::Vector2d& p) {
      return edge.x() * (p.y() - e0.y()) - edge.y() * (p.x() - e0.x()) >= -1e-12;
    };
    std::vector<Eigen::Vector2d> out;
    for (std::size_t j = 0; j < subject.size(); ++j) {
      Eigen::Vector2d cur = subject[j];
      Eigen::Vector2d prev = subject[(j + subject.size() - 1) % subject.size()];
      bool cin = inside(cur), pin = inside(prev);
      if (cin != pin) {
        Eigen::Vector2d d = cur - prev;
        double denom = edge.x() * d.y() - edge.y() * d.x();
        if (std::abs(denom) > 1e-18) {
          double t = (edge.x() * (e0.y() - prev.y()) - edge.y() * (e0.x() - prev.x())) / denom;
          out.push_back(prev + std::clamp(t, 0.0, 1.0) * d);
        }
      }
      if (cin) out.push_back(cur);
    }
    subject = std::move(out);
  }
  return subject;
}

std::vector<Eigen::Vector2d> order_ccw(std::vector<Eigen::Vector2d> pts) {
  if (pts.size() < 3) return pts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return pts;
}

}  // namespace

std::optional<ContactManifold> contact_manifold(const ConvexPiece& a, const Pose& a_pose,
                                                const ConvexPiece& b, const Pose& b_pose,
                                                double tolerance) {
  CollisionQuery q = collide(a, a_pose, b, b_pose);
  Vec3 n;
  double center_depth;
  Vec3 center_point;
  if (q.contact) {
    n = q.contact->normal;
    center_depth = q.contact->penetration;
    center_point = q.contact->point;
  } else if (q.separation && *q.separation <= tolerance) {
    // near-contact: recover the witness line by a zero-tolerance collide pass
    WorldSupport sa{&a, a_pose * a.local_pose};
    WorldSupport sb{&b, b_pose * b.local_pose};
    GjkOut g = gjk(sa, sb, sb.world.translation - sa.world.translation);
    if (g.intersecting || g.distance <= 1e-12) return std::nullopt;
    n = (g.witness_b - g.witness_a) / g.distance;
    center_depth = -(g.distance - a.margin() - b.margin());
    center_point = 0.5 * (g.witness_a + a.margin() * n + g.witness_b - b.margin() * n);
  } else {
    return std::nullopt;
  }

  ContactManifold m;
  m.normal = n;
  const double slab = 1e-5;
  std::vector<Vec3> pa = support_set(a, a_pose * a.local_pose, n, slab);
  std::vector<Vec3> pb = support_set(b, b_pose * b.local_pose, -n, slab);
  if (pa.size() <= 1 || pb.size() <= 1) {
    m.points.push_back({center_point, center_depth});
    return m;
  }

  // 2D basis in the contact plane
  Vec3 u = any_perpendicular(n);
  Vec3 v = n.cross(u);
  auto to2d = [&](const Vec3& p) { return Eigen::Vector2d(p.dot(u), p.dot(v)); };

  double height_a = -std::numeric_limits<double>::infinity();
  for (const Vec3& p : pa) height_a = std::max(height_a, p.dot(n));
  height_a += a.margin();
  double height_b = std::numeric_limits<double>::infinity();
  for (const Vec3& p : pb) height_b = std::min(height_b, p.dot(n));
  height_b -= b.margin();

  std::vector<Eigen::Vector2d> clipped;
  if (pa.size() == 2 && pb.size() == 2) {
    // edge-edge: overlap interval if nearly parallel, else single point
    Eigen::Vector2d a0 = to2d(pa[0]), a1 = to2d(pa[1]);
    Eigen::Vector2d b0 = to2d(pb[0]), b1 = to2d(pb[1]);
    Eigen::Vector2d da = a1 - a0, db = b1 - b0;
    double cross = da.x() * db.y() - da.y() * db.x();
    if (std::abs(cross) < 1e-9 && da.norm() > 1e-12) {
      Eigen::Vector2d dir = da.normalized();
      double lo_a = std::min(dir.dot(a0), dir.dot(a1));
      double hi_a = std::max(dir.dot(a0), dir.dot(a1));
      double lo_b = std::min(dir.dot(b0), dir.dot(b1));
      double hi_b = std::max(dir.dot(b0), dir.dot(b1));
      double lo = std::max(lo_a, lo_b), hi = std::min(hi_a, hi_b);
      if (lo <= hi) {
        Eigen::Vector2d base = a0 - dir.dot(a0) * dir;
        clipped.push_back(base + lo * dir);
        clipped.push_back(base + hi * dir);
      }
    }
    if (clipped.empty()) clipped.push_back(to2d(center_point));
  } else {
    std::vector<Eigen::Vector2d> poly_a, poly_b;
    for (const Vec3& p : pa) poly_a.push_back(to2d(p));
    for (const Vec3& p : pb) poly_b.push_back(to2d(p));
    poly_a = order_ccw(std::move(poly_a));
    poly_b = order_ccw(std::move(poly_b));
    const auto& reference = poly_a.size() >= 3 ? poly_a : poly_b;
    auto incident = poly_a.size() >= 3 ? poly_b : poly_a;
    clipped = clip_polygon(std::move(incident), reference);
    if (clipped.empty()) clipped.push_back(to2d(center_point));
  }

  double gap = height_a - height_b;  // uniform for parallel faces
  double plane_mid = 0.5 * (height_a + height_b);
  for (const auto& p2 : clipped) {
    Vec3 p = p2.x() * u + p2.y() * v + plane_mid * n;
    m.points.push_back({p, gap});
  }
  if (m.points.size() > 8) {
    std::vector<ContactPoint> reduced;
    for (std::size_t i = 0; i < m.points.size(); i += m.points.size() / 8 + 1) {
      reduced.push_back(m.points[i]);
    }
    m.points = std::move(reduced);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Quickhull

namespace {

struct QhFace {
  std::array<std::uint32_t, 3> v;
  Vec3 normal;
  double offset;
  std::vector<std::uint32_t> outside;
  bool alive = true;
};

}  // namespace

HullFaces convex_hull(const std::vector<Vec3>& points) {
  if (points.size() < 4) throw ValidationError("convex_hull: need at least 4 points");
  const double eps = 1e-10;

  // initial extreme tetrahedron
  std::uint32_t imin = 0, imax = 0;
  for (std::uint32_t i = 1; i < points.size(); ++i) {
    if (points[i].x() < points[imin].x()) imin = i;
    if (points[i].x() > points[imax].x()) imax = i;
  }
  if ((points[imax] - points[imin]).norm() < eps) {
    throw ValidationError("convex_hull: degenerate point set");
  }
  std::uint32_t far1 = imin;
  double best = -1;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    Vec3 d = points[imax] - points[imin];
    double dist = (points[i] - points[imin]).cross(d).norm();
    if (dist > best) {
      best = dist;
      far1 = i;
    }
  }
  if (best < eps) throw ValidationError("convex_hull: collinear point set");
  Vec3 plane_n = (points[imax] - points[imin]).cross(points[far1] - points[imin]).normalized();
  std::uint32_t far2 = imin;
  best = -1;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    double dist = std::abs(plane_n.dot(points[i] - points[imin]));
    if (dist > best) {
      best = dist;
      far2 = i;
    }
  }
  if (best < eps) throw ValidationError("convex_hull: coplanar point set");

  std::vector<QhFace> faces;
  Vec3 interior = 0.25 * (points[imin] + points[imax] + points[far1] + points[far2]);
  auto make_face = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    QhFace f;
    Vec3 n = (points[b] - points[a]).cross(points[c] - points[a]);
    double len = n.norm();
    if (len < 1e-18) return f;
    n /= len;
    if (n.dot(points[a] - interior) < 0) {
      std::swap(b, c);
      n = -n;
    }
    f.v = {a, b, c};
    f.normal = n;
    f.offset = n.dot(points[a]);
    return f;
  };
  faces.push_back(make_face(imin, imax, far1));
  faces.push_back(make_face(imin, imax, far2));
  faces.push_back(make_face(imin, far1, far2));
  faces.push_back(make_face(imax, far1, far2));

  auto assign_outside = [&](QhFace& f, const std::vector<std::uint32_t>& candidates) {
    for (std::uint32_t i : candidates) {
      if (f.normal.dot(points[i]) > f.offset + eps) f.outside.push_back(i);
    }
  };
  std::vector<std::uint32_t> all(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) all[i] = i;
  for (auto& f : faces) assign_outside(f, all);

  for (int guard = 0; guard < 100000; ++guard) {
    int fi = -1;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      if (faces[i].alive && !faces[i].outside.empty()) {
        fi = static_cast<int>(i);
        break;
      }
    }
    if (fi < 0) break;
    // farthest outside point of this face
    std::uint32_t far = faces[fi].outside[0];
    double far_d = -1;
    for (std::uint32_t i : faces[fi].outside) {
      double d = faces[fi].normal.dot(points[i]) - faces[fi].offset;
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    // visible faces and horizon
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    std::vector<std::uint32_t> orphan;
    for (auto& f : faces) {
      if (!f.alive) continue;
      if (f.normal.dot(points[far]) > f.offset + eps) {
        f.alive = false;
        for (int k = 0; k < 3; ++k) {
          auto key = std::minmax(f.v[k], f.v[(k + 1) % 3]);
          edges[{key.first, key.second}]++;
        }
        orphan.insert(orphan.end(), f.outside.begin(), f.outside.end());
      }
    }
    std::sort(orphan.begin(), orphan.end());
    orphan.erase(std::unique(orphan.begin(), orphan.end()), orphan.end());
    for (const auto& [edge, count] : edges) {
      if (count != 1) continue;
      QhFace nf = make_face(edge.first, edge.second, far);
      if (nf.normal.squaredNorm() < 0.5) continue;  // degenerate sliver skipped
      // orient away from the hull interior (recompute with current interior)
      assign_outside(nf, orphan);
      faces.push_back(std::move(nf));
    }
  }

  HullFaces out;
  std::map<std::uint32_t, std::uint32_t> remap;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    std::array<std::uint32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = remap.try_emplace(f.v[k], static_cast<std::uint32_t>(out.vertices.size()));
      if (inserted) out.vertices.push_back(points[f.v[k]]);
      tri[k] = it->second;
    }
    out.faces.push_back(tri);
  }
  return out;
}

void validate_convex_piece(const ConvexPiece& piece) {
  if (piece.kind == ConvexPiece::Kind::Box) {
    if ((piece.half_extents.array() <= 0).any()) {
      throw ValidationError("box piece: half extents must be positive");
    }
    return;
  }
  if (piece.kind == ConvexPiece::Kind::Sphere || piece.kind == ConvexPiece::Kind::Capsule) {
    if (piece.radius <= 0) throw ValidationError("piece: radius must be positive");
    return;
  }
  HullFaces hull = convex_hull(piece.vertices);
  for (std::size_t i = 0; i < piece.vertices.size(); ++i) {
    // interior by more than 1e-6 on every face => not a hull vertex
    bool on_boundary = false;
    for (const auto& f : hull.faces) {
      Vec3 n = (hull.vertices[f[1]] - hull.vertices[f[0]])
                   .cross(hull.vertices[f[2]] - hull.vertices[f[0]])
                   .normalized();
      double off = n.dot(hull.vertices[f[0]]);
      if (n.dot(piece.vertices[i]) >= off - 1e-6) {
        on_boundary = true;
        break;
      }
    }
    if (!on_boundary) {
      throw ValidationError("hull piece: vertex " + std::to_string(i) +
                            " is interior to the hull of the others");
    }
  }
}

TriangleMesh piece_to_mesh(const ConvexPiece& piece) {
  TriangleMesh m;
  switch (piece.kind) {
    case ConvexPiece::Kind::Box:
      m = make_box_mesh(2.0 * piece.half_extents);
      break;
    case ConvexPiece::Kind::Sphere:
      m = make_icosphere(piece.radius, 2);
      break;
    case ConvexPiece::Kind::Capsule: {
      // cylinder plus hemispherical caps, coarse
      m = make_cylinder(piece.radius, 2.0 * piece.half_length, 16);
      TriangleMesh top = make_icosphere(piece.radius, 1, Vec3(0, 0, piece.half_length));
      TriangleMesh bot = make_icosphere(piece.radius, 1, Vec3(0, 0, -piece.half_length));
      for (const TriangleMesh* cap : {&top, &bot}) {
        std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
        m.vertices.insert(m.vertices.end(), cap->vertices.begin(), cap->vertices.end());
        for (const auto& t : cap->triangles) {
          m.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
        }
      }
      m.finalize();
      break;
    }
    case ConvexPiece::Kind::Hull: {
      HullFaces hull = convex_hull(piece.vertices);
      m.vertices = hull.vertices;
      m.triangles = hull.faces;
      m.finalize();
      break;
    }
  }
  for (Vec3& v : m.vertices) v = piece.local_pose.apply(v);
  m.finalize();
  return m;
}

TriangleMesh body_to_mesh(const std::vector<ConvexPiece>& pieces) {
  TriangleMesh m;
  for (const ConvexPiece& p : pieces) {
    TriangleMesh pm = piece_to_mesh(p);
    std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), pm.vertices.begin(), pm.vertices.end());
    for (const auto& t : pm.triangles) m.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  m.finalize();
  return m;
}

}  // namespace gk
