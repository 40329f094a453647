#include "graspkit/convex.hpp"

#include <cmath>
#include <optional>

#include "doctest.h"
#include "graspkit/bvh.hpp"
#include "graspkit/common.hpp"

using namespace gk;

namespace {

Quat random_quat(Rng& rng) {
  double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  double s1 = std::sqrt(1 - u1), s2 = std::sqrt(u1);
  return Quat(s2 * std::cos(2 * M_PI * u3), s1 * std::sin(2 * M_PI * u2),
              s1 * std::cos(2 * M_PI * u2), s2 * std::sin(2 * M_PI * u3));
}

// Brute-force separating-axis test for two oriented boxes: exact minimal
// translation depth over the 15 candidate axes. Independent of GJK/EPA.
std::optional<std::pair<Vec3, double>> sat_box_box(const Vec3& half_a, const Pose& pose_a,
                                                   const Vec3& half_b, const Pose& pose_b) {
  Mat3 ra = pose_a.rotation_matrix();
  Mat3 rb = pose_b.rotation_matrix();
  Vec3 d = pose_b.translation - pose_a.translation;
  std::vector<Vec3> axes;
  for (int i = 0; i < 3; ++i) axes.push_back(ra.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(rb.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Vec3 c = ra.col(i).cross(rb.col(j));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  }
  double best = std::numeric_limits<double>::infinity();
  Vec3 best_axis = Vec3::UnitX();
  for (const Vec3& axis : axes) {
    double proj_a = 0, proj_b = 0;
    for (int i = 0; i < 3; ++i) {
      proj_a += half_a[i] * std::abs(axis.dot(ra.col(i)));
      proj_b += half_b[i] * std::abs(axis.dot(rb.col(i)));
    }
    double overlap = proj_a + proj_b - std::abs(axis.dot(d));
    if (overlap < 0) return std::nullopt;
    if (overlap < best) {
      best = overlap;
      best_axis = axis.dot(d) >= 0 ? axis : Vec3(-axis);
    }
  }
  return std::make_pair(best_axis, best);
}

}  // namespace

TEST_CASE("two unit cubes 0.9 m apart on x overlap by 0.1 with an x normal") {
  ConvexPiece cube = ConvexPiece::box(Vec3(0.5, 0.5, 0.5));
  CollisionQuery q = collide(cube, Pose::identity(), cube,
                             Pose::from_translation(Vec3(0.9, 0, 0)));
  REQUIRE(q.contact.has_value());
  CHECK(q.contact->penetration == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(std::abs(q.contact->normal.x()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q.contact->normal.x() > 0);  // A -> B points along +x
}

TEST_CASE("spheres r=0.1 at distance 0.3 report separation 0.1") {
  ConvexPiece s = ConvexPiece::sphere(0.1);
  CollisionQuery q = collide(s, Pose::identity(), s, Pose::from_translation(Vec3(0.3, 0, 0)));
  CHECK(!q.contact.has_value());
  REQUIRE(q.separation.has_value());
  CHECK(*q.separation == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("separation beyond 10 cm is not reported") {
  ConvexPiece s = ConvexPiece::sphere(0.1);
  CollisionQuery q = collide(s, Pose::identity(), s, Pose::from_translation(Vec3(0.5, 0, 0)));
  CHECK(!q.contact.has_value());
  CHECK(!q.separation.has_value());
}

TEST_CASE("identical cubes at identical pose give full-overlap depth 1.0") {
  ConvexPiece cube = ConvexPiece::box(Vec3(0.5, 0.5, 0.5));
  auto oracle = sat_box_box(Vec3(0.5, 0.5, 0.5), Pose::identity(), Vec3(0.5, 0.5, 0.5),
                            Pose::identity());
  REQUIRE(oracle.has_value());
  CHECK(oracle->second == doctest::Approx(1.0));
  CollisionQuery q = collide(cube, Pose::identity(), cube, Pose::identity());
  REQUIRE(q.contact.has_value());
  CHECK(q.contact->penetration == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("overlapping spheres give analytic penetration and witness point") {
  ConvexPiece s1 = ConvexPiece::sphere(0.1);
  ConvexPiece s2 = ConvexPiece::sphere(0.05);
  CollisionQuery q = collide(s1, Pose::identity(), s2, Pose::from_translation(Vec3(0.12, 0, 0)));
  REQUIRE(q.contact.has_value());
  CHECK(q.contact->penetration == doctest::Approx(0.03).epsilon(1e-9));
  CHECK((q.contact->normal - Vec3(1, 0, 0)).norm() < 1e-9);
  // witness midway between surface points at x=0.1 and x=0.07
  CHECK(q.contact->point.x() == doctest::Approx(0.085).epsilon(1e-9));
}

TEST_CASE("collide matches brute-force SAT on random box pairs") {
  Rng rng(31);
  int overlapping = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Vec3 half_a(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5));
    Vec3 half_b(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5));
    Pose pose_a = Pose::make(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                  rng.uniform(-0.3, 0.3)),
                             random_quat(rng));
    Pose pose_b = Pose::make(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                  rng.uniform(-0.3, 0.3)),
                             random_quat(rng));
    auto oracle = sat_box_box(half_a, pose_a, half_b, pose_b);
    CollisionQuery q =
        collide(ConvexPiece::box(half_a), pose_a, ConvexPiece::box(half_b), pose_b);
    if (oracle.has_value()) {
      ++overlapping;
      REQUIRE(q.contact.has_value());
      CHECK(q.contact->penetration == doctest::Approx(oracle->second).epsilon(1e-4));
    } else {
      CHECK(!q.contact.has_value());
    }
  }
  CHECK(overlapping > 50);  // the sampling actually exercises both branches
}

TEST_CASE("collide is symmetric up to normal sign flip") {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 half(rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4));
    Pose pa = Pose::make(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                              rng.uniform(-0.3, 0.3)),
                         random_quat(rng));
    Pose pb = Pose::make(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                              rng.uniform(-0.3, 0.3)),
                         random_quat(rng));
    ConvexPiece a = ConvexPiece::box(half);
    ConvexPiece b = ConvexPiece::sphere(0.1);
    CollisionQuery qab = collide(a, pa, b, pb);
    CollisionQuery qba = collide(b, pb, a, pa);
    CHECK(qab.contact.has_value() == qba.contact.has_value());
    if (qab.contact && qba.contact) {
      CHECK(qab.contact->penetration == doctest::Approx(qba.contact->penetration).epsilon(1e-5));
      CHECK((qab.contact->normal + qba.contact->normal).norm() < 1e-4);
    }
  }
}

TEST_CASE("quickhull of a cube with interior points finds 8 vertices 12 faces") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1);
  }
  pts.emplace_back(0, 0, 0);
  pts.emplace_back(0.3, 0.1, -0.2);
  HullFaces hull = convex_hull(pts);
  CHECK(hull.vertices.size() == 8);
  CHECK(hull.faces.size() == 12);
}

TEST_CASE("hull piece with an interior vertex fails validation") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1);
  }
  ConvexPiece ok = ConvexPiece::hull(pts);
  CHECK_NOTHROW(validate_convex_piece(ok));
  pts.emplace_back(0, 0, 0);
  ConvexPiece bad = ConvexPiece::hull(pts);
  CHECK_THROWS_AS(validate_convex_piece(bad), ValidationError);
}

TEST_CASE("hull pieces collide like their box equivalents") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back(((i & 1) ? 1 : -1) * 0.5, ((i & 2) ? 1 : -1) * 0.5,
                     ((i & 4) ? 1 : -1) * 0.5);
  }
  ConvexPiece hull = ConvexPiece::hull(pts);
  CollisionQuery q = collide(hull, Pose::identity(), hull,
                             Pose::from_translation(Vec3(0.9, 0, 0)));
  REQUIRE(q.contact.has_value());
  CHECK(q.contact->penetration == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("box resting on a slab produces a four-point manifold") {
  ConvexPiece slab = ConvexPiece::box(Vec3(5, 5, 0.5));
  ConvexPiece box = ConvexPiece::box(Vec3(0.5, 0.5, 0.5));
  // box bottom at z = 1.0 - 1e-4 (slab top at 0.5 + 0.5 = wait: slab at origin, top z=0.5)
  Pose box_pose = Pose::from_translation(Vec3(0, 0, 1.0 - 1e-4));
  auto m = contact_manifold(slab, Pose::identity(), box, box_pose);
  REQUIRE(m.has_value());
  CHECK(m->points.size() == 4);
  CHECK(std::abs(m->normal.z()) == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& p : m->points) {
    CHECK(p.depth == doctest::Approx(1e-4).epsilon(1e-3));
  }
}

TEST_CASE("sphere on slab produces a single-point manifold") {
  ConvexPiece slab = ConvexPiece::box(Vec3(5, 5, 0.5));
  ConvexPiece ball = ConvexPiece::sphere(0.1);
  Pose pose = Pose::from_translation(Vec3(0, 0, 0.6 - 1e-4));
  auto m = contact_manifold(slab, Pose::identity(), ball, pose);
  REQUIRE(m.has_value());
  CHECK(m->points.size() == 1);
  CHECK(m->points[0].depth == doctest::Approx(1e-4).epsilon(1e-3));
}

TEST_CASE("ray hits unit cube from above at the expected point") {
  TriangleMesh cube = make_box_mesh(Vec3(1, 1, 1));
  MeshBvh bvh(cube);
  auto hit = bvh.ray_cast(Vec3(0, 0, 2), Vec3(0, 0, -1));
  REQUIRE(hit.has_value());
  CHECK((hit->point - Vec3(0, 0, 0.5)).norm() < 1e-12);
  CHECK((hit->normal - Vec3(0, 0, 1)).norm() < 1e-12);
  CHECK(hit->distance == doctest::Approx(1.5));
}

TEST_CASE("ray from inside the cube hits the inner side of the +x face") {
  TriangleMesh cube = make_box_mesh(Vec3(1, 1, 1));
  MeshBvh bvh(cube);
  auto hit = bvh.ray_cast(Vec3(0, 0, 0), Vec3(1, 0, 0));
  REQUIRE(hit.has_value());
  CHECK((hit->point - Vec3(0.5, 0, 0)).norm() < 1e-12);
  CHECK((hit->normal - Vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("ray parallel to and outside the cube misses") {
  TriangleMesh cube = make_box_mesh(Vec3(1, 1, 1));
  MeshBvh bvh(cube);
  CHECK(!bvh.ray_cast(Vec3(0, 2, 2), Vec3(1, 0, 0)).has_value());
}

TEST_CASE("zero ray direction is an error") {
  TriangleMesh cube = make_box_mesh(Vec3(1, 1, 1));
  MeshBvh bvh(cube);
  CHECK_THROWS_AS(bvh.ray_cast(Vec3(0, 0, 2), Vec3(0, 0, 0)), ValidationError);
}

TEST_CASE("ray hit point lies on the mesh surface within 1e-7") {
  TriangleMesh ball = make_icosphere(0.5, 2);
  MeshBvh bvh(ball);
  Rng rng(41);
  for (int i = 0; i < 500; ++i) {
    Vec3 origin(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    if (origin.norm() < 0.7) continue;
    Vec3 dir = (Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)) -
                origin);
    auto hit = bvh.ray_cast(origin, dir);
    if (!hit) continue;
    const auto& tri = ball.triangles[hit->triangle];
    Vec3 a = ball.vertices[tri[0]];
    Vec3 n = ball.normals[hit->triangle];
    CHECK(std::abs(n.dot(hit->point - a)) < 1e-7);
  }
}

TEST_CASE("BVH ray casting equals brute force on meshes up to 500 triangles") {
  TriangleMesh ball = make_icosphere(0.4, 2);  // 320 triangles
  REQUIRE(ball.triangle_count() <= 500);
  MeshBvh bvh(ball);
  Rng rng(43);
  for (int i = 0; i < 2000; ++i) {
    Vec3 origin(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 dir(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (dir.norm() < 1e-3) continue;
    auto fast = bvh.ray_cast(origin, dir);
    auto brute = ray_cast_brute(ball, origin, dir);
    REQUIRE(fast.has_value() == brute.has_value());
    if (fast) {
      CHECK(fast->triangle == brute->triangle);
      CHECK(fast->distance == doctest::Approx(brute->distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("piece_to_mesh box matches analytic surface area") {
  ConvexPiece box = ConvexPiece::box(Vec3(0.1, 0.2, 0.3));
  TriangleMesh m = piece_to_mesh(box);
  double expected = 2 * (0.2 * 0.4 + 0.2 * 0.6 + 0.4 * 0.6);
  CHECK(m.surface_area() == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("piece vs mesh collision detects overlap and miss") {
  TriangleMesh cube = make_box_mesh(Vec3(1, 1, 1));
  MeshBvh bvh(cube);
  ConvexPiece ball = ConvexPiece::sphere(0.2);
  auto hit = collide_piece_mesh(ball, Pose::from_translation(Vec3(0, 0, 0.6)), bvh,
                                Pose::identity());
  REQUIRE(hit.has_value());
  CHECK(hit->penetration == doctest::Approx(0.1).epsilon(1e-6));
  auto miss = collide_piece_mesh(ball, Pose::from_translation(Vec3(0, 0, 0.8)), bvh,
                                 Pose::identity());
  CHECK(!miss.has_value());
}
