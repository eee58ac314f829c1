#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "slabforge/error.hpp"
#include "slabforge/mesh.hpp"

using namespace slabforge;

TEST_CASE("chainsaw predicate rejects monotone windows") {
  CHECK(chainsaw_ok({1, 5, 2, 6, 3, 7}));
  CHECK_FALSE(chainsaw_ok({1, 2, 3, 4, 5, 6}));  // window (1,2,3) is monotone
  CHECK_FALSE(chainsaw_ok({6, 5, 4, 1, 2, 0}));  // window (6,5,4) is monotone
  // Wrap-around windows count too: (5,6,1) and (6,1,2) are fine but (2,5,6) is not.
  CHECK_FALSE(chainsaw_ok({1, 2, 5, 6, 3, 4}));
}

TEST_CASE("chainsaw assignment interleaves the sorted pool") {
  const std::vector<VertexId> seq = assign_chainsaw_ids(6, {1, 2, 3, 5, 6, 7});
  CHECK(seq == std::vector<VertexId>{1, 5, 2, 6, 3, 7});
  CHECK(chainsaw_ok(seq));
}

TEST_CASE("chainsaw assignment on a 100-ring passes the predicate") {
  std::vector<VertexId> pool(100);
  std::iota(pool.begin(), pool.end(), 0);
  const std::vector<VertexId> seq = assign_chainsaw_ids(100, pool);
  REQUIRE(seq.size() == 100);
  CHECK(chainsaw_ok(seq));
  // Exhaustive cyclic-window scan, spelled out independently of chainsaw_ok.
  for (std::size_t i = 0; i < 100; ++i) {
    const VertexId a = seq[i], b = seq[(i + 1) % 100], c = seq[(i + 2) % 100];
    const bool monotone = (a < b && b < c) || (a > b && b > c);
    CHECK_FALSE(monotone);
  }
}

TEST_CASE("chainsaw assignment rejects odd rings and bad pools") {
  CHECK_THROWS_AS(assign_chainsaw_ids(5, {0, 1, 2, 3, 4}), InvalidArgument);
  CHECK_THROWS_AS(assign_chainsaw_ids(6, {0, 1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(assign_chainsaw_ids(4, {0, 1, 2, 2}), InvalidArgument);  // duplicate ids
}

TEST_CASE("two-layer annulus: 100 quads per layer, three rings of 100 vertices") {
  const SpatialMesh mesh = build_annulus_mesh(Vec2{0.0, 0.0}, 4.4, 4.7, 5.0, 100);
  CHECK(mesh.vertex_count() == 300);
  CHECK(mesh.quads.size() == 200);
  REQUIRE(mesh.annulus.has_value());
  CHECK(mesh.annulus->n_quads == 100);
  CHECK(mesh.annulus->inner_ring.seq.size() == 100);
  CHECK(mesh.annulus->mid_ring.size() == 100);
  CHECK(mesh.annulus->outer_ring.seq.size() == 100);
  CHECK(mesh.annulus->sliding_shift == 0);
  CHECK(validate_spatial_mesh(mesh).ok());

  SUBCASE("radius ordering holds exactly on every quad") {
    for (const AnnulusQuad& q : mesh.quads) {
      const double r1 = dist(mesh.position(q.n1), mesh.rotation_center);
      const double r2 = dist(mesh.position(q.n2), mesh.rotation_center);
      const double r3 = dist(mesh.position(q.n3), mesh.rotation_center);
      const double r4 = dist(mesh.position(q.n4), mesh.rotation_center);
      CHECK(std::max(r1, r2) < std::min(r3, r4));
    }
  }
  SUBCASE("chainsaw numbering on both interface rings") {
    CHECK(chainsaw_ok(mesh.annulus->inner_ring.seq));
    CHECK(chainsaw_ok(mesh.annulus->outer_ring.seq));
  }
  SUBCASE("both quad halves are counterclockwise") {
    for (const AnnulusQuad& q : mesh.quads) {
      const Vec2 p1 = mesh.position(q.n1), p2 = mesh.position(q.n2);
      const Vec2 p3 = mesh.position(q.n3), p4 = mesh.position(q.n4);
      CHECK(triangle_signed_area(p1, p2, p4) > 0.0);
      CHECK(triangle_signed_area(p2, p3, p4) > 0.0);
    }
  }
}

TEST_CASE("annulus size edge cases") {
  const SpatialMesh small = build_annulus_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 6);
  CHECK(small.quads.size() == 12);
  CHECK(validate_spatial_mesh(small).ok());
  CHECK_THROWS_AS(build_annulus_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 5), InvalidArgument);
  CHECK_THROWS_AS(build_annulus_mesh(Vec2{0.0, 0.0}, 1.5, 1.0, 2.0, 6), InvalidArgument);
}

TEST_CASE("validator flags constructed defects") {
  SUBCASE("inverted triangle") {
    SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 8);
    REQUIRE(validate_spatial_mesh(mesh).ok());
    std::swap(mesh.triangles.front().v[0], mesh.triangles.front().v[1]);
    const ValidationReport report = validate_spatial_mesh(mesh);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("area") != std::string::npos);
  }
  SUBCASE("unbalanced layer counts (99 buffer vs 100 sliding)") {
    SpatialMesh mesh = build_annulus_mesh(Vec2{0.0, 0.0}, 4.4, 4.7, 5.0, 100);
    const auto is_buffer = [](const AnnulusQuad& q) { return q.layer == Layer::Buffer; };
    const auto it = std::find_if(mesh.quads.begin(), mesh.quads.end(), is_buffer);
    REQUIRE(it != mesh.quads.end());
    mesh.quads.erase(it);
    const ValidationReport report = validate_spatial_mesh(mesh);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("layer") != std::string::npos);
  }
  SUBCASE("duplicate vertex coordinates") {
    SpatialMesh mesh = build_annulus_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 8);
    mesh.vertices[1].pos = mesh.vertices[0].pos;
    CHECK_FALSE(validate_spatial_mesh(mesh).ok());
  }
}

TEST_CASE("annulus disk generator produces a valid mesh with a rotating fan") {
  const SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{1.0, -2.0}, 1.0, 1.5, 2.0, 3.2, 16);
  const ValidationReport report = validate_spatial_mesh(mesh);
  INFO(report.to_string());
  CHECK(report.ok());
  REQUIRE(mesh.annulus.has_value());

  // Regions: a rotating fan inside the annulus, static ring outside.
  bool has_rotating = false, has_static = false;
  for (const Triangle& t : mesh.triangles) {
    has_rotating = has_rotating || t.region == Region::Rotating;
    has_static = has_static || t.region == Region::Static;
  }
  CHECK(has_rotating);
  CHECK(has_static);

  // Body loop is the inner interface ring, counterclockwise.
  REQUIRE_FALSE(mesh.body_loop.empty());
  double area2 = 0.0;
  for (std::size_t i = 0; i < mesh.body_loop.size(); ++i) {
    const Vec2 a = mesh.position(mesh.body_loop[i]);
    const Vec2 b = mesh.position(mesh.body_loop[(i + 1) % mesh.body_loop.size()]);
    area2 += cross(a, b);
  }
  CHECK(area2 > 0.0);

  SUBCASE("omitting the static ring still validates") {
    const SpatialMesh bare = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 16);
    CHECK(validate_spatial_mesh(bare).ok());
    CHECK(bare.vertex_count() < mesh.vertex_count());
  }
}

TEST_CASE("box ring generator produces a valid static mesh around a square body") {
  const SpatialMesh mesh = generate_box_ring_mesh(Vec2{0.0, 0.0}, 0.5, 8.0, 8, 6);
  const ValidationReport report = validate_spatial_mesh(mesh);
  INFO(report.to_string());
  CHECK(report.ok());
  CHECK(mesh.quads.empty());
  CHECK_FALSE(mesh.annulus.has_value());
  for (const Triangle& t : mesh.triangles) CHECK(t.region == Region::Static);

  REQUIRE(mesh.body_loop.size() == 4 * 8);
  double area2 = 0.0;
  for (std::size_t i = 0; i < mesh.body_loop.size(); ++i) {
    const Vec2 a = mesh.position(mesh.body_loop[i]);
    const Vec2 b = mesh.position(mesh.body_loop[(i + 1) % mesh.body_loop.size()]);
    area2 += cross(a, b);
  }
  CHECK(0.5 * area2 == doctest::Approx(1.0).epsilon(1e-12));  // unit square body
}

TEST_CASE("full triangulation splits every quad by the n2-n4 diagonal") {
  const SpatialMesh mesh = build_annulus_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 8);
  const std::vector<Triangle> tris = mesh.full_triangulation();
  CHECK(tris.size() == mesh.triangles.size() + 2 * mesh.quads.size());
  // Each quad contributes triangles (n1,n2,n4) and (n2,n3,n4).
  const AnnulusQuad& q = mesh.quads.front();
  std::set<std::set<VertexId>> keys;
  for (const Triangle& t : tris) keys.insert({t.v[0], t.v[1], t.v[2]});
  CHECK(keys.count({q.n1, q.n2, q.n4}) == 1);
  CHECK(keys.count({q.n2, q.n3, q.n4}) == 1);
}
