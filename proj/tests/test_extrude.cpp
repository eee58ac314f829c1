#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "slabforge/error.hpp"
#include "slabforge/extrude.hpp"
#include "slabforge/mesh.hpp"
#include "slabforge/motion.hpp"
#include "slabforge/sliding.hpp"

using namespace slabforge;

namespace {

/// One-prism slab: bottom triangle ids (0,1,2), top (3,4,5), cut by the given
/// tets (global ids in 0..5).
SpaceTimeSlab mini_slab(const std::array<Vec2, 3>& bottom, const std::array<Vec2, 3>& top,
                        const std::array<std::array<VertexId, 4>, 3>& tets, double t0 = 0.0,
                        double t1 = 1.0) {
  SpaceTimeSlab slab;
  slab.t_start = t0;
  slab.t_end = t1;
  slab.id_base = 0;
  slab.n_per_level = 3;
  slab.bottom_pos.assign(bottom.begin(), bottom.end());
  slab.top_pos.assign(top.begin(), top.end());
  for (const auto& t : tets) {
    SpaceTimeTet tet;
    tet.v = t;
    slab.tets.push_back(tet);
  }
  return slab;
}

std::set<std::set<VertexId>> tet_sets(const std::array<std::array<VertexId, 4>, 3>& tets) {
  std::set<std::set<VertexId>> out;
  for (const auto& t : tets) out.insert({t[0], t[1], t[2], t[3]});
  return out;
}

}  // namespace

TEST_CASE("smallest-id prism cut: canonical labeling") {
  const auto tets = cut_prism({0, 1, 2}, {3, 4, 5});
  CHECK(tets[0] == std::array<VertexId, 4>{0, 1, 2, 5});
  CHECK(tets[1] == std::array<VertexId, 4>{0, 1, 5, 4});
  CHECK(tets[2] == std::array<VertexId, 4>{0, 4, 5, 3});
}

TEST_CASE("smallest-id prism cut is invariant under cyclic relabeling") {
  const auto canonical = tet_sets(cut_prism({0, 1, 2}, {3, 4, 5}));
  const auto rotated = tet_sets(cut_prism({2, 0, 1}, {5, 3, 4}));
  CHECK(rotated == canonical);
  const auto rotated2 = tet_sets(cut_prism({1, 2, 0}, {4, 5, 3}));
  CHECK(rotated2 == canonical);
}

TEST_CASE("prism cut rejects malformed id triples") {
  CHECK_THROWS_AS(cut_prism({0, 0, 2}, {3, 3, 5}), InvalidArgument);   // duplicate bottom ids
  CHECK_THROWS_AS(cut_prism({0, 1, 2}, {3, 4, 6}), InvalidArgument);   // non-uniform shift
  CHECK_THROWS_AS(cut_prism({0, 1, 5}, {3, 4, 8}), InvalidArgument);   // levels interleave
  CHECK_THROWS_AS(cut_prism({3, 4, 5}, {0, 1, 2}), InvalidArgument);   // negative shift
}

TEST_CASE("diagonal-assignment census: exactly 6 of 8 are valid") {
  const auto assignments = enumerate_prism_cut_assignments({0, 1, 2}, {3, 4, 5});
  REQUIRE(assignments.size() == 8);
  int valid = 0;
  for (std::size_t mask = 0; mask < 8; ++mask) {
    const bool ok = is_valid_cut(assignments[mask]);
    valid += ok ? 1 : 0;
    // The two perfect matchings (no shared endpoint) are the invalid ones.
    CHECK(ok == (mask != 0 && mask != 7));
  }
  CHECK(valid == 6);

  SUBCASE("the smallest-id diagonals form a valid assignment") {
    // Sides of prism (0,1,2)/(3,4,5): diagonals 0-4, 1-5, 0-5 (mask 0,0,1).
    const PrismDiagonals smallest{{{0, 4}, {1, 5}, {0, 5}}};
    CHECK(is_valid_cut(smallest));
  }
}

TEST_CASE("random prisms: tet volumes are positive and fill the prism exactly") {
  std::mt19937_64 rng(20260814);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> wobble(-0.25, 0.25);
  std::uniform_int_distribution<std::int64_t> id_start(0, 1000);
  std::uniform_int_distribution<std::int64_t> id_gap(3, 50);

  int checked = 0;
  bool naive_oracle_differed = false;
  while (checked < 200) {
    std::array<Vec2, 3> bottom{Vec2{coord(rng), coord(rng)}, Vec2{coord(rng), coord(rng)},
                               Vec2{coord(rng), coord(rng)}};
    if (triangle_signed_area(bottom[0], bottom[1], bottom[2]) < 0.1) continue;
    std::array<Vec2, 3> top = bottom;
    for (Vec2& p : top) {
      p.x += wobble(rng);
      p.y += wobble(rng);
    }
    if (triangle_signed_area(top[0], top[1], top[2]) < 0.05) continue;
    ++checked;

    // Random distinct bottom ids and a uniform positive shift that clears the
    // id spread (so all top ids exceed all bottom ids).
    std::array<VertexId, 3> ids{};
    const std::int64_t base = id_start(rng);
    ids[0] = base;
    ids[1] = base + id_gap(rng);
    ids[2] = ids[1] + id_gap(rng);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::int64_t spread =
        *std::max_element(ids.begin(), ids.end()) - *std::min_element(ids.begin(), ids.end());
    const std::int64_t shift = spread + id_gap(rng);
    std::array<VertexId, 3> tops{ids[0] + shift, ids[1] + shift, ids[2] + shift};

    auto tets = cut_prism(ids, tops);
    // Relabel to local ids 0..5 (the cut depends on the original ids).
    std::map<VertexId, VertexId> local;
    for (int k = 0; k < 3; ++k) {
      local[ids[static_cast<std::size_t>(k)]] = k;
      local[tops[static_cast<std::size_t>(k)]] = k + 3;
    }
    for (auto& tet : tets) {
      for (VertexId& v : tet) v = local.at(v);
    }
    const SpaceTimeSlab slab = mini_slab(bottom, top, tets, 0.25, 0.75);

    for (std::size_t k = 0; k < 3; ++k) CHECK(slab.tet_volume(k) > 0.0);
    const SlabVolumeCheck vc = slab_volume_check(slab);
    CHECK(vc.tet_total ==
          doctest::Approx(vc.simpson_total).epsilon(1e-12));
    CHECK(vc.area_bottom ==
          doctest::Approx(triangle_signed_area(bottom[0], bottom[1], bottom[2])).epsilon(1e-12));
    CHECK(vc.area_top ==
          doctest::Approx(triangle_signed_area(top[0], top[1], top[2])).epsilon(1e-12));

    // The tempting shortcut oracle — Simpson on the area of the *interpolated*
    // triangle — is wrong: prism sides are non-planar, so the flat-facet
    // boundary does not sweep the interpolated triangle.
    const auto interp_area = [&](double lam) {
      std::array<Vec2, 3> p;
      for (int k = 0; k < 3; ++k) {
        const auto i = static_cast<std::size_t>(k);
        p[i] = Vec2{bottom[i].x + lam * (top[i].x - bottom[i].x),
                    bottom[i].y + lam * (top[i].y - bottom[i].y)};
      }
      return triangle_signed_area(p[0], p[1], p[2]);
    };
    const double naive =
        (slab.t_end - slab.t_start) / 6.0 * (interp_area(0.0) + 4.0 * interp_area(0.5) + interp_area(1.0));
    if (std::abs(naive - vc.tet_total) > 1e-6 * std::abs(vc.tet_total)) {
      naive_oracle_differed = true;
    }
  }
  CHECK(naive_oracle_differed);
}

TEST_CASE("facet classification on a single prism") {
  const auto tets = cut_prism({0, 1, 2}, {3, 4, 5});
  const SpaceTimeSlab slab = mini_slab({Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}},
                                       {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}, tets);
  const auto table = build_facet_table(slab);
  int bottom = 0, top = 0, lateral = 0, interior = 0;
  for (const auto& [key, use] : table) {
    (void)key;
    switch (use.cls) {
      case FacetClass::Bottom: ++bottom; CHECK(use.multiplicity == 1); break;
      case FacetClass::Top: ++top; CHECK(use.multiplicity == 1); break;
      case FacetClass::Lateral: ++lateral; CHECK(use.multiplicity == 1); break;
      case FacetClass::Interior: ++interior; CHECK(use.multiplicity == 2); break;
    }
  }
  CHECK(bottom == 1);
  CHECK(top == 1);
  CHECK(lateral == 6);   // two triangles per quad side
  CHECK(interior == 2);  // the two internal cut faces
}

TEST_CASE("no-swap extrusion of a disk mesh validates and counts prisms") {
  const SpatialMesh bottom = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 3.0, 12);
  const ReferenceMotion motion = ReferenceMotion::build(bottom, std::nullopt);
  SpatialMesh top = bottom;
  motion.reposition(top, 0.1, 0.0);
  top.id_offset = bottom.vertex_count();

  ExtrudeStats stats;
  const SpaceTimeSlab slab = extrude_slab(bottom, top, SwapDecision{}, 0.0, 0.5, nullptr, &stats);
  const std::size_t n_tris = bottom.full_triangulation().size();
  CHECK(stats.prisms == static_cast<std::int64_t>(n_tris));
  CHECK(stats.blocks == 0);
  CHECK(slab.tets.size() == 3 * n_tris);

  const ConformityReport report = validate_slab(slab, &bottom, &top);
  INFO(report.to_string());
  CHECK(report.ok());

  SUBCASE("validator needs no meshes for the core checks") {
    CHECK(validate_slab(slab).ok());
  }
  SUBCASE("volume identity matches the analytic annulus area") {
    const SlabVolumeCheck vc = slab_volume_check(slab);
    CHECK(vc.tet_total == doctest::Approx(vc.simpson_total).epsilon(1e-12));
    CHECK(vc.area_bottom == doctest::Approx(vc.area_top).epsilon(1e-12));
  }
}

TEST_CASE("extrusion rejects incompatible mesh pairs") {
  const SpatialMesh bottom = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 12);
  SpatialMesh top = bottom;
  top.id_offset = bottom.vertex_count();

  SUBCASE("bad time interval") {
    CHECK_THROWS_AS(extrude_slab(bottom, top, SwapDecision{}, 1.0, 1.0), InvalidArgument);
  }
  SUBCASE("wrong id offset") {
    top.id_offset = 7;
    CHECK_THROWS_AS(extrude_slab(bottom, top, SwapDecision{}, 0.0, 1.0), ConformityError);
  }
  SUBCASE("different triangle connectivity") {
    std::swap(top.triangles.front().v[0], top.triangles.front().v[1]);
    CHECK_THROWS_AS(extrude_slab(bottom, top, SwapDecision{}, 0.0, 1.0), ConformityError);
  }
  SUBCASE("sliding families differ without a declared swap") {
    SwapDecision swap;
    swap.swap = true;
    swap.direction = SwapDirection::PrimaryToSecondary;
    swap.shift_delta = -1;
    // Top mesh still carries the shift-0 family: the declared swap contradicts it.
    CHECK_THROWS_AS(extrude_slab(bottom, top, swap, 0.0, 1.0), Error);
  }
}

TEST_CASE("validate_slab flags constructed defects") {
  const SpatialMesh bottom = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 8);
  const ReferenceMotion motion = ReferenceMotion::build(bottom, std::nullopt);
  SpatialMesh top = bottom;
  motion.reposition(top, 0.05, 0.0);
  top.id_offset = bottom.vertex_count();
  const SpaceTimeSlab good = extrude_slab(bottom, top, SwapDecision{}, 0.0, 1.0);
  REQUIRE(validate_slab(good, &bottom, &top).ok());

  SUBCASE("a missing tet is caught against the reference meshes") {
    SpaceTimeSlab bad = good;
    bad.tets.pop_back();
    // Without references the remainder is a conforming mesh of a smaller
    // region, so only the mesh-anchored checks can see the hole.
    CHECK(validate_slab(bad).ok());
    CHECK_FALSE(validate_slab(bad, &bottom, &top).ok());
  }
  SUBCASE("an interior void is caught by the lateral-edge check") {
    SpaceTimeSlab bad = good;
    // Remove a middle tet (two vertices per level): bottom and top facet
    // covers stay intact, but laterals appear above interior edges.
    for (std::size_t k = 0; k < bad.tets.size(); ++k) {
      int on_top = 0;
      for (VertexId v : bad.tets[k].v) on_top += bad.is_top_level(v) ? 1 : 0;
      if (on_top == 2) {
        bad.tets.erase(bad.tets.begin() + static_cast<std::ptrdiff_t>(k));
        break;
      }
    }
    REQUIRE(bad.tets.size() == good.tets.size() - 1);
    CHECK(validate_slab(bad).ok());
    const ConformityReport report = validate_slab(bad, &bottom, &top);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("interior edge") != std::string::npos);
  }
  SUBCASE("a duplicated tet breaks facet multiplicity") {
    SpaceTimeSlab bad = good;
    bad.tets.push_back(bad.tets.front());
    CHECK_FALSE(validate_slab(bad).ok());
  }
  SUBCASE("an inverted tet is reported as non-positive volume") {
    SpaceTimeSlab bad = good;
    std::swap(bad.tets.front().v[0], bad.tets.front().v[1]);
    const ConformityReport report = validate_slab(bad);
    CHECK_FALSE(report.ok());
    CHECK(report.to_string().find("volume") != std::string::npos);
  }
  SUBCASE("an out-of-range vertex id is reported") {
    SpaceTimeSlab bad = good;
    bad.tets.front().v[0] = bad.id_base + 2 * bad.n_per_level + 5;
    CHECK_FALSE(validate_slab(bad).ok());
  }
}

TEST_CASE("block reference geometry") {
  CHECK(block_local_index(0, 0, 0) == 0);
  CHECK(block_local_index(0, 1, 2) == 5);
  CHECK(block_local_index(1, 0, 1) == 7);
  const SpaceTimePoint p = block_reference_point(block_local_index(1, 1, 2));
  CHECK(p.t == 1.0);
  CHECK(p.x == 2.0);  // ring direction maps to x
  CHECK(p.y == 1.0);  // angular direction maps to y
}

TEST_CASE("block derivation for the all-zero pattern is a conforming partition") {
  // With reference ids 0..11 (inner < mid < outer, bottom < top), every
  // smallest-id diagonal is the c00-c11 one, i.e. the all-zero pattern. The
  // search is free to pick any partition with that boundary (it need not be
  // the stacked prism cuts), but it must tile the two hexahedra exactly.
  BlockPattern pattern{};  // all bits zero
  const auto derived = derive_block_connectivity(pattern);
  REQUIRE(derived.size() == 12);

  double buffer_vol = 0.0, sliding_vol = 0.0;
  std::map<std::array<int, 3>, int> interface_faces;
  for (const auto& tet : derived) {
    bool has_inner = false, has_outer = false;
    for (const int v : tet) {
      const int r = v % 3;
      has_inner |= r == 0;
      has_outer |= r == 2;
    }
    CHECK_FALSE((has_inner && has_outer));  // no tet crosses the mid-ring plane

    const SpaceTimePoint a = block_reference_point(tet[0]), b = block_reference_point(tet[1]),
                         c = block_reference_point(tet[2]), d = block_reference_point(tet[3]);
    const double det =
        (b.t - a.t) * ((c.x - a.x) * (d.y - a.y) - (c.y - a.y) * (d.x - a.x)) -
        (b.x - a.x) * ((c.t - a.t) * (d.y - a.y) - (c.y - a.y) * (d.t - a.t)) +
        (b.y - a.y) * ((c.t - a.t) * (d.x - a.x) - (c.x - a.x) * (d.t - a.t));
    CHECK(det > 0.0);
    (has_outer ? sliding_vol : buffer_vol) += det / 6.0;

    // Collect faces lying entirely on the shared mid-ring plane (r == 1).
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> face{};
      int n = 0;
      bool on_plane = true;
      for (int j = 0; j < 4; ++j) {
        if (j == skip) continue;
        on_plane &= tet[static_cast<std::size_t>(j)] % 3 == 1;
        face[static_cast<std::size_t>(n++)] = tet[static_cast<std::size_t>(j)];
      }
      if (on_plane) {
        std::sort(face.begin(), face.end());
        ++interface_faces[face];
      }
    }
  }
  // Each hexahedron has unit reference volume.
  CHECK(buffer_vol == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sliding_vol == doctest::Approx(1.0).epsilon(1e-12));
  // The free mid-ring interface is triangulated consistently from both sides.
  CHECK(interface_faces.size() == 2);
  for (const auto& [face, count] : interface_faces) {
    (void)face;
    CHECK(count == 2);
  }
}

TEST_CASE("all four swap configurations derive, partition, and cache") {
  BlockCache cache;
  int derived_sizes_ok = 0;
  for (const std::uint8_t advance : {std::uint8_t{1}, std::uint8_t{0}}) {
    for (const std::uint8_t flip : {std::uint8_t{0}, std::uint8_t{1}}) {
      BlockPattern pattern{};
      pattern.bits[1] = advance;        // bottom sliding diagonal
      pattern.bits[3] = advance ? std::uint8_t{0} : std::uint8_t{1};  // top sliding diagonal
      pattern.bits[4] = flip;           // inner-surface diagonal
      const auto& tets = cache.get(pattern);
      REQUIRE_FALSE(tets.empty());
      if (tets.size() == 12) ++derived_sizes_ok;

      // Volume partition: reference block volume is 2 (t,a in [0,1], r in [0,2]).
      double total = 0.0;
      for (const auto& tet : tets) {
        const auto pt = [](int v) { return block_reference_point(v); };
        const SpaceTimePoint a = pt(tet[0]), b = pt(tet[1]), c = pt(tet[2]), d = pt(tet[3]);
        const double m[3][3] = {{b.t - a.t, b.x - a.x, b.y - a.y},
                                {c.t - a.t, c.x - a.x, c.y - a.y},
                                {d.t - a.t, d.x - a.x, d.y - a.y}};
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        CHECK(det > 0.0);  // reference-positive orientation
        total += det / 6.0;
      }
      CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
  CHECK(derived_sizes_ok == 4);
  CHECK(cache.size() == 4);
  // Repeat lookups hit the cache rather than re-deriving.
  BlockPattern pattern{};
  pattern.bits[1] = 1;
  pattern.bits[4] = 1;
  (void)cache.get(pattern);
  CHECK(cache.size() == 4);
}

TEST_CASE("configuration labels follow designation and parity agreement") {
  CHECK(select_configuration(SwapDirection::PrimaryToSecondary, true) == 1);
  CHECK(select_configuration(SwapDirection::SecondaryToPrimary, true) == 2);
  CHECK(select_configuration(SwapDirection::PrimaryToSecondary, false) == 3);
  CHECK(select_configuration(SwapDirection::SecondaryToPrimary, false) == 4);
  CHECK_THROWS_AS(select_configuration(SwapDirection::None, true), InvalidArgument);
}

TEST_CASE("swap extrusion builds blocks and validates") {
  const std::int64_t n = 12;
  const SpatialMesh bottom = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, n);
  const ReferenceMotion motion = ReferenceMotion::build(bottom, std::nullopt);
  const double pitch = angular_pitch(n);

  SpatialMesh top = bottom;
  motion.reposition(top, -0.5 * pitch, 0.0);
  top.id_offset = bottom.vertex_count();
  AnnulusState state{n, 0, -0.5 * pitch};
  const SwapDecision decision = decide_swap(state, representative_diagonals(top, state));
  REQUIRE(decision.swap);
  apply_swap_to_mesh(top, decision);

  BlockCache cache;
  ExtrudeStats stats;
  const SpaceTimeSlab slab = extrude_slab(bottom, top, decision, 0.0, 0.25, &cache, &stats);

  CHECK(stats.blocks == n);
  std::int64_t config_total = 0;
  for (const std::int64_t c : stats.configuration_count) config_total += c;
  CHECK(config_total == n);
  // A primary-to-secondary swap slab uses configurations 1 and 3 only.
  CHECK(stats.configuration_count[2] == 0);
  CHECK(stats.configuration_count[4] == 0);
  CHECK(stats.configuration_count[1] + stats.configuration_count[3] == n);

  // Columns contribute 12 tets each; remaining triangles extrude as prisms.
  const std::size_t fan_tris = bottom.triangles.size();
  CHECK(slab.tets.size() == 12 * static_cast<std::size_t>(n) + 3 * fan_tris);

  const ConformityReport report = validate_slab(slab, &bottom, &top);
  INFO(report.to_string());
  CHECK(report.ok());
}
