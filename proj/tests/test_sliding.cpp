#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "slabforge/error.hpp"
#include "slabforge/mesh.hpp"
#include "slabforge/motion.hpp"
#include "slabforge/sliding.hpp"

using namespace slabforge;

namespace {

struct RotationTrace {
  std::vector<std::int64_t> swap_slabs;
  std::int64_t advances = 0;
  std::int64_t retreats = 0;
  AnnulusState final_state;
};

/// Rotate an n-quad annulus through `slabs` steps of `dtheta`, deciding and
/// applying a swap at each slab end, on real mesh geometry.
RotationTrace rotate_and_swap(std::int64_t n, std::int64_t slabs, double dtheta) {
  SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, n);
  const ReferenceMotion motion = ReferenceMotion::build(mesh, std::nullopt);
  AnnulusState state{n, 0, 0.0};
  RotationTrace trace;
  for (std::int64_t k = 1; k <= slabs; ++k) {
    const double theta = static_cast<double>(k) * dtheta;
    motion.reposition(mesh, theta, 0.0);
    state.accumulated_rotation = theta;
    const RepresentativeDiagonals diags = representative_diagonals(mesh, state);
    const SwapDecision decision = decide_swap(state, diags);

    // The bare-length overload must reach the same verdict.
    const SwapDecision bare = decide_swap(state, diags.l_primary, diags.l_secondary);
    CHECK(bare.swap == decision.swap);
    if (decision.swap) CHECK(bare.shift_delta == decision.shift_delta);

    if (decision.swap) {
      trace.swap_slabs.push_back(k);
      if (decision.shift_delta > 0) {
        ++trace.advances;
      } else {
        ++trace.retreats;
      }
      apply_swap_to_mesh(mesh, decision);
    }
    state = apply_swap(state, decision);
    CHECK(state.shift == mesh.annulus->sliding_shift);
  }
  trace.final_state = state;
  return trace;
}

}  // namespace

TEST_CASE("pitch, lean, and designation bookkeeping") {
  AnnulusState s{100, 0, 0.0};
  CHECK(s.angular_pitch() == doctest::Approx(2.0 * M_PI / 100.0).epsilon(1e-15));
  CHECK(s.current_mesh() == MeshDesignation::Primary);
  s.shift = 1;
  CHECK(s.current_mesh() == MeshDesignation::Secondary);
  s.shift = -1;
  CHECK(s.current_mesh() == MeshDesignation::Secondary);  // negative-safe parity
  s.shift = -2;
  CHECK(s.current_mesh() == MeshDesignation::Primary);
  s.shift = 3;
  s.accumulated_rotation = 3.5 * s.angular_pitch();
  CHECK(s.lean() == doctest::Approx(0.5 * s.angular_pitch()).epsilon(1e-12));
}

TEST_CASE("aligned annulus measures equal families and keeps the current mesh") {
  const SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 16);
  const AnnulusState state{16, 0, 0.0};
  const RepresentativeDiagonals diags = representative_diagonals(mesh, state);
  // At lean 0 the alternative family's diagonal has the same chord length.
  CHECK(diags.alternative(state) ==
        doctest::Approx(diags.current(state)).epsilon(1e-12));
  const SwapDecision decision = decide_swap(state, diags);
  CHECK_FALSE(decision.swap);  // ties keep the current mesh
  CHECK(decision.direction == SwapDirection::None);
}

TEST_CASE("half-pitch rotation: the secondary family wins exactly for one chirality") {
  const std::int64_t n = 16;
  SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, n);
  const ReferenceMotion motion = ReferenceMotion::build(mesh, std::nullopt);
  const double pitch = angular_pitch(n);

  SUBCASE("clockwise half pitch shortens the alternative diagonal") {
    motion.reposition(mesh, -0.5 * pitch, 0.0);
    const AnnulusState state{n, 0, -0.5 * pitch};
    const RepresentativeDiagonals diags = representative_diagonals(mesh, state);
    CHECK(diags.l_secondary < diags.l_primary);
    const SwapDecision decision = decide_swap(state, diags);
    CHECK(decision.swap);
    CHECK(decision.direction == SwapDirection::PrimaryToSecondary);
    CHECK(decision.shift_delta == -1);
  }
  SUBCASE("anticlockwise half pitch leaves the current family optimal") {
    motion.reposition(mesh, 0.5 * pitch, 0.0);
    const AnnulusState state{n, 0, 0.5 * pitch};
    const RepresentativeDiagonals diags = representative_diagonals(mesh, state);
    CHECK(diags.l_secondary >= diags.l_primary);
    CHECK_FALSE(decide_swap(state, diags).swap);
  }
}

TEST_CASE("full clockwise revolution fires a retreat on every odd slab") {
  const std::int64_t n = 100;
  const double pitch = angular_pitch(n);
  const RotationTrace trace = rotate_and_swap(n, 200, -0.5 * pitch);

  CHECK(trace.retreats == 100);
  CHECK(trace.advances == 0);
  CHECK(trace.final_state.shift == -100);
  CHECK(trace.final_state.current_mesh() == MeshDesignation::Primary);
  CHECK(trace.final_state.lean() == doctest::Approx(0.0).epsilon(1e-9));
  REQUIRE(trace.swap_slabs.size() == 100);
  for (std::size_t i = 0; i < trace.swap_slabs.size(); ++i) {
    CHECK(trace.swap_slabs[i] == static_cast<std::int64_t>(2 * i + 1));
  }
}

TEST_CASE("full anticlockwise revolution fires an advance on every even slab from 4") {
  const std::int64_t n = 100;
  const double pitch = angular_pitch(n);
  const RotationTrace trace = rotate_and_swap(n, 200, 0.5 * pitch);

  CHECK(trace.advances == 99);
  CHECK(trace.retreats == 0);
  CHECK(trace.final_state.shift == 99);
  CHECK(trace.final_state.lean() == doctest::Approx(pitch).epsilon(1e-9));
  REQUIRE(trace.swap_slabs.size() == 99);
  for (std::size_t i = 0; i < trace.swap_slabs.size(); ++i) {
    CHECK(trace.swap_slabs[i] == static_cast<std::int64_t>(2 * i + 4));
  }
}

TEST_CASE("swap rewrites the sliding quads to the shifted family") {
  const std::int64_t n = 12;
  SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, n);
  const ReferenceMotion motion = ReferenceMotion::build(mesh, std::nullopt);
  const double pitch = angular_pitch(n);
  motion.reposition(mesh, -0.5 * pitch, 0.0);
  AnnulusState state{n, 0, -0.5 * pitch};
  const SwapDecision decision = decide_swap(state, representative_diagonals(mesh, state));
  REQUIRE(decision.swap);
  REQUIRE(decision.shift_delta == -1);

  const std::vector<AnnulusQuad> expected = sliding_quads_for_shift(*mesh.annulus, -1);
  apply_swap_to_mesh(mesh, decision);
  CHECK(mesh.annulus->sliding_shift == -1);
  std::size_t found = 0;
  for (const AnnulusQuad& q : mesh.quads) {
    if (q.layer != Layer::Sliding) continue;
    const AnnulusQuad& e = expected[found++];
    CHECK(q.n1 == e.n1);
    CHECK(q.n2 == e.n2);
    CHECK(q.n3 == e.n3);
    CHECK(q.n4 == e.n4);
  }
  CHECK(found == static_cast<std::size_t>(n));
  CHECK(validate_spatial_mesh(mesh).ok());

  SUBCASE("a no-swap decision leaves the mesh untouched") {
    const SpatialMesh before = mesh;
    apply_swap_to_mesh(mesh, SwapDecision{});
    CHECK(mesh.annulus->sliding_shift == before.annulus->sliding_shift);
    for (std::size_t i = 0; i < mesh.quads.size(); ++i) {
      CHECK(mesh.quads[i].n1 == before.quads[i].n1);
      CHECK(mesh.quads[i].n4 == before.quads[i].n4);
    }
  }
}

TEST_CASE("incongruent sliding quads are rejected") {
  SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 16);
  const AnnulusState state{16, 0, 0.0};
  // Nudge one outer-ring vertex: quad congruence (which the representative
  // shortcut relies on) no longer holds.
  const VertexId v = mesh.annulus->outer_ring.seq[3];
  mesh.vertices[static_cast<std::size_t>(v)].pos.x += 0.05;
  CHECK_THROWS_AS(representative_diagonals(mesh, state), ConformityError);
}

TEST_CASE("state/mesh consistency guards") {
  const SpatialMesh mesh = generate_annulus_disk_mesh(Vec2{0.0, 0.0}, 1.0, 1.5, 2.0, 0.0, 16);
  CHECK_THROWS_AS(representative_diagonals(mesh, AnnulusState{16, 2, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(representative_diagonals(mesh, AnnulusState{8, 0, 0.0}), InvalidArgument);
  const SpatialMesh box = generate_box_ring_mesh(Vec2{0.0, 0.0}, 0.5, 4.0, 4, 3);
  CHECK_THROWS_AS(representative_diagonals(box, AnnulusState{16, 0, 0.0}), InvalidArgument);
}

TEST_CASE("near-tie stays on the current mesh within the relative tolerance") {
  AnnulusState state{100, 0, 0.0};
  const SwapDecision same = decide_swap(state, 1.0, 1.0);
  CHECK_FALSE(same.swap);
  const SwapDecision hair = decide_swap(state, 1.0, 1.0 - 1e-14);
  CHECK_FALSE(hair.swap);  // within the 1e-12 relative tie band
  const SwapDecision clear = decide_swap(state, 1.0, 1.0 - 1e-9);
  CHECK(clear.swap);
}
