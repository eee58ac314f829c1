#pragma once

#include <cstdint>

#include "slabforge/mesh.hpp"

namespace slabforge {

enum class MeshDesignation { Primary, Secondary };
enum class SwapDirection { None, PrimaryToSecondary, SecondaryToPrimary };

const char* to_string(MeshDesignation d);
const char* to_string(SwapDirection d);

/// Sliding-layer diagonal state. The layer's triangulation is tracked by an
/// integer shift: sliding quad i connects mid-ring slot i, i+1 to outer-ring
/// slots i+shift, i+shift+1, and every quad is cut by its n2-n4 diagonal.
/// Each swap moves the shift by +-1; the designation alternates with it
/// (even shift = the original, "primary", quadrilateral mesh).
struct AnnulusState {
  std::int64_t n_quads = 0;
  std::int64_t shift = 0;
  double accumulated_rotation = 0.0;  // of the rotating region, radians

  double angular_pitch() const;
  /// Rotation minus the part already absorbed by shifting: accumulated_rotation
  /// - shift * angular_pitch. The layer is unsheared at lean 0.
  double lean() const;
  MeshDesignation current_mesh() const;
};

/// Pitch angle of an n-quad annulus layer (2*pi / n).
double angular_pitch(std::int64_t n_quads);

/// Representative diagonal lengths of the two quadrilateral families, plus the
/// shift direction (+1 advance / -1 retreat) the alternative family's shorter
/// diagonal corresponds to.
struct RepresentativeDiagonals {
  double l_primary = 0.0;
  double l_secondary = 0.0;
  std::int64_t candidate_shift_delta = 0;

  double current(const AnnulusState& s) const;
  double alternative(const AnnulusState& s) const;
};

/// Measure quad 0 of the current family (its n2-n4 diagonal) and quad 0 of the
/// offset family spanning consecutive current diagonals, on the mesh geometry
/// at the end of the slab. Also verifies all sliding quads are congruent to
/// quad 0 within 1e-9 relative and that no measured diagonal is degenerate.
RepresentativeDiagonals representative_diagonals(const SpatialMesh& mesh,
                                                 const AnnulusState& state);

struct SwapDecision {
  bool swap = false;
  SwapDirection direction = SwapDirection::None;
  double l_primary = 0.0;
  double l_secondary = 0.0;
  std::int64_t shift_delta = 0;  // 0 when swap == false
};

/// Shortest-diagonal criterion: swap iff the non-current family's diagonal is
/// strictly shorter (ties within 1e-12 relative keep the current mesh).
SwapDecision decide_swap(const AnnulusState& state, const RepresentativeDiagonals& diagonals);

/// Same criterion from bare lengths; the shift direction is reconstructed from
/// the state's lean (advances absorb positive lean, retreats negative).
SwapDecision decide_swap(const AnnulusState& state, double l_primary, double l_secondary);

/// Advance the state by a decided swap (identity when decision.swap is false).
AnnulusState apply_swap(const AnnulusState& state, const SwapDecision& decision);

/// Sliding quads of the family at the given shift, in angular order.
std::vector<AnnulusQuad> sliding_quads_for_shift(const Annulus& annulus, std::int64_t shift);

/// Rewrite the mesh's sliding quads to the post-swap family and update the
/// stored shift; throws ConformityError if any resulting triangle half has
/// non-positive area (per-slab rotation bound violated upstream).
void apply_swap_to_mesh(SpatialMesh& mesh, const SwapDecision& decision);

}  // namespace slabforge
