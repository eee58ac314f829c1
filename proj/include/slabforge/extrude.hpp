#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "slabforge/mesh.hpp"
#include "slabforge/sliding.hpp"

namespace slabforge {

struct SpaceTimePoint {
  double t = 0.0, x = 0.0, y = 0.0;
};

/// Tetrahedron spanning one slab, vertices as global space-time ids in
/// positive orientation: det(v1-v0, v2-v0, v3-v0) > 0 in (t, x, y).
struct SpaceTimeTet {
  std::array<VertexId, 4> v{};
  Region region = Region::Static;
};

enum class FacetClass { Bottom, Top, Lateral, Interior };
const char* to_string(FacetClass c);

struct SpaceTimeSlab {
  double t_start = 0.0;
  double t_end = 0.0;
  std::int64_t id_base = 0;      // global id of bottom-level local vertex 0
  std::int64_t n_per_level = 0;  // vertices per time level
  std::vector<Vec2> bottom_pos;  // by local id, at t_start
  std::vector<Vec2> top_pos;     // by local id, at t_end
  std::vector<SpaceTimeTet> tets;

  bool is_top_level(VertexId global) const { return global >= id_base + n_per_level; }
  SpaceTimePoint point(VertexId global) const;
  double tet_volume(std::size_t k) const;
};

/// Sorted vertex-id triple identifying a facet.
using FacetKey = std::array<VertexId, 3>;

struct FacetUse {
  FacetClass cls = FacetClass::Interior;
  int multiplicity = 0;
  std::array<std::int32_t, 2> tets{-1, -1};  // owning tet indices (up to two)
};

std::map<FacetKey, FacetUse> build_facet_table(const SpaceTimeSlab& slab);

/// Cut the prism over one triangle into three tetrahedra, each quadrilateral
/// side split by the diagonal rising from its smallest vertex id. Vertices
/// correspond position-wise: top[k] sits above bottom[k], and all top ids must
/// exceed all bottom ids by one uniform positive offset.
std::array<std::array<VertexId, 4>, 3> cut_prism(const std::array<VertexId, 3>& bottom,
                                                 const std::array<VertexId, 3>& top);

/// One diagonal per prism side, as a vertex-id pair.
using PrismDiagonals = std::array<std::pair<VertexId, VertexId>, 3>;

/// True iff the three side diagonals admit a 3-tetrahedron partition:
/// some vertex must be an endpoint of at least two diagonals.
bool is_valid_cut(const PrismDiagonals& diagonals);

/// All 8 side-diagonal assignments of the prism bottom (b0,b1,b2), top
/// (t0,t1,t2); assignment bit k picks the diagonal of side (b_k, b_{k+1}).
std::vector<PrismDiagonals> enumerate_prism_cut_assignments(const std::array<VertexId, 3>& bottom,
                                                            const std::array<VertexId, 3>& top);

/// Boundary-diagonal pattern of the reference 2x2 space-time block (buffer and
/// sliding hexahedra of one annulus column). Reference vertex l(t,a,r) =
/// r + 3a + 6t with t in {0,1} (time level), a in {0,1} (angular slot), r in
/// {0,1,2} (ring: inner, mid, outer); reference coordinates (t, x=r, y=a).
/// The ten boundary quads, each with corners (c00, c10, c11, c01):
///   0 bottom buffer   (0,0,0)(0,1,0)(0,1,1)(0,0,1)
///   1 bottom sliding  (0,0,1)(0,1,1)(0,1,2)(0,0,2)
///   2 top buffer      (1,0,0)(1,1,0)(1,1,1)(1,0,1)
///   3 top sliding     (1,0,1)(1,1,1)(1,1,2)(1,0,2)
///   4 inner surface   (0,0,0)(1,0,0)(1,1,0)(0,1,0)
///   5 outer surface   (0,0,2)(1,0,2)(1,1,2)(0,1,2)
///   6 side a=0 buffer (0,0,0)(1,0,0)(1,0,1)(0,0,1)
///   7 side a=0 slide  (0,0,1)(1,0,1)(1,0,2)(0,0,2)
///   8 side a=1 buffer (0,1,0)(1,1,0)(1,1,1)(0,1,1)
///   9 side a=1 slide  (0,1,1)(1,1,1)(1,1,2)(0,1,2)
/// Bit 0 cuts a quad by its c00-c11 diagonal, bit 1 by c10-c01. The mid-ring
/// interface (r = 1 inside the column) is interior and left free.
struct BlockPattern {
  std::array<std::uint8_t, 10> bits{};
  std::uint16_t key() const;
};

/// Local index of reference block vertex (t, a, r).
constexpr int block_local_index(int t, int a, int r) { return r + 3 * a + 6 * t; }

/// Reference coordinates (t, x, y) of local vertex l.
SpaceTimePoint block_reference_point(int local);

/// Tetrahedralize the reference block so that its boundary triangulation
/// matches the pattern exactly: deterministic exhaustive search over
/// positive-volume tets on the 12 block vertices (none crossing the mid-ring
/// interface), matching oriented face requirements until the boundary is
/// consumed. Throws ConformityError when the pattern admits no partition.
std::vector<std::array<int, 4>> derive_block_connectivity(const BlockPattern& pattern);

/// Memoizes derive_block_connectivity per pattern.
class BlockCache {
 public:
  const std::vector<std::array<int, 4>>& get(const BlockPattern& pattern);
  std::size_t size() const { return cache_.size(); }

 private:
  std::map<std::uint16_t, std::vector<std::array<int, 4>>> cache_;
};

/// Table label of a swap-slab block: the swap direction (designation) and the
/// agreement between the column's inner-surface diagonal and its bottom
/// sliding cut pick one of four named configurations.
int select_configuration(SwapDirection direction, bool parity_agree);

struct ExtrudeStats {
  std::int64_t prisms = 0;
  std::int64_t blocks = 0;
  std::array<std::int64_t, 5> configuration_count{};  // indices 1..4 used
  std::int64_t distinct_patterns = 0;
};

/// Build the tetrahedral slab between two spatial meshes. The meshes must
/// share connectivity (same local triangles and quads) except that on a swap
/// the top mesh's sliding quads are the post-swap family; top.id_offset must
/// equal bottom.id_offset + vertex count. Non-annulus triangles and no-swap
/// quads extrude as independent prisms; on a swap every annulus column becomes
/// a 2x2 block tetrahedralized via the pattern cache.
SpaceTimeSlab extrude_slab(const SpatialMesh& bottom, const SpatialMesh& top,
                           const SwapDecision& swap, double t_start, double t_end,
                           BlockCache* cache = nullptr, ExtrudeStats* stats = nullptr);

struct FacetGeometry {
  double n_t = 0.0;  // temporal component of the unit outward normal
  Vec2 n;            // spatial components
  double area = 0.0;
  SpaceTimePoint centroid;
};

/// Geometry of face `face_index` (the face opposite that vertex) of tet k.
FacetGeometry facet_geometry(const SpaceTimeSlab& slab, std::size_t k, int face_index);

struct ConformityReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Full slab check: positive volumes, facet multiplicities (interior 2,
/// boundary 1), no vertices outside the two time levels, bottom/top facets
/// reproducing the spatial triangulations and lateral facets sitting above
/// spatial boundary edges when the meshes are supplied, and the volume
/// identity: total tet volume equals the Simpson time integral of the slice
/// area reconstructed from the lateral boundary facets (exact, since the area
/// is quadratic in time) to 1e-12 relative.
ConformityReport validate_slab(const SpaceTimeSlab& slab, const SpatialMesh* bottom = nullptr,
                               const SpatialMesh* top = nullptr);

/// Total tet volume and the Simpson slice-area integral, exposed for tests.
struct SlabVolumeCheck {
  double tet_total = 0.0;
  double simpson_total = 0.0;
  double area_bottom = 0.0;  // slice area at t_start (from facets)
  double area_top = 0.0;     // slice area at t_end
};
SlabVolumeCheck slab_volume_check(const SpaceTimeSlab& slab);

}  // namespace slabforge
