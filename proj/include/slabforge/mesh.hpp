#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slabforge/geometry.hpp"

namespace slabforge {

/// Vertex identifier local to one time level. Global space-time ids are
/// local id + the mesh's id_offset (the offset advances by the vertex count
/// per time level).
using VertexId = std::int64_t;

enum class Region { Rotating, Buffer, Sliding, Static };
enum class Layer { Buffer, Sliding };
enum class RingKind { InnerCircle, OuterCircle };

const char* to_string(Region r);
const char* to_string(Layer l);
const char* to_string(RingKind k);

struct Vertex {
  VertexId id = 0;  // local id; equals its index in SpatialMesh::vertices
  Vec2 pos;
};

struct Triangle {
  std::array<VertexId, 3> v{};  // counterclockwise
  Region region = Region::Static;
};

/// Annulus quadrilateral. n1, n2 lie on the smaller-radius circle with n1->n2
/// running clockwise about the rotation center; n3, n4 lie on the larger
/// circle with n3->n4 running anticlockwise. The polygon n1-n2-n3-n4 is then
/// counterclockwise. Quads are triangulated by the n2-n4 diagonal.
struct AnnulusQuad {
  VertexId n1 = 0, n2 = 0, n3 = 0, n4 = 0;
  Layer layer = Layer::Buffer;
};

/// Cyclic vertex ordering around a ring, listed in angular (anticlockwise)
/// position order; the ids themselves follow the chainsaw numbering.
struct RingOrdering {
  RingKind ring = RingKind::InnerCircle;
  std::vector<VertexId> seq;
};

/// Topology of the rotating-interface annulus inside a SpatialMesh.
struct Annulus {
  std::int64_t n_quads = 0;           // per layer
  RingOrdering inner_ring;            // ids on the rotating-circle interface
  RingOrdering outer_ring;            // ids on the static-circle interface
  std::vector<VertexId> mid_ring;     // ids on the buffer/sliding interface
  std::int64_t sliding_shift = 0;     // angular lean of the sliding quads, in cells
};

struct SpatialMesh {
  std::vector<Vertex> vertices;   // sorted: vertices[i].id == i
  std::vector<Triangle> triangles;
  std::vector<AnnulusQuad> quads;  // buffer quads in angular order, then sliding
  Vec2 rotation_center{0.0, 0.0};
  std::int64_t id_offset = 0;      // global id = local id + id_offset
  std::optional<Annulus> annulus;
  std::vector<VertexId> body_loop;  // CCW closed body-boundary polygon (may be empty)

  std::int64_t vertex_count() const { return static_cast<std::int64_t>(vertices.size()); }
  Vec2 position(VertexId local) const { return vertices[static_cast<std::size_t>(local)].pos; }

  /// Triangles plus both halves of every quad (n2-n4 diagonal), regions kept.
  std::vector<Triangle> full_triangulation() const;
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// True iff no cyclic window of three consecutive ids is strictly monotone.
bool chainsaw_ok(const std::vector<VertexId>& seq);

/// Interleave the lower and upper halves of the sorted pool (low, high, low,
/// high, ...) producing a sequence that satisfies the chainsaw predicate.
/// Throws InvalidArgument for odd ring sizes or mismatched pool sizes.
std::vector<VertexId> assign_chainsaw_ids(std::size_t ring_size, std::vector<VertexId> id_pool);

/// Build the two-layer annulus: n_quads buffer quads between r_rotating and
/// r_mid, n_quads sliding quads between r_mid and r_outer, vertices equally
/// spaced on the three circles with aligned phases. Ids: inner ring [0, n)
/// chainsaw, mid ring [n, 2n) sequential, outer ring [2n, 3n) chainsaw.
SpatialMesh build_annulus_mesh(Vec2 center, double r_rotating, double r_mid, double r_outer,
                               std::int64_t n_quads);

/// Check every structural invariant; the report is empty iff the mesh is valid.
ValidationReport validate_spatial_mesh(const SpatialMesh& mesh);

/// Demo/test mesh: rotating fan disk + annulus + optional static triangle ring
/// out to r_static (pass r_static <= r_outer to omit it). The body boundary is
/// the inner ring.
SpatialMesh generate_annulus_disk_mesh(Vec2 center, double r_rotating, double r_mid,
                                       double r_outer, double r_static, std::int64_t n_quads);

/// Structured triangle mesh between a square body (half width body_half) and a
/// square domain boundary (half width domain_half): n_side points per square
/// side per ring, n_layers rings of cells. All elements Static; the body
/// boundary polygon is recorded for force quadrature.
SpatialMesh generate_box_ring_mesh(Vec2 center, double body_half, double domain_half,
                                   std::int64_t n_side, std::int64_t n_layers);

}  // namespace slabforge
