#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slabforge/geometry.hpp"
#include "slabforge/mesh.hpp"

namespace slabforge {

/// Concentric axis-aligned box pair driving the translation blend. The boxes
/// must share a center and aspect ratio so that the scaled box coordinate
/// s(p) = max(|x-cx|/hx_in, |y-cy|/hy_in) equals 1 on the inner boundary and
/// s_out = hx_out/hx_in (> 1) on the outer boundary.
struct BlendBoxes {
  Box inner;
  Box outer;
  double s_out = 0.0;

  /// Validates well-formedness, shared center, equal aspect ratio, and strict
  /// nesting; throws InvalidArgument otherwise.
  static BlendBoxes make(const Box& inner, const Box& outer);
};

/// 1 inside the inner box, 0 outside the outer box, linear in the scaled box
/// coordinate in between; exact 1/0 on the two boundaries.
double blend_weight(const BlendBoxes& boxes, Vec2 p);

/// Rotation by dtheta about `center`.
Vec2 rotate_point(Vec2 center, double dtheta, Vec2 p);

/// Per-slab motion increment. Rotation applies to the rotating region, the
/// buffer layer, and the sliding layer's inner (mid-ring) vertices; vertices
/// shared with the static mesh stay put. Translation applies to every vertex,
/// scaled by the blend weight at its input position.
struct MotionMap {
  Vec2 rotation_center{0.0, 0.0};
  double dtheta = 0.0;                // rotation increment
  double dy = 0.0;                    // vertical translation increment
  std::optional<BlendBoxes> boxes;    // required when dy != 0
  bool rotate_rotating = true;
  bool rotate_buffer = true;
  bool rotate_sliding_inner = true;
};

/// Move the vertices of `mesh` by one slab of motion: rotate the rotating
/// group about rotation_center, then translate by (0, dy * w). Connectivity is
/// copied unchanged; id_offset advances by the vertex count. Throws
/// MotionRejected if any output element has non-positive area.
SpatialMesh advance_vertices(const SpatialMesh& mesh, const MotionMap& map);

/// Set of local vertex ids that move rigidly with the rotation: vertices of
/// rotating-region triangles, buffer quads, and the sliding quads' inner pair.
std::vector<char> rotation_group(const SpatialMesh& mesh, const MotionMap& map);

/// Positions every mesh vertex directly from a reference configuration at an
/// absolute rotation angle and translation, avoiding incremental drift:
/// p = ref_p rotated by theta_total (rotation-group vertices only), then
/// shifted by (0, d_total * w) with w frozen at the reference position.
class ReferenceMotion {
 public:
  static ReferenceMotion build(const SpatialMesh& reference, std::optional<BlendBoxes> boxes);

  /// Overwrite positions (and rotation_center) of `mesh`, which must have the
  /// same vertex count as the reference; connectivity and ids are untouched.
  void reposition(SpatialMesh& mesh, double theta_total, double d_total) const;

  bool rotates(VertexId local) const { return rotates_[static_cast<std::size_t>(local)] != 0; }
  double weight(VertexId local) const { return weight_[static_cast<std::size_t>(local)]; }
  /// 1.0 when every rotation-group vertex sits strictly inside the inner box
  /// (then rotation and translation commute exactly); smaller otherwise.
  double min_rotating_weight() const { return min_rotating_weight_; }
  Vec2 reference_center() const { return center_; }

 private:
  std::vector<Vec2> ref_pos_;
  std::vector<char> rotates_;
  std::vector<double> weight_;
  double min_rotating_weight_ = 1.0;
  double center_weight_ = 1.0;
  Vec2 center_{0.0, 0.0};
};

}  // namespace slabforge
