#include "slabforge/motion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slabforge/error.hpp"

namespace slabforge {

BlendBoxes BlendBoxes::make(const Box& inner, const Box& outer) {
  if (!inner.well_formed() || !outer.well_formed())
    throw InvalidArgument("blend boxes must have positive extent in both axes");
  const Vec2 ci = inner.center(), co = outer.center();
  const Vec2 hi = inner.half_widths(), ho = outer.half_widths();
  const double scale = std::max(std::abs(ci.x - co.x), std::abs(ci.y - co.y));
  if (scale > 1e-12 * std::max({hi.x, hi.y, ho.x, ho.y}))
    throw InvalidArgument("blend boxes must be concentric");
  const double sx = ho.x / hi.x, sy = ho.y / hi.y;
  if (std::abs(sx - sy) > 1e-12 * std::max(sx, sy))
    throw InvalidArgument("blend boxes must have equal aspect ratio");
  if (!(sx > 1.0))
    throw InvalidArgument("outer blend box must strictly contain the inner box");
  BlendBoxes b;
  b.inner = inner;
  b.outer = outer;
  b.s_out = sx;
  return b;
}

double blend_weight(const BlendBoxes& boxes, Vec2 p) {
  const Vec2 c = boxes.inner.center();
  const Vec2 h = boxes.inner.half_widths();
  const double s = std::max(std::abs(p.x - c.x) / h.x, std::abs(p.y - c.y) / h.y);
  if (s <= 1.0) return 1.0;
  if (s >= boxes.s_out) return 0.0;
  return (boxes.s_out - s) / (boxes.s_out - 1.0);
}

Vec2 rotate_point(Vec2 center, double dtheta, Vec2 p) {
  return rotate_about(center, dtheta, p);
}

std::vector<char> rotation_group(const SpatialMesh& mesh, const MotionMap& map) {
  std::vector<char> rot(static_cast<std::size_t>(mesh.vertex_count()), 0);
  for (const Triangle& tri : mesh.triangles) {
    const bool applies = (tri.region == Region::Rotating && map.rotate_rotating) ||
                         (tri.region == Region::Buffer && map.rotate_buffer) ||
                         (tri.region == Region::Sliding && map.rotate_sliding_inner);
    if (tri.region == Region::Sliding)
      continue;  // sliding triangles straddle the interface; handled via quads
    if (!applies) continue;
    for (VertexId v : tri.v) rot[static_cast<std::size_t>(v)] = 1;
  }
  for (const AnnulusQuad& q : mesh.quads) {
    if (q.layer == Layer::Buffer) {
      if (!map.rotate_buffer) continue;
      for (VertexId v : {q.n1, q.n2, q.n3, q.n4}) rot[static_cast<std::size_t>(v)] = 1;
    } else {
      if (!map.rotate_sliding_inner) continue;
      rot[static_cast<std::size_t>(q.n1)] = 1;  // inner pair only; n3, n4 are
      rot[static_cast<std::size_t>(q.n2)] = 1;  // shared with the static mesh
    }
  }
  return rot;
}

SpatialMesh advance_vertices(const SpatialMesh& mesh, const MotionMap& map) {
  if (map.dy != 0.0 && !map.boxes)
    throw InvalidArgument("translation requires blend boxes");

  SpatialMesh out = mesh;
  const std::vector<char> rot = rotation_group(mesh, map);
  for (Vertex& v : out.vertices) {
    Vec2 p = v.pos;
    if (map.dtheta != 0.0 && rot[static_cast<std::size_t>(v.id)])
      p = rotate_about(map.rotation_center, map.dtheta, p);
    if (map.dy != 0.0) p.y += map.dy * blend_weight(*map.boxes, v.pos);
    v.pos = p;
  }
  if (map.dy != 0.0)
    out.rotation_center.y += map.dy * blend_weight(*map.boxes, mesh.rotation_center);
  out.id_offset = mesh.id_offset + mesh.vertex_count();

  for (std::size_t t = 0; t < out.triangles.size(); ++t) {
    const Triangle& tri = out.triangles[t];
    if (triangle_signed_area(out.position(tri.v[0]), out.position(tri.v[1]),
                             out.position(tri.v[2])) <= 0.0)
      throw MotionRejected("motion inverts triangle " + std::to_string(t) +
                           "; reduce the per-slab rotation or translation");
  }
  for (std::size_t qi = 0; qi < out.quads.size(); ++qi) {
    const AnnulusQuad& q = out.quads[qi];
    const Vec2 a = out.position(q.n1), b = out.position(q.n2), c = out.position(q.n3),
               d = out.position(q.n4);
    if (triangle_signed_area(a, b, d) <= 0.0 || triangle_signed_area(b, c, d) <= 0.0)
      throw MotionRejected("motion inverts quad " + std::to_string(qi) +
                           "; reduce the per-slab rotation or translation");
  }
  return out;
}

ReferenceMotion ReferenceMotion::build(const SpatialMesh& reference,
                                       std::optional<BlendBoxes> boxes) {
  ReferenceMotion m;
  const std::size_t n = static_cast<std::size_t>(reference.vertex_count());
  m.ref_pos_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.ref_pos_[i] = reference.vertices[i].pos;
  m.rotates_ = rotation_group(reference, MotionMap{});
  m.weight_.assign(n, 1.0);
  m.center_ = reference.rotation_center;
  if (boxes) {
    for (std::size_t i = 0; i < n; ++i) m.weight_[i] = blend_weight(*boxes, m.ref_pos_[i]);
    m.center_weight_ = blend_weight(*boxes, m.center_);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (m.rotates_[i]) m.min_rotating_weight_ = std::min(m.min_rotating_weight_, m.weight_[i]);
  return m;
}

void ReferenceMotion::reposition(SpatialMesh& mesh, double theta_total, double d_total) const {
  if (static_cast<std::size_t>(mesh.vertex_count()) != ref_pos_.size())
    throw InvalidArgument("reposition: mesh vertex count differs from the reference");
  const double c = std::cos(theta_total), s = std::sin(theta_total);
  for (std::size_t i = 0; i < ref_pos_.size(); ++i) {
    Vec2 p = ref_pos_[i];
    if (rotates_[i] && theta_total != 0.0) {
      const Vec2 r{p.x - center_.x, p.y - center_.y};
      p = Vec2{center_.x + c * r.x - s * r.y, center_.y + s * r.x + c * r.y};
    }
    p.y += d_total * weight_[i];
    mesh.vertices[i].pos = p;
  }
  mesh.rotation_center = Vec2{center_.x, center_.y + d_total * center_weight_};
}

}  // namespace slabforge
