#include "slabforge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "slabforge/error.hpp"

namespace slabforge {

const char* to_string(Region r) {
  switch (r) {
    case Region::Rotating: return "rotating";
    case Region::Buffer: return "buffer";
    case Region::Sliding: return "sliding";
    case Region::Static: return "static";
  }
  return "?";
}

const char* to_string(Layer l) {
  return l == Layer::Buffer ? "buffer" : "sliding";
}

const char* to_string(RingKind k) {
  return k == RingKind::InnerCircle ? "inner_circle" : "outer_circle";
}

std::vector<Triangle> SpatialMesh::full_triangulation() const {
  std::vector<Triangle> out = triangles;
  out.reserve(triangles.size() + 2 * quads.size());
  for (const AnnulusQuad& q : quads) {
    const Region region = q.layer == Layer::Buffer ? Region::Buffer : Region::Sliding;
    out.push_back(Triangle{{q.n1, q.n2, q.n4}, region});
    out.push_back(Triangle{{q.n2, q.n3, q.n4}, region});
  }
  return out;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const std::string& s : issues) os << s << '\n';
  return os.str();
}

bool chainsaw_ok(const std::vector<VertexId>& seq) {
  const std::size_t n = seq.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId a = seq[i];
    const VertexId b = seq[(i + 1) % n];
    const VertexId c = seq[(i + 2) % n];
    if ((a < b && b < c) || (a > b && b > c)) return false;
  }
  return true;
}

std::vector<VertexId> assign_chainsaw_ids(std::size_t ring_size, std::vector<VertexId> id_pool) {
  if (ring_size % 2 != 0)
    throw InvalidArgument("chainsaw id assignment requires an even ring size, got " +
                          std::to_string(ring_size));
  if (id_pool.size() != ring_size)
    throw InvalidArgument("id pool size " + std::to_string(id_pool.size()) +
                          " does not match ring size " + std::to_string(ring_size));
  std::sort(id_pool.begin(), id_pool.end());
  if (std::adjacent_find(id_pool.begin(), id_pool.end()) != id_pool.end())
    throw InvalidArgument("id pool contains duplicate ids");
  const std::size_t half = ring_size / 2;
  std::vector<VertexId> seq(ring_size);
  for (std::size_t j = 0; j < half; ++j) {
    seq[2 * j] = id_pool[j];
    seq[2 * j + 1] = id_pool[half + j];
  }
  return seq;
}

namespace {

constexpr double kTau = 6.283185307179586476925286766559;  // 2*pi

// Place `n` vertices with consecutive ids starting at `first_id` equally
// spaced on the circle, vertex j at angle 2*pi*j/n.
void place_ring(std::vector<Vertex>& vertices, VertexId first_id, Vec2 center, double radius,
                std::int64_t n) {
  for (std::int64_t j = 0; j < n; ++j) {
    const double phi = kTau * static_cast<double>(j) / static_cast<double>(n);
    vertices.push_back(Vertex{first_id + j,
                              Vec2{center.x + radius * std::cos(phi),
                                   center.y + radius * std::sin(phi)}});
  }
}

std::vector<VertexId> sequential_ids(VertexId first, std::int64_t n) {
  std::vector<VertexId> ids(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) ids[static_cast<std::size_t>(j)] = first + j;
  return ids;
}

}  // namespace

SpatialMesh build_annulus_mesh(Vec2 center, double r_rotating, double r_mid, double r_outer,
                               std::int64_t n_quads) {
  if (!(r_rotating > 0.0 && r_rotating < r_mid && r_mid < r_outer))
    throw InvalidArgument("annulus radii must satisfy 0 < r_rotating < r_mid < r_outer");
  if (n_quads < 6 || n_quads % 2 != 0)
    throw InvalidArgument("annulus quad count must be even and at least 6, got " +
                          std::to_string(n_quads));

  const std::int64_t n = n_quads;
  SpatialMesh mesh;
  mesh.rotation_center = center;
  mesh.vertices.reserve(static_cast<std::size_t>(3 * n));

  // Angular slot j of each ring holds the vertex at angle 2*pi*j/n. The set of
  // ids per ring is fixed ([0,n) inner, [n,2n) mid, [2n,3n) outer); the inner
  // and outer rings map slots to ids chainsaw-style, the mid ring sequentially.
  const std::vector<VertexId> inner_seq =
      assign_chainsaw_ids(static_cast<std::size_t>(n), sequential_ids(0, n));
  const std::vector<VertexId> mid_seq = sequential_ids(n, n);
  const std::vector<VertexId> outer_seq =
      assign_chainsaw_ids(static_cast<std::size_t>(n), sequential_ids(2 * n, n));

  mesh.vertices.resize(static_cast<std::size_t>(3 * n));
  for (std::int64_t j = 0; j < n; ++j) {
    const double phi = kTau * static_cast<double>(j) / static_cast<double>(n);
    const Vec2 dir{std::cos(phi), std::sin(phi)};
    const auto slot = static_cast<std::size_t>(j);
    const auto put = [&](VertexId id, double r) {
      mesh.vertices[static_cast<std::size_t>(id)] =
          Vertex{id, Vec2{center.x + r * dir.x, center.y + r * dir.y}};
    };
    put(inner_seq[slot], r_rotating);
    put(mid_seq[slot], r_mid);
    put(outer_seq[slot], r_outer);
  }

  mesh.quads.reserve(static_cast<std::size_t>(2 * n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto s0 = static_cast<std::size_t>(i);
    const auto s1 = static_cast<std::size_t>((i + 1) % n);
    mesh.quads.push_back(AnnulusQuad{inner_seq[s1], inner_seq[s0], mid_seq[s0], mid_seq[s1],
                                     Layer::Buffer});
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const auto s0 = static_cast<std::size_t>(i);
    const auto s1 = static_cast<std::size_t>((i + 1) % n);
    mesh.quads.push_back(AnnulusQuad{mid_seq[s1], mid_seq[s0], outer_seq[s0], outer_seq[s1],
                                     Layer::Sliding});
  }

  Annulus ann;
  ann.n_quads = n;
  ann.inner_ring = RingOrdering{RingKind::InnerCircle, inner_seq};
  ann.outer_ring = RingOrdering{RingKind::OuterCircle, outer_seq};
  ann.mid_ring = mid_seq;
  ann.sliding_shift = 0;
  mesh.annulus = std::move(ann);
  return mesh;
}

namespace {

void check_quad(const SpatialMesh& mesh, const AnnulusQuad& q, std::size_t index,
                std::vector<std::string>& issues) {
  const auto n_verts = mesh.vertex_count();
  for (VertexId v : {q.n1, q.n2, q.n3, q.n4}) {
    if (v < 0 || v >= n_verts) {
      issues.push_back("quad " + std::to_string(index) + ": vertex id " + std::to_string(v) +
                       " out of range");
      return;
    }
  }
  const Vec2 a = mesh.position(q.n1), b = mesh.position(q.n2), c = mesh.position(q.n3),
             d = mesh.position(q.n4);
  const Vec2 ctr = mesh.rotation_center;
  const double r1 = dist(a, ctr), r2 = dist(b, ctr), r3 = dist(c, ctr), r4 = dist(d, ctr);
  if (!(r1 < r3 && r1 < r4 && r2 < r3 && r2 < r4))
    issues.push_back("quad " + std::to_string(index) +
                     ": inner-node radii are not strictly smaller than outer-node radii");
  // n1 -> n2 clockwise about the rotation center, n3 -> n4 anticlockwise.
  if (cross(a - ctr, b - ctr) >= 0.0)
    issues.push_back("quad " + std::to_string(index) + ": n1->n2 is not clockwise");
  if (cross(c - ctr, d - ctr) <= 0.0)
    issues.push_back("quad " + std::to_string(index) + ": n3->n4 is not anticlockwise");
  const double half1 = triangle_signed_area(a, b, d);
  const double half2 = triangle_signed_area(b, c, d);
  if (half1 <= 0.0 || half2 <= 0.0)
    issues.push_back("quad " + std::to_string(index) +
                     ": triangulated half has non-positive area");
}

}  // namespace

ValidationReport validate_spatial_mesh(const SpatialMesh& mesh) {
  ValidationReport report;
  auto& issues = report.issues;

  if (mesh.vertices.empty()) {
    issues.push_back("mesh has no vertices");
    return report;
  }

  const auto n_verts = mesh.vertex_count();
  for (std::int64_t i = 0; i < n_verts; ++i) {
    const Vertex& v = mesh.vertices[static_cast<std::size_t>(i)];
    if (v.id != i) {
      issues.push_back("vertex slot " + std::to_string(i) + " stores id " + std::to_string(v.id) +
                       "; local ids must be contiguous from 0");
      break;
    }
  }
  for (const Vertex& v : mesh.vertices) {
    if (!std::isfinite(v.pos.x) || !std::isfinite(v.pos.y)) {
      issues.push_back("vertex " + std::to_string(v.id) + " has a non-finite coordinate");
    }
  }

  // Duplicate-position scan, tolerance relative to the bounding-box diagonal.
  Vec2 lo = mesh.vertices.front().pos, hi = lo;
  for (const Vertex& v : mesh.vertices) {
    lo.x = std::min(lo.x, v.pos.x);
    lo.y = std::min(lo.y, v.pos.y);
    hi.x = std::max(hi.x, v.pos.x);
    hi.y = std::max(hi.y, v.pos.y);
  }
  const double tol = 1e-12 * std::max(dist(lo, hi), 1.0);
  {
    std::vector<std::size_t> order(mesh.vertices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      const Vec2 pl = mesh.vertices[l].pos, pr = mesh.vertices[r].pos;
      return pl.x != pr.x ? pl.x < pr.x : pl.y < pr.y;
    });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const Vec2 pi = mesh.vertices[order[i]].pos, pj = mesh.vertices[order[j]].pos;
        if (pj.x - pi.x > tol) break;
        if (dist(pi, pj) <= tol) {
          issues.push_back("vertices " + std::to_string(mesh.vertices[order[i]].id) + " and " +
                           std::to_string(mesh.vertices[order[j]].id) +
                           " are coincident within tolerance");
        }
      }
    }
  }

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    bool in_range = true;
    for (VertexId v : tri.v) {
      if (v < 0 || v >= n_verts) {
        issues.push_back("triangle " + std::to_string(t) + ": vertex id " + std::to_string(v) +
                         " out of range");
        in_range = false;
      }
    }
    if (!in_range) continue;
    const double area = triangle_signed_area(mesh.position(tri.v[0]), mesh.position(tri.v[1]),
                                             mesh.position(tri.v[2]));
    if (area <= 0.0)
      issues.push_back("triangle " + std::to_string(t) + ": non-positive signed area " +
                       std::to_string(area));
  }

  for (std::size_t qi = 0; qi < mesh.quads.size(); ++qi)
    check_quad(mesh, mesh.quads[qi], qi, issues);

  // Edge conformity over the operative triangulation: every undirected edge is
  // used by at most two elements, and when used twice the directions oppose.
  {
    std::map<std::pair<VertexId, VertexId>, int> forward, backward;
    const auto tris = mesh.full_triangulation();
    bool indices_ok = true;
    for (const Triangle& tri : tris)
      for (VertexId v : tri.v)
        if (v < 0 || v >= n_verts) indices_ok = false;
    if (indices_ok) {
      for (const Triangle& tri : tris) {
        for (int e = 0; e < 3; ++e) {
          VertexId a = tri.v[static_cast<std::size_t>(e)];
          VertexId b = tri.v[static_cast<std::size_t>((e + 1) % 3)];
          if (a < b)
            ++forward[{a, b}];
          else
            ++backward[{b, a}];
        }
      }
      for (const auto& [edge, count] : forward) {
        const auto it = backward.find(edge);
        const int rev = it == backward.end() ? 0 : it->second;
        if (count + rev > 2 || count > 1 || rev > 1)
          issues.push_back("edge " + std::to_string(edge.first) + "-" +
                           std::to_string(edge.second) + " is not conforming (used " +
                           std::to_string(count) + " forward, " + std::to_string(rev) +
                           " backward)");
      }
      for (const auto& [edge, count] : backward) {
        if (count > 1 && forward.find(edge) == forward.end())
          issues.push_back("edge " + std::to_string(edge.first) + "-" +
                           std::to_string(edge.second) + " is not conforming (used " +
                           std::to_string(count) + " backward)");
      }
    }
  }

  if (mesh.annulus) {
    const Annulus& ann = *mesh.annulus;
    std::int64_t n_buffer = 0, n_sliding = 0;
    for (const AnnulusQuad& q : mesh.quads)
      (q.layer == Layer::Buffer ? n_buffer : n_sliding) += 1;
    if (n_buffer != ann.n_quads)
      issues.push_back("annulus declares " + std::to_string(ann.n_quads) +
                       " quads per layer but the mesh has " + std::to_string(n_buffer) +
                       " buffer quads");
    if (n_sliding != ann.n_quads)
      issues.push_back("annulus declares " + std::to_string(ann.n_quads) +
                       " quads per layer but the mesh has " + std::to_string(n_sliding) +
                       " sliding quads");
    if (static_cast<std::int64_t>(ann.inner_ring.seq.size()) != ann.n_quads)
      issues.push_back("inner ring has " + std::to_string(ann.inner_ring.seq.size()) +
                       " vertices; expected " + std::to_string(ann.n_quads));
    if (static_cast<std::int64_t>(ann.outer_ring.seq.size()) != ann.n_quads)
      issues.push_back("outer ring has " + std::to_string(ann.outer_ring.seq.size()) +
                       " vertices; expected " + std::to_string(ann.n_quads));
    if (static_cast<std::int64_t>(ann.mid_ring.size()) != ann.n_quads)
      issues.push_back("mid ring has " + std::to_string(ann.mid_ring.size()) +
                       " vertices; expected " + std::to_string(ann.n_quads));
    if (!chainsaw_ok(ann.inner_ring.seq))
      issues.push_back("inner ring ordering violates the chainsaw predicate");
    if (!chainsaw_ok(ann.outer_ring.seq))
      issues.push_back("outer ring ordering violates the chainsaw predicate");
    for (const std::vector<VertexId>* ring : {&ann.inner_ring.seq, &ann.outer_ring.seq,
                                              &ann.mid_ring}) {
      for (VertexId v : *ring)
        if (v < 0 || v >= n_verts)
          issues.push_back("ring vertex id " + std::to_string(v) + " out of range");
    }
  }

  if (!mesh.body_loop.empty()) {
    if (mesh.body_loop.size() < 3) {
      issues.push_back("body boundary loop has fewer than 3 vertices");
    } else {
      bool in_range = true;
      for (VertexId v : mesh.body_loop)
        if (v < 0 || v >= n_verts) {
          issues.push_back("body loop vertex id " + std::to_string(v) + " out of range");
          in_range = false;
        }
      if (in_range) {
        double twice_area = 0.0;
        for (std::size_t i = 0; i < mesh.body_loop.size(); ++i) {
          const Vec2 a = mesh.position(mesh.body_loop[i]);
          const Vec2 b = mesh.position(mesh.body_loop[(i + 1) % mesh.body_loop.size()]);
          twice_area += cross(a, b);
        }
        if (twice_area <= 0.0)
          issues.push_back("body boundary loop is not counterclockwise");
      }
    }
  }

  return report;
}

SpatialMesh generate_annulus_disk_mesh(Vec2 center, double r_rotating, double r_mid,
                                       double r_outer, double r_static, std::int64_t n_quads) {
  SpatialMesh mesh = build_annulus_mesh(center, r_rotating, r_mid, r_outer, n_quads);
  const std::int64_t n = n_quads;
  const std::vector<VertexId>& inner_seq = mesh.annulus->inner_ring.seq;
  const std::vector<VertexId>& outer_seq = mesh.annulus->outer_ring.seq;

  const bool with_static_ring = r_static > r_outer;
  std::vector<VertexId> static_seq;
  if (with_static_ring) {
    static_seq = sequential_ids(3 * n, n);
    place_ring(mesh.vertices, 3 * n, center, r_static, n);
  }
  const VertexId center_id = with_static_ring ? 4 * n : 3 * n;
  mesh.vertices.push_back(Vertex{center_id, center});

  // Rotating fan: center to the inner ring.
  for (std::int64_t k = 0; k < n; ++k) {
    const auto s0 = static_cast<std::size_t>(k);
    const auto s1 = static_cast<std::size_t>((k + 1) % n);
    mesh.triangles.push_back(Triangle{{center_id, inner_seq[s0], inner_seq[s1]},
                                      Region::Rotating});
  }
  // Static ring of triangles outside the sliding layer.
  if (with_static_ring) {
    for (std::int64_t k = 0; k < n; ++k) {
      const auto s0 = static_cast<std::size_t>(k);
      const auto s1 = static_cast<std::size_t>((k + 1) % n);
      mesh.triangles.push_back(Triangle{{outer_seq[s1], outer_seq[s0], static_seq[s1]},
                                        Region::Static});
      mesh.triangles.push_back(Triangle{{outer_seq[s0], static_seq[s0], static_seq[s1]},
                                        Region::Static});
    }
  }
  mesh.body_loop = inner_seq;
  return mesh;
}

SpatialMesh generate_box_ring_mesh(Vec2 center, double body_half, double domain_half,
                                   std::int64_t n_side, std::int64_t n_layers) {
  if (!(body_half > 0.0 && body_half < domain_half))
    throw InvalidArgument("box ring requires 0 < body_half < domain_half");
  if (n_side < 1 || n_layers < 1)
    throw InvalidArgument("box ring requires n_side >= 1 and n_layers >= 1");

  // One ring = 4*n_side points tracing the square boundary counterclockwise
  // from the corner (+h, +h) is awkward; start at (-h, -h) and walk CCW.
  const std::int64_t ring_len = 4 * n_side;
  const auto ring_point = [&](double half, std::int64_t k) -> Vec2 {
    const std::int64_t side = k / n_side;
    const double f = static_cast<double>(k % n_side) / static_cast<double>(n_side);
    switch (side) {
      case 0: return Vec2{center.x - half + 2.0 * half * f, center.y - half};  // bottom, +x
      case 1: return Vec2{center.x + half, center.y - half + 2.0 * half * f};  // right, +y
      case 2: return Vec2{center.x + half - 2.0 * half * f, center.y + half};  // top, -x
      default: return Vec2{center.x - half, center.y + half - 2.0 * half * f};  // left, -y
    }
  };

  SpatialMesh mesh;
  mesh.rotation_center = center;
  std::vector<std::vector<VertexId>> rings(static_cast<std::size_t>(n_layers + 1));
  VertexId next_id = 0;
  for (std::int64_t l = 0; l <= n_layers; ++l) {
    const double f = static_cast<double>(l) / static_cast<double>(n_layers);
    const double half = body_half + (domain_half - body_half) * f;
    auto& ring = rings[static_cast<std::size_t>(l)];
    ring.reserve(static_cast<std::size_t>(ring_len));
    for (std::int64_t k = 0; k < ring_len; ++k) {
      mesh.vertices.push_back(Vertex{next_id, ring_point(half, k)});
      ring.push_back(next_id);
      ++next_id;
    }
  }
  for (std::int64_t l = 0; l < n_layers; ++l) {
    const auto& in = rings[static_cast<std::size_t>(l)];
    const auto& out = rings[static_cast<std::size_t>(l + 1)];
    for (std::int64_t k = 0; k < ring_len; ++k) {
      const auto s0 = static_cast<std::size_t>(k);
      const auto s1 = static_cast<std::size_t>((k + 1) % ring_len);
      mesh.triangles.push_back(Triangle{{in[s0], out[s0], out[s1]}, Region::Static});
      mesh.triangles.push_back(Triangle{{in[s0], out[s1], in[s1]}, Region::Static});
    }
  }
  mesh.body_loop = rings.front();
  return mesh;
}

}  // namespace slabforge
