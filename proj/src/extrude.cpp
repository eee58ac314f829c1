#include "slabforge/extrude.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>

#include "slabforge/error.hpp"
#include "slabforge/log.hpp"

namespace slabforge {

namespace {

struct V3 {
  double t, x, y;
};

V3 sub(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  return V3{a.t - b.t, a.x - b.x, a.y - b.y};
}

double det3(const V3& a, const V3& b, const V3& c) {
  return a.t * (b.x * c.y - b.y * c.x) - a.x * (b.t * c.y - b.y * c.t) +
         a.y * (b.t * c.x - b.x * c.t);
}

}  // namespace

const char* to_string(FacetClass c) {
  switch (c) {
    case FacetClass::Bottom: return "bottom";
    case FacetClass::Top: return "top";
    case FacetClass::Lateral: return "lateral";
    case FacetClass::Interior: return "interior";
  }
  return "?";
}

SpaceTimePoint SpaceTimeSlab::point(VertexId global) const {
  const std::int64_t local = global - id_base;
  if (local < 0 || local >= 2 * n_per_level)
    throw InvalidArgument("vertex id " + std::to_string(global) + " outside slab levels");
  if (local < n_per_level) {
    const Vec2 p = bottom_pos[static_cast<std::size_t>(local)];
    return SpaceTimePoint{t_start, p.x, p.y};
  }
  const Vec2 p = top_pos[static_cast<std::size_t>(local - n_per_level)];
  return SpaceTimePoint{t_end, p.x, p.y};
}

double SpaceTimeSlab::tet_volume(std::size_t k) const {
  const SpaceTimeTet& tet = tets[k];
  const SpaceTimePoint p0 = point(tet.v[0]), p1 = point(tet.v[1]), p2 = point(tet.v[2]),
                       p3 = point(tet.v[3]);
  return det3(sub(p1, p0), sub(p2, p0), sub(p3, p0)) / 6.0;
}

std::map<FacetKey, FacetUse> build_facet_table(const SpaceTimeSlab& slab) {
  std::map<FacetKey, FacetUse> table;
  for (std::size_t k = 0; k < slab.tets.size(); ++k) {
    const auto& v = slab.tets[k].v;
    for (int j = 0; j < 4; ++j) {
      FacetKey key{v[static_cast<std::size_t>((j + 1) % 4)],
                   v[static_cast<std::size_t>((j + 2) % 4)],
                   v[static_cast<std::size_t>((j + 3) % 4)]};
      std::sort(key.begin(), key.end());
      FacetUse& use = table[key];
      if (use.multiplicity < 2) use.tets[static_cast<std::size_t>(use.multiplicity)] =
          static_cast<std::int32_t>(k);
      ++use.multiplicity;
    }
  }
  for (auto& [key, use] : table) {
    const int tops = (slab.is_top_level(key[0]) ? 1 : 0) + (slab.is_top_level(key[1]) ? 1 : 0) +
                     (slab.is_top_level(key[2]) ? 1 : 0);
    if (tops == 0)
      use.cls = FacetClass::Bottom;
    else if (tops == 3)
      use.cls = FacetClass::Top;
    else
      use.cls = use.multiplicity >= 2 ? FacetClass::Interior : FacetClass::Lateral;
  }
  return table;
}

std::array<std::array<VertexId, 4>, 3> cut_prism(const std::array<VertexId, 3>& bottom,
                                                 const std::array<VertexId, 3>& top) {
  if (bottom[0] == bottom[1] || bottom[1] == bottom[2] || bottom[0] == bottom[2])
    throw InvalidArgument("prism bottom ids must be distinct");
  const VertexId shift = top[0] - bottom[0];
  if (top[1] - bottom[1] != shift || top[2] - bottom[2] != shift || shift <= 0)
    throw InvalidArgument("prism top ids must be bottom ids plus one uniform positive offset");
  const VertexId bmax = std::max({bottom[0], bottom[1], bottom[2]});
  const VertexId bmin = std::min({bottom[0], bottom[1], bottom[2]});
  if (bmin + shift <= bmax)
    throw InvalidArgument("prism id offset must exceed the bottom id spread");

  int i0 = 0;
  if (bottom[1] < bottom[i0]) i0 = 1;
  if (bottom[2] < bottom[i0]) i0 = 2;
  const int p0 = i0, p1 = (i0 + 1) % 3, p2 = (i0 + 2) % 3;
  const auto b = [&](int i) { return bottom[static_cast<std::size_t>(i)]; };
  const auto tp = [&](int i) { return top[static_cast<std::size_t>(i)]; };

  // Quadrilateral sides split by the diagonal rising from the smaller bottom
  // id; p0 holds the global minimum, so only the far side (p1, p2) branches.
  if (b(p1) < b(p2)) {
    return {{{b(p0), b(p1), b(p2), tp(p2)},
             {b(p0), b(p1), tp(p2), tp(p1)},
             {b(p0), tp(p1), tp(p2), tp(p0)}}};
  }
  return {{{b(p0), b(p1), b(p2), tp(p1)},
           {b(p0), b(p2), tp(p2), tp(p1)},
           {b(p0), tp(p1), tp(p2), tp(p0)}}};
}

bool is_valid_cut(const PrismDiagonals& diagonals) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const auto& a = diagonals[static_cast<std::size_t>(i)];
      const auto& b = diagonals[static_cast<std::size_t>(j)];
      if (a.first == b.first || a.first == b.second || a.second == b.first ||
          a.second == b.second)
        return true;
    }
  }
  return false;
}

std::vector<PrismDiagonals> enumerate_prism_cut_assignments(const std::array<VertexId, 3>& bottom,
                                                            const std::array<VertexId, 3>& top) {
  std::vector<PrismDiagonals> out;
  out.reserve(8);
  for (int mask = 0; mask < 8; ++mask) {
    PrismDiagonals d;
    for (int side = 0; side < 3; ++side) {
      const auto i = static_cast<std::size_t>(side);
      const auto j = static_cast<std::size_t>((side + 1) % 3);
      if ((mask >> side) & 1)
        d[i] = {bottom[j], top[i]};  // diagonal from the side's second bottom vertex
      else
        d[i] = {bottom[i], top[j]};  // diagonal from the side's first bottom vertex
    }
    out.push_back(d);
  }
  return out;
}

std::uint16_t BlockPattern::key() const {
  std::uint16_t k = 0;
  for (int i = 0; i < 10; ++i)
    if (bits[static_cast<std::size_t>(i)]) k = static_cast<std::uint16_t>(k | (1u << i));
  return k;
}

SpaceTimePoint block_reference_point(int local) {
  const int t = local / 6;
  const int a = (local % 6) / 3;
  const int r = local % 3;
  // Reference coordinates (t, x, y) = (t, r, a): radial as x, angular as y
  // keeps the annulus column orientation-positive.
  return SpaceTimePoint{static_cast<double>(t), static_cast<double>(r), static_cast<double>(a)};
}

namespace {

struct ICoord {
  std::int64_t t, x, y;
};

ICoord block_icoord(int local) {
  const SpaceTimePoint p = block_reference_point(local);
  return ICoord{static_cast<std::int64_t>(p.t), static_cast<std::int64_t>(p.x),
                static_cast<std::int64_t>(p.y)};
}

std::int64_t idet3(const ICoord& a, const ICoord& b, const ICoord& c) {
  return a.t * (b.x * c.y - b.y * c.x) - a.x * (b.t * c.y - b.y * c.t) +
         a.y * (b.t * c.x - b.x * c.t);
}

ICoord isub(const ICoord& a, const ICoord& b) { return ICoord{a.t - b.t, a.x - b.x, a.y - b.y}; }

// Orientation of d against the sorted face (p, q, r); coordinates doubled so
// the interior reference point stays integral.
int iorient2(const ICoord& p2, const ICoord& q2, const ICoord& r2, const ICoord& d2) {
  const std::int64_t det = idet3(isub(q2, p2), isub(r2, p2), isub(d2, p2));
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

ICoord doubled(const ICoord& c) { return ICoord{2 * c.t, 2 * c.x, 2 * c.y}; }

using FaceLocalKey = std::array<int, 3>;

struct CandidateFace {
  FaceLocalKey key;
  int sign;  // orientation of the tet's fourth vertex against the sorted face
};

struct CandidateTet {
  std::array<int, 4> sorted;
  std::array<int, 4> oriented;  // positive reference volume
  std::int64_t det;             // |det| of the sorted tuple (6 x volume)
  std::array<CandidateFace, 4> faces;
};

// The ten boundary quads: corners (c00, c10, c11, c01) as local indices.
constexpr std::array<std::array<int, 4>, 10> kQuadCorners = {{
    {block_local_index(0, 0, 0), block_local_index(0, 1, 0), block_local_index(0, 1, 1),
     block_local_index(0, 0, 1)},
    {block_local_index(0, 0, 1), block_local_index(0, 1, 1), block_local_index(0, 1, 2),
     block_local_index(0, 0, 2)},
    {block_local_index(1, 0, 0), block_local_index(1, 1, 0), block_local_index(1, 1, 1),
     block_local_index(1, 0, 1)},
    {block_local_index(1, 0, 1), block_local_index(1, 1, 1), block_local_index(1, 1, 2),
     block_local_index(1, 0, 2)},
    {block_local_index(0, 0, 0), block_local_index(1, 0, 0), block_local_index(1, 1, 0),
     block_local_index(0, 1, 0)},
    {block_local_index(0, 0, 2), block_local_index(1, 0, 2), block_local_index(1, 1, 2),
     block_local_index(0, 1, 2)},
    {block_local_index(0, 0, 0), block_local_index(1, 0, 0), block_local_index(1, 0, 1),
     block_local_index(0, 0, 1)},
    {block_local_index(0, 0, 1), block_local_index(1, 0, 1), block_local_index(1, 0, 2),
     block_local_index(0, 0, 2)},
    {block_local_index(0, 1, 0), block_local_index(1, 1, 0), block_local_index(1, 1, 1),
     block_local_index(0, 1, 1)},
    {block_local_index(0, 1, 1), block_local_index(1, 1, 1), block_local_index(1, 1, 2),
     block_local_index(0, 1, 2)},
}};

bool face_on_outer_boundary(const FaceLocalKey& key) {
  const ICoord a = block_icoord(key[0]), b = block_icoord(key[1]), c = block_icoord(key[2]);
  if (a.t == b.t && b.t == c.t) return true;                          // t = 0 or 1
  if (a.y == b.y && b.y == c.y) return true;                          // a = 0 or 1
  if (a.x == b.x && b.x == c.x && (a.x == 0 || a.x == 2)) return true;  // inner/outer ring
  return false;
}

std::vector<CandidateTet> enumerate_candidates() {
  std::vector<CandidateTet> out;
  const std::array<std::array<int, 8>, 2> hexes = {{
      {0, 1, 3, 4, 6, 7, 9, 10},   // buffer hex (r in {0,1})
      {1, 2, 4, 5, 7, 8, 10, 11},  // sliding hex (r in {1,2})
  }};
  std::set<std::array<int, 4>> seen;
  for (const auto& hex : hexes) {
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j)
        for (int k = j + 1; k < 8; ++k)
          for (int l = k + 1; l < 8; ++l) {
            std::array<int, 4> vs{hex[static_cast<std::size_t>(i)],
                                  hex[static_cast<std::size_t>(j)],
                                  hex[static_cast<std::size_t>(k)],
                                  hex[static_cast<std::size_t>(l)]};
            if (!seen.insert(vs).second) continue;
            const ICoord p0 = block_icoord(vs[0]), p1 = block_icoord(vs[1]),
                         p2 = block_icoord(vs[2]), p3 = block_icoord(vs[3]);
            const std::int64_t det = idet3(isub(p1, p0), isub(p2, p0), isub(p3, p0));
            if (det == 0) continue;
            // Reject tets that contain (or touch with a face/edge) any other
            // block vertex; those can never appear in a facet-matched
            // partition without subdividing a neighbor's facet.
            bool blocked = false;
            for (int w = 0; w < 12 && !blocked; ++w) {
              if (w == vs[0] || w == vs[1] || w == vs[2] || w == vs[3]) continue;
              const ICoord pw = block_icoord(w);
              // Barycentric signs of pw with respect to the tet.
              const std::int64_t b0 = idet3(isub(p1, pw), isub(p2, pw), isub(p3, pw));
              const std::int64_t b1 = idet3(isub(pw, p0), isub(p2, p0), isub(p3, p0));
              const std::int64_t b2 = idet3(isub(p1, p0), isub(pw, p0), isub(p3, p0));
              const std::int64_t b3 = idet3(isub(p1, p0), isub(p2, p0), isub(pw, p0));
              const auto same_or_zero = [&](std::int64_t v) {
                return det > 0 ? v >= 0 : v <= 0;
              };
              if (same_or_zero(b0) && same_or_zero(b1) && same_or_zero(b2) && same_or_zero(b3))
                blocked = true;
            }
            if (blocked) continue;

            CandidateTet cand;
            cand.sorted = vs;
            cand.det = det > 0 ? det : -det;
            cand.oriented = det > 0 ? vs : std::array<int, 4>{vs[0], vs[1], vs[3], vs[2]};
            for (int f = 0; f < 4; ++f) {
              FaceLocalKey key{};
              int m = 0;
              for (int v = 0; v < 4; ++v)
                if (v != f) key[static_cast<std::size_t>(m++)] = vs[static_cast<std::size_t>(v)];
              const int sign = iorient2(doubled(block_icoord(key[0])),
                                        doubled(block_icoord(key[1])),
                                        doubled(block_icoord(key[2])),
                                        doubled(block_icoord(vs[static_cast<std::size_t>(f)])));
              cand.faces[static_cast<std::size_t>(f)] = CandidateFace{key, sign};
            }
            out.push_back(cand);
          }
  }
  std::sort(out.begin(), out.end(),
            [](const CandidateTet& a, const CandidateTet& b) { return a.sorted < b.sorted; });
  return out;
}

const std::vector<CandidateTet>& candidate_tets() {
  static const std::vector<CandidateTet> cands = enumerate_candidates();
  return cands;
}

struct BlockSearch {
  const std::vector<CandidateTet>& cands;
  std::map<FaceLocalKey, int> required;
  std::vector<char> used;
  std::vector<int> chosen;
  std::int64_t acc = 0;

  explicit BlockSearch(const std::vector<CandidateTet>& c)
      : cands(c), used(c.size(), 0) {}

  bool dfs() {
    if (required.empty()) return acc == 12;
    const FaceLocalKey face = required.begin()->first;
    const int need = required.begin()->second;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      if (used[ci]) continue;
      const CandidateTet& cand = cands[ci];
      if (acc + cand.det > 12) continue;
      bool has_face = false;
      for (const CandidateFace& f : cand.faces)
        if (f.key == face && f.sign == need) has_face = true;
      if (!has_face) continue;

      // Tentatively place, recording map edits for rollback.
      std::vector<std::pair<FaceLocalKey, int>> erased;
      std::vector<FaceLocalKey> inserted;
      bool ok = true;
      for (const CandidateFace& f : cand.faces) {
        const auto it = required.find(f.key);
        if (it != required.end()) {
          if (it->second != f.sign) {
            ok = false;
            break;
          }
          erased.emplace_back(f.key, it->second);
          required.erase(it);
        } else if (face_on_outer_boundary(f.key)) {
          ok = false;  // would create a boundary triangle the pattern forbids
          break;
        } else {
          required.emplace(f.key, -f.sign);
          inserted.push_back(f.key);
        }
      }
      if (ok) {
        used[ci] = 1;
        chosen.push_back(static_cast<int>(ci));
        acc += cand.det;
        if (dfs()) return true;
        acc -= cand.det;
        chosen.pop_back();
        used[ci] = 0;
      }
      for (const FaceLocalKey& key : inserted) required.erase(key);
      for (const auto& [key, sign] : erased) required.emplace(key, sign);
    }
    return false;
  }
};

}  // namespace

std::vector<std::array<int, 4>> derive_block_connectivity(const BlockPattern& pattern) {
  const std::vector<CandidateTet>& cands = candidate_tets();
  BlockSearch search(cands);

  const ICoord interior2{1, 2, 1};  // (t, x, y) = (0.5, 1.0, 0.5), doubled
  for (int q = 0; q < 10; ++q) {
    const auto& c = kQuadCorners[static_cast<std::size_t>(q)];
    const int bit = pattern.bits[static_cast<std::size_t>(q)] ? 1 : 0;
    const std::array<std::array<int, 3>, 2> tris =
        bit == 0 ? std::array<std::array<int, 3>, 2>{{{c[0], c[1], c[2]}, {c[0], c[2], c[3]}}}
                 : std::array<std::array<int, 3>, 2>{{{c[0], c[1], c[3]}, {c[1], c[2], c[3]}}};
    for (const auto& tri : tris) {
      FaceLocalKey key{tri[0], tri[1], tri[2]};
      std::sort(key.begin(), key.end());
      const int s_req = iorient2(doubled(block_icoord(key[0])), doubled(block_icoord(key[1])),
                                 doubled(block_icoord(key[2])), interior2);
      if (s_req == 0)
        throw ConformityError("degenerate boundary triangle in block pattern");
      if (!search.required.emplace(key, s_req).second)
        throw ConformityError("block pattern repeats a boundary triangle");
    }
  }

  if (!search.dfs())
    throw ConformityError("no tetrahedralization matches block pattern " +
                          std::to_string(pattern.key()));

  std::vector<std::array<int, 4>> tets;
  tets.reserve(search.chosen.size());
  for (int ci : search.chosen) tets.push_back(cands[static_cast<std::size_t>(ci)].oriented);
  std::sort(tets.begin(), tets.end(), [](const std::array<int, 4>& a,
                                         const std::array<int, 4>& b) {
    std::array<int, 4> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
  });
  return tets;
}

const std::vector<std::array<int, 4>>& BlockCache::get(const BlockPattern& pattern) {
  const std::uint16_t key = pattern.key();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    log_debug("deriving block connectivity for pattern " + std::to_string(key));
    it = cache_.emplace(key, derive_block_connectivity(pattern)).first;
  }
  return it->second;
}

int select_configuration(SwapDirection direction, bool parity_agree) {
  switch (direction) {
    case SwapDirection::PrimaryToSecondary: return parity_agree ? 1 : 3;
    case SwapDirection::SecondaryToPrimary: return parity_agree ? 2 : 4;
    case SwapDirection::None: break;
  }
  throw InvalidArgument(
      "configuration selection requires a swap; the plain prism path handles no-swap slabs");
}

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConformityError(msg);
}

}  // namespace

SpaceTimeSlab extrude_slab(const SpatialMesh& bottom, const SpatialMesh& top,
                           const SwapDecision& swap, double t_start, double t_end,
                           BlockCache* cache, ExtrudeStats* stats) {
  if (!(t_end > t_start) || !std::isfinite(t_start) || !std::isfinite(t_end))
    throw InvalidArgument("slab needs t_end > t_start");
  const std::int64_t n = bottom.vertex_count();
  if (n <= 0) throw InvalidArgument("cannot extrude an empty mesh");
  if (top.vertex_count() != n)
    throw ConformityError("bottom and top meshes have different vertex counts");
  if (top.id_offset != bottom.id_offset + n)
    throw ConformityError("top id offset must equal bottom offset plus the vertex count");
  require(bottom.triangles.size() == top.triangles.size(),
          "bottom and top triangle counts differ");
  for (std::size_t i = 0; i < bottom.triangles.size(); ++i)
    require(bottom.triangles[i].v == top.triangles[i].v &&
                bottom.triangles[i].region == top.triangles[i].region,
            "triangle connectivity differs between time levels");
  require(bottom.quads.size() == top.quads.size(), "bottom and top quad counts differ");

  const auto same_quad = [](const AnnulusQuad& a, const AnnulusQuad& b) {
    return a.n1 == b.n1 && a.n2 == b.n2 && a.n3 == b.n3 && a.n4 == b.n4 && a.layer == b.layer;
  };

  SpaceTimeSlab slab;
  slab.t_start = t_start;
  slab.t_end = t_end;
  slab.id_base = bottom.id_offset;
  slab.n_per_level = n;
  slab.bottom_pos.resize(static_cast<std::size_t>(n));
  slab.top_pos.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    slab.bottom_pos[static_cast<std::size_t>(i)] = bottom.position(i);
    slab.top_pos[static_cast<std::size_t>(i)] = top.position(i);
  }

  const auto emit_tet = [&](const std::array<VertexId, 4>& v, Region region,
                            const char* what) {
    slab.tets.push_back(SpaceTimeTet{v, region});
    if (slab.tet_volume(slab.tets.size() - 1) <= 0.0)
      throw ConformityError(std::string("non-positive space-time volume in ") + what +
                            "; the per-slab motion is too large");
  };

  const auto emit_prism = [&](VertexId a, VertexId b, VertexId c, Region region) {
    const std::array<VertexId, 3> gb{bottom.id_offset + a, bottom.id_offset + b,
                                     bottom.id_offset + c};
    const std::array<VertexId, 3> gt{gb[0] + n, gb[1] + n, gb[2] + n};
    for (const auto& tet : cut_prism(gb, gt)) emit_tet(tet, region, "prism cut");
    if (stats) ++stats->prisms;
  };

  for (const Triangle& tri : bottom.triangles) emit_prism(tri.v[0], tri.v[1], tri.v[2],
                                                          tri.region);

  if (!swap.swap) {
    for (std::size_t i = 0; i < bottom.quads.size(); ++i) {
      require(same_quad(bottom.quads[i], top.quads[i]),
              "quad connectivity differs between time levels without a swap");
      const AnnulusQuad& q = bottom.quads[i];
      const Region region = q.layer == Layer::Buffer ? Region::Buffer : Region::Sliding;
      emit_prism(q.n1, q.n2, q.n4, region);
      emit_prism(q.n2, q.n3, q.n4, region);
    }
    return slab;
  }

  // Swap slab: the whole annulus is processed as 2x2 blocks.
  require(swap.shift_delta == 1 || swap.shift_delta == -1,
          "swap decision carries no shift direction");
  require(bottom.annulus.has_value() && top.annulus.has_value(),
          "swap extrusion requires annulus topology on both meshes");
  const Annulus& annB = *bottom.annulus;
  const Annulus& annT = *top.annulus;
  require(annB.n_quads == annT.n_quads, "annulus quad counts differ between time levels");
  require(annB.inner_ring.seq == annT.inner_ring.seq && annB.outer_ring.seq == annT.outer_ring.seq &&
              annB.mid_ring == annT.mid_ring,
          "annulus ring orderings differ between time levels");
  require(annT.sliding_shift == annB.sliding_shift + swap.shift_delta,
          "top mesh shift does not reflect the swap decision");
  {
    const AnnulusState check{annB.n_quads, annB.sliding_shift, 0.0};
    const bool primary = check.current_mesh() == MeshDesignation::Primary;
    require((primary && swap.direction == SwapDirection::PrimaryToSecondary) ||
                (!primary && swap.direction == SwapDirection::SecondaryToPrimary),
            "swap direction is inconsistent with the bottom mesh designation");
  }

  // Verify both meshes carry the canonical quad families for their shifts.
  const std::vector<AnnulusQuad> famB = sliding_quads_for_shift(annB, annB.sliding_shift);
  const std::vector<AnnulusQuad> famT = sliding_quads_for_shift(annT, annT.sliding_shift);
  {
    std::size_t kb = 0, kt = 0;
    for (std::size_t i = 0; i < bottom.quads.size(); ++i) {
      if (bottom.quads[i].layer == Layer::Sliding)
        require(same_quad(bottom.quads[i], famB[kb++]),
                "bottom sliding quads are not the canonical family for their shift");
      else
        require(same_quad(bottom.quads[i], top.quads[i]),
                "buffer quads differ between time levels");
      if (top.quads[i].layer == Layer::Sliding)
        require(same_quad(top.quads[i], famT[kt++]),
                "top sliding quads are not the canonical family for their shift");
    }
    require(kb == famB.size() && kt == famT.size(), "sliding quad count mismatch");
  }

  BlockCache local_cache;
  BlockCache& blocks = cache ? *cache : local_cache;
  const std::size_t patterns_before = blocks.size();

  const std::int64_t nq = annB.n_quads;
  const std::int64_t hex_s = std::max(annB.sliding_shift, annT.sliding_shift);
  const bool advance = swap.shift_delta > 0;

  for (std::int64_t i = 0; i < nq; ++i) {
    const VertexId I0 = annB.inner_ring.seq[static_cast<std::size_t>(i)];
    const VertexId I1 = annB.inner_ring.seq[static_cast<std::size_t>(wrap_index(i + 1, nq))];
    const VertexId M0 = annB.mid_ring[static_cast<std::size_t>(i)];
    const VertexId M1 = annB.mid_ring[static_cast<std::size_t>(wrap_index(i + 1, nq))];
    const VertexId O0 = annB.outer_ring.seq[static_cast<std::size_t>(wrap_index(i + hex_s, nq))];
    const VertexId O1 =
        annB.outer_ring.seq[static_cast<std::size_t>(wrap_index(i + hex_s + 1, nq))];

    std::array<VertexId, 12> g{};
    const auto place = [&](int t, int a, int r, VertexId local) {
      g[static_cast<std::size_t>(block_local_index(t, a, r))] =
          bottom.id_offset + local + (t == 1 ? n : 0);
    };
    place(0, 0, 0, I0); place(0, 1, 0, I1);
    place(0, 0, 1, M0); place(0, 1, 1, M1);
    place(0, 0, 2, O0); place(0, 1, 2, O1);
    place(1, 0, 0, I0); place(1, 1, 0, I1);
    place(1, 0, 1, M0); place(1, 1, 1, M1);
    place(1, 0, 2, O0); place(1, 1, 2, O1);

    BlockPattern pat;
    pat.bits[0] = 0;  // buffer quads keep their n2-n4 cut at both levels
    pat.bits[2] = 0;
    pat.bits[1] = advance ? 1 : 0;  // pre-swap sliding cut inside this column
    pat.bits[3] = advance ? 0 : 1;  // post-swap sliding cut
    pat.bits[4] = I0 < I1 ? 0 : 1;  // rotating-side prism diagonals (smallest id)
    pat.bits[5] = O0 < O1 ? 0 : 1;  // static-side prism diagonals
    pat.bits[6] = I0 < M0 ? 0 : 1;  // column side faces: smallest-id diagonals
    pat.bits[7] = M0 < O0 ? 0 : 1;
    pat.bits[8] = I1 < M1 ? 0 : 1;
    pat.bits[9] = M1 < O1 ? 0 : 1;

    const auto& local_tets = blocks.get(pat);
    for (const auto& lt : local_tets) {
      std::array<VertexId, 4> v{g[static_cast<std::size_t>(lt[0])],
                                g[static_cast<std::size_t>(lt[1])],
                                g[static_cast<std::size_t>(lt[2])],
                                g[static_cast<std::size_t>(lt[3])]};
      bool buffer = true;
      for (int lv : lt)
        if (lv % 3 == 2) buffer = false;
      emit_tet(v, buffer ? Region::Buffer : Region::Sliding, "annulus block");
    }
    if (stats) {
      ++stats->blocks;
      const int cfg = select_configuration(swap.direction, pat.bits[4] == pat.bits[1]);
      ++stats->configuration_count[static_cast<std::size_t>(cfg)];
    }
  }
  if (stats) stats->distinct_patterns += static_cast<std::int64_t>(blocks.size() -
                                                                   patterns_before);
  return slab;
}

FacetGeometry facet_geometry(const SpaceTimeSlab& slab, std::size_t k, int face_index) {
  if (face_index < 0 || face_index > 3) throw InvalidArgument("face index must be 0..3");
  const auto& v = slab.tets[k].v;
  const SpaceTimePoint a = slab.point(v[static_cast<std::size_t>((face_index + 1) % 4)]);
  const SpaceTimePoint b = slab.point(v[static_cast<std::size_t>((face_index + 2) % 4)]);
  const SpaceTimePoint c = slab.point(v[static_cast<std::size_t>((face_index + 3) % 4)]);
  const SpaceTimePoint d = slab.point(v[static_cast<std::size_t>(face_index)]);

  const V3 u = sub(b, a), w = sub(c, a);
  V3 nvec{u.x * w.y - u.y * w.x, u.y * w.t - u.t * w.y, u.t * w.x - u.x * w.t};
  const V3 to_d = sub(d, a);
  if (nvec.t * to_d.t + nvec.x * to_d.x + nvec.y * to_d.y > 0.0) {
    nvec.t = -nvec.t;
    nvec.x = -nvec.x;
    nvec.y = -nvec.y;
  }
  const double norm = std::sqrt(nvec.t * nvec.t + nvec.x * nvec.x + nvec.y * nvec.y);
  if (!(norm > 0.0)) throw InvalidArgument("zero-area space-time facet");

  FacetGeometry geom;
  geom.n_t = nvec.t / norm;
  geom.n = Vec2{nvec.x / norm, nvec.y / norm};
  geom.area = 0.5 * norm;
  geom.centroid = SpaceTimePoint{(a.t + b.t + c.t) / 3.0, (a.x + b.x + c.x) / 3.0,
                                 (a.y + b.y + c.y) / 3.0};
  return geom;
}

std::string ConformityReport::to_string() const {
  std::ostringstream os;
  for (const std::string& s : issues) os << s << '\n';
  return os.str();
}

SlabVolumeCheck slab_volume_check(const SpaceTimeSlab& slab) {
  SlabVolumeCheck check;
  for (std::size_t k = 0; k < slab.tets.size(); ++k) check.tet_total += slab.tet_volume(k);

  // Slice area A(lambda) from the lateral boundary facets: each contributes
  // the shoelace term of its time-slice segment, oriented counterclockwise
  // around the slice polygon (interior left of travel). A is quadratic in
  // lambda, so Simpson integrates it exactly.
  double a0 = 0.0, am = 0.0, a1 = 0.0;
  std::map<FacetKey, int> mult;
  for (const auto& tet : slab.tets) {
    for (int j = 0; j < 4; ++j) {
      FacetKey key{tet.v[static_cast<std::size_t>((j + 1) % 4)],
                   tet.v[static_cast<std::size_t>((j + 2) % 4)],
                   tet.v[static_cast<std::size_t>((j + 3) % 4)]};
      std::sort(key.begin(), key.end());
      ++mult[key];
    }
  }
  for (std::size_t k = 0; k < slab.tets.size(); ++k) {
    const auto& tet = slab.tets[k];
    for (int j = 0; j < 4; ++j) {
      FacetKey key{tet.v[static_cast<std::size_t>((j + 1) % 4)],
                   tet.v[static_cast<std::size_t>((j + 2) % 4)],
                   tet.v[static_cast<std::size_t>((j + 3) % 4)]};
      std::sort(key.begin(), key.end());
      if (mult[key] != 1) continue;
      const int tops = (slab.is_top_level(key[0]) ? 1 : 0) +
                       (slab.is_top_level(key[1]) ? 1 : 0) +
                       (slab.is_top_level(key[2]) ? 1 : 0);
      if (tops == 0 || tops == 3) continue;  // bottom/top facets handled below

      // Segment endpoints as functions of lambda in [0, 1].
      std::array<Vec2, 2> bot{}, top{};
      int nb = 0, nt = 0;
      for (VertexId vid : key) {
        const SpaceTimePoint p = slab.point(vid);
        if (slab.is_top_level(vid))
          top[static_cast<std::size_t>(nt++)] = Vec2{p.x, p.y};
        else
          bot[static_cast<std::size_t>(nb++)] = Vec2{p.x, p.y};
      }
      const auto seg = [&](double lam) -> std::array<Vec2, 2> {
        if (nb == 2) {
          return {Vec2{bot[0].x + lam * (top[0].x - bot[0].x),
                       bot[0].y + lam * (top[0].y - bot[0].y)},
                  Vec2{bot[1].x + lam * (top[0].x - bot[1].x),
                       bot[1].y + lam * (top[0].y - bot[1].y)}};
        }
        return {Vec2{bot[0].x + lam * (top[0].x - bot[0].x),
                     bot[0].y + lam * (top[0].y - bot[0].y)},
                Vec2{bot[0].x + lam * (top[1].x - bot[0].x),
                     bot[0].y + lam * (top[1].y - bot[0].y)}};
      };

      // Travel direction: interior to the left, i.e. +90 degrees from the
      // outward spatial normal of this (single-owner) facet.
      const FacetGeometry geom = facet_geometry(slab, k, j);
      const Vec2 travel{-geom.n.y, geom.n.x};
      const auto mid = seg(0.5);
      const double orient = dot(Vec2{mid[1].x - mid[0].x, mid[1].y - mid[0].y}, travel);
      const double flip = orient >= 0.0 ? 1.0 : -1.0;
      const auto contrib = [&](double lam) {
        const auto s = seg(lam);
        return 0.5 * flip * cross(s[0], s[1]);
      };
      a0 += contrib(0.0);
      am += contrib(0.5);
      a1 += contrib(1.0);
    }
  }
  check.area_bottom = a0;
  check.area_top = a1;
  check.simpson_total = (slab.t_end - slab.t_start) / 6.0 * (a0 + 4.0 * am + a1);
  return check;
}

ConformityReport validate_slab(const SpaceTimeSlab& slab, const SpatialMesh* bottom,
                               const SpatialMesh* top) {
  ConformityReport report;
  auto& issues = report.issues;
  if (slab.n_per_level <= 0 ||
      slab.bottom_pos.size() != static_cast<std::size_t>(slab.n_per_level) ||
      slab.top_pos.size() != static_cast<std::size_t>(slab.n_per_level)) {
    issues.push_back("slab vertex tables are inconsistent");
    return report;
  }

  for (std::size_t k = 0; k < slab.tets.size(); ++k) {
    const auto& v = slab.tets[k].v;
    bool in_range = true;
    for (VertexId vid : v) {
      if (vid < slab.id_base || vid >= slab.id_base + 2 * slab.n_per_level) {
        issues.push_back("tet " + std::to_string(k) + " references vertex " +
                         std::to_string(vid) + " outside the slab's two time levels");
        in_range = false;
      }
    }
    if (!in_range) continue;
    if (slab.tet_volume(k) <= 0.0)
      issues.push_back("tet " + std::to_string(k) + " has non-positive volume");
  }
  if (!issues.empty()) return report;

  const auto table = build_facet_table(slab);
  for (const auto& [key, use] : table) {
    if (use.multiplicity > 2) {
      issues.push_back("facet (" + std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
                       std::to_string(key[2]) + ") used by " +
                       std::to_string(use.multiplicity) + " tets");
      continue;
    }
    if (use.multiplicity == 2) {
      if (use.cls != FacetClass::Interior) {
        issues.push_back("constant-time facet (" + std::to_string(key[0]) + "," +
                         std::to_string(key[1]) + "," + std::to_string(key[2]) +
                         ") is shared by two tets");
        continue;
      }
      // The two owners must lie on opposite geometric sides.
      int signs[2] = {0, 0};
      for (int o = 0; o < 2; ++o) {
        const auto& tv = slab.tets[static_cast<std::size_t>(use.tets[static_cast<std::size_t>(
                                       o)])].v;
        VertexId d = -1;
        for (VertexId vid : tv)
          if (vid != key[0] && vid != key[1] && vid != key[2]) d = vid;
        const SpaceTimePoint p = slab.point(key[0]), q = slab.point(key[1]),
                             r = slab.point(key[2]), s = slab.point(d);
        const double det = det3(sub(q, p), sub(r, p), sub(s, p));
        signs[o] = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
      }
      if (signs[0] * signs[1] != -1)
        issues.push_back("interior facet (" + std::to_string(key[0]) + "," +
                         std::to_string(key[1]) + "," + std::to_string(key[2]) +
                         ") does not separate its two tets");
    }
  }

  const auto expected_facets = [&](const SpatialMesh& mesh) {
    std::set<FacetKey> keys;
    for (const Triangle& tri : mesh.full_triangulation()) {
      FacetKey key{mesh.id_offset + tri.v[0], mesh.id_offset + tri.v[1],
                   mesh.id_offset + tri.v[2]};
      std::sort(key.begin(), key.end());
      keys.insert(key);
    }
    return keys;
  };
  const auto check_cover = [&](const std::set<FacetKey>& expected, FacetClass cls,
                               const char* name) {
    std::set<FacetKey> observed;
    for (const auto& [key, use] : table)
      if (use.cls == cls && use.multiplicity == 1) observed.insert(key);
    if (observed != expected) {
      std::size_t missing = 0, extra = 0;
      for (const auto& k : expected)
        if (!observed.count(k)) ++missing;
      for (const auto& k : observed)
        if (!expected.count(k)) ++extra;
      issues.push_back(std::string(name) + " facets do not reproduce the spatial mesh (" +
                       std::to_string(missing) + " missing, " + std::to_string(extra) +
                       " unexpected)");
    }
  };
  if (bottom) check_cover(expected_facets(*bottom), FacetClass::Bottom, "bottom");
  if (top) check_cover(expected_facets(*top), FacetClass::Top, "top");

  // Single-owner spanning facets must sit above boundary edges of the spatial
  // mesh at their constant-level side; anything else is an interior void.
  const auto boundary_edges = [](const SpatialMesh& mesh) {
    std::map<std::pair<VertexId, VertexId>, int> count;
    for (const Triangle& tri : mesh.full_triangulation()) {
      for (int e = 0; e < 3; ++e) {
        VertexId a = mesh.id_offset + tri.v[static_cast<std::size_t>(e)];
        VertexId b = mesh.id_offset + tri.v[static_cast<std::size_t>((e + 1) % 3)];
        if (a > b) std::swap(a, b);
        ++count[{a, b}];
      }
    }
    std::set<std::pair<VertexId, VertexId>> edges;
    for (const auto& [edge, c] : count)
      if (c == 1) edges.insert(edge);
    return edges;
  };
  const auto check_lateral_edges = [&](const SpatialMesh& mesh, bool pair_on_top,
                                       const char* name) {
    const auto edges = boundary_edges(mesh);
    for (const auto& [key, use] : table) {
      if (use.cls != FacetClass::Lateral) continue;
      std::vector<VertexId> level_pair;
      for (VertexId vid : key)
        if (slab.is_top_level(vid) == pair_on_top) level_pair.push_back(vid);
      if (level_pair.size() != 2) continue;
      if (!edges.count({std::min(level_pair[0], level_pair[1]),
                        std::max(level_pair[0], level_pair[1])}))
        issues.push_back("lateral facet (" + std::to_string(key[0]) + "," +
                         std::to_string(key[1]) + "," + std::to_string(key[2]) +
                         ") sits above an interior edge of the " + name + " mesh");
    }
  };
  if (bottom) check_lateral_edges(*bottom, false, "bottom");
  if (top) check_lateral_edges(*top, true, "top");

  const SlabVolumeCheck vol = slab_volume_check(slab);
  const double scale = std::max({std::abs(vol.simpson_total), std::abs(vol.tet_total), 1e-300});
  if (std::abs(vol.tet_total - vol.simpson_total) > 1e-12 * scale)
    issues.push_back("tet volumes sum to " + std::to_string(vol.tet_total) +
                     " but the slice-area integral gives " + std::to_string(vol.simpson_total));

  // Slice areas at the slab ends must match the bottom/top facet areas.
  double bottom_area = 0.0, top_area = 0.0;
  for (const auto& [key, use] : table) {
    if (use.multiplicity != 1) continue;
    if (use.cls != FacetClass::Bottom && use.cls != FacetClass::Top) continue;
    const SpaceTimePoint a = slab.point(key[0]), b = slab.point(key[1]), c = slab.point(key[2]);
    const double area =
        std::abs(triangle_signed_area(Vec2{a.x, a.y}, Vec2{b.x, b.y}, Vec2{c.x, c.y}));
    (use.cls == FacetClass::Bottom ? bottom_area : top_area) += area;
  }
  if (std::abs(bottom_area - vol.area_bottom) > 1e-12 * std::max(bottom_area, 1e-300))
    issues.push_back("bottom facet area " + std::to_string(bottom_area) +
                     " does not match the lateral slice " + std::to_string(vol.area_bottom));
  if (std::abs(top_area - vol.area_top) > 1e-12 * std::max(top_area, 1e-300))
    issues.push_back("top facet area " + std::to_string(top_area) +
                     " does not match the lateral slice " + std::to_string(vol.area_top));

  return report;
}

}  // namespace slabforge
