#include "slabforge/sliding.hpp"

#include <cmath>
#include <string>

#include "slabforge/error.hpp"
#include "slabforge/geometry.hpp"

namespace slabforge {

namespace {
constexpr double kTau = 6.283185307179586476925286766559;  // 2*pi
constexpr double kTieRel = 1e-12;
}  // namespace

const char* to_string(MeshDesignation d) {
  return d == MeshDesignation::Primary ? "primary" : "secondary";
}

const char* to_string(SwapDirection d) {
  switch (d) {
    case SwapDirection::None: return "none";
    case SwapDirection::PrimaryToSecondary: return "primary_to_secondary";
    case SwapDirection::SecondaryToPrimary: return "secondary_to_primary";
  }
  return "?";
}

double angular_pitch(std::int64_t n_quads) {
  if (n_quads <= 0) throw InvalidArgument("angular pitch requires a positive quad count");
  return kTau / static_cast<double>(n_quads);
}

double AnnulusState::angular_pitch() const { return slabforge::angular_pitch(n_quads); }

double AnnulusState::lean() const {
  return accumulated_rotation - static_cast<double>(shift) * angular_pitch();
}

MeshDesignation AnnulusState::current_mesh() const {
  return (((shift % 2) + 2) % 2) == 0 ? MeshDesignation::Primary : MeshDesignation::Secondary;
}

double RepresentativeDiagonals::current(const AnnulusState& s) const {
  return s.current_mesh() == MeshDesignation::Primary ? l_primary : l_secondary;
}

double RepresentativeDiagonals::alternative(const AnnulusState& s) const {
  return s.current_mesh() == MeshDesignation::Primary ? l_secondary : l_primary;
}

RepresentativeDiagonals representative_diagonals(const SpatialMesh& mesh,
                                                 const AnnulusState& state) {
  if (!mesh.annulus) throw InvalidArgument("mesh has no annulus");
  const Annulus& ann = *mesh.annulus;
  if (ann.n_quads != state.n_quads)
    throw InvalidArgument("annulus state quad count does not match the mesh");
  if (ann.sliding_shift != state.shift)
    throw InvalidArgument("annulus state shift " + std::to_string(state.shift) +
                          " does not match the mesh's " + std::to_string(ann.sliding_shift));

  const std::int64_t n = ann.n_quads;
  const auto mid = [&](std::int64_t i) {
    return mesh.position(ann.mid_ring[static_cast<std::size_t>(wrap_index(i, n))]);
  };
  const auto outer = [&](std::int64_t i) {
    return mesh.position(ann.outer_ring.seq[static_cast<std::size_t>(wrap_index(i, n))]);
  };
  const std::int64_t s = state.shift;

  // Current family: quad i = (M_i, M_i+1) x (O_i+s, O_i+s+1), diagonal
  // M_i - O_i+s+1. Alternatives replace that family by M_i+1 - O_i+s
  // (retreat) or M_i - O_i+s+2 (advance).
  const double l_cur = dist(mid(0), outer(s + 1));
  const double l_ret = dist(mid(1), outer(s));
  const double l_adv = dist(mid(0), outer(s + 2));
  if (!(l_cur > 0.0) || !(l_ret > 0.0) || !(l_adv > 0.0))
    throw ConformityError("degenerate sliding-layer diagonal");

  // Congruence check: every quad's current diagonal must match quad 0.
  for (std::int64_t i = 1; i < n; ++i) {
    const double li = dist(mid(i), outer(i + s + 1));
    if (std::abs(li - l_cur) > 1e-9 * l_cur)
      throw ConformityError("sliding quads are not congruent: quad " + std::to_string(i) +
                            " diagonal " + std::to_string(li) + " vs quad 0 diagonal " +
                            std::to_string(l_cur));
  }

  RepresentativeDiagonals rd;
  rd.candidate_shift_delta = (l_adv <= l_ret) ? +1 : -1;
  const double l_alt = std::min(l_ret, l_adv);
  if (state.current_mesh() == MeshDesignation::Primary) {
    rd.l_primary = l_cur;
    rd.l_secondary = l_alt;
  } else {
    rd.l_primary = l_alt;
    rd.l_secondary = l_cur;
  }
  return rd;
}

namespace {

SwapDecision decide_core(const AnnulusState& state, double l_primary, double l_secondary,
                         std::int64_t candidate_delta) {
  if (!(l_primary > 0.0) || !(l_secondary > 0.0))
    throw InvalidArgument("diagonal lengths must be positive");
  SwapDecision d;
  d.l_primary = l_primary;
  d.l_secondary = l_secondary;
  const bool primary_current = state.current_mesh() == MeshDesignation::Primary;
  const double l_cur = primary_current ? l_primary : l_secondary;
  const double l_alt = primary_current ? l_secondary : l_primary;
  d.swap = l_alt < l_cur * (1.0 - kTieRel);
  if (d.swap) {
    d.direction = primary_current ? SwapDirection::PrimaryToSecondary
                                  : SwapDirection::SecondaryToPrimary;
    d.shift_delta = candidate_delta;
  }
  return d;
}

}  // namespace

SwapDecision decide_swap(const AnnulusState& state, const RepresentativeDiagonals& diagonals) {
  return decide_core(state, diagonals.l_primary, diagonals.l_secondary,
                     diagonals.candidate_shift_delta);
}

SwapDecision decide_swap(const AnnulusState& state, double l_primary, double l_secondary) {
  // Advances absorb accumulated positive lean, retreats negative lean.
  const std::int64_t candidate = state.lean() >= 0.5 * state.angular_pitch() ? +1 : -1;
  return decide_core(state, l_primary, l_secondary, candidate);
}

AnnulusState apply_swap(const AnnulusState& state, const SwapDecision& decision) {
  if (!decision.swap) return state;
  if (decision.shift_delta != 1 && decision.shift_delta != -1)
    throw InvalidArgument("swap decision must carry a shift delta of +1 or -1");
  AnnulusState next = state;
  next.shift += decision.shift_delta;
  return next;
}

std::vector<AnnulusQuad> sliding_quads_for_shift(const Annulus& annulus, std::int64_t shift) {
  const std::int64_t n = annulus.n_quads;
  std::vector<AnnulusQuad> quads;
  quads.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    AnnulusQuad q;
    q.n1 = annulus.mid_ring[static_cast<std::size_t>(wrap_index(i + 1, n))];
    q.n2 = annulus.mid_ring[static_cast<std::size_t>(i)];
    q.n3 = annulus.outer_ring.seq[static_cast<std::size_t>(wrap_index(i + shift, n))];
    q.n4 = annulus.outer_ring.seq[static_cast<std::size_t>(wrap_index(i + shift + 1, n))];
    q.layer = Layer::Sliding;
    quads.push_back(q);
  }
  return quads;
}

void apply_swap_to_mesh(SpatialMesh& mesh, const SwapDecision& decision) {
  if (!decision.swap) return;
  if (!mesh.annulus) throw InvalidArgument("mesh has no annulus");
  Annulus& ann = *mesh.annulus;
  const std::int64_t new_shift = ann.sliding_shift + decision.shift_delta;
  const std::vector<AnnulusQuad> fresh = sliding_quads_for_shift(ann, new_shift);

  for (const AnnulusQuad& q : fresh) {
    const Vec2 a = mesh.position(q.n1), b = mesh.position(q.n2), c = mesh.position(q.n3),
               d = mesh.position(q.n4);
    if (triangle_signed_area(a, b, d) <= 0.0 || triangle_signed_area(b, c, d) <= 0.0)
      throw ConformityError(
          "edge swap would create a non-positive triangle; the per-slab rotation "
          "bound was violated upstream");
  }

  std::size_t k = 0;
  for (AnnulusQuad& q : mesh.quads)
    if (q.layer == Layer::Sliding) q = fresh[k++];
  if (k != fresh.size())
    throw ConformityError("mesh sliding-quad count does not match its annulus");
  ann.sliding_shift = new_shift;
}

}  // namespace slabforge
