#include "slabforge/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "slabforge/error.hpp"
#include "slabforge/log.hpp"

namespace slabforge {

void FluidParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw InvalidArgument("fluid density must be positive and finite");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw InvalidArgument("fluid kinematic viscosity must be positive and finite");
  }
}

namespace {

struct GaussRule {
  int n = 0;
  std::array<double, 5> x{};  // nodes on [-1, 1]
  std::array<double, 5> w{};
};

GaussRule gauss_rule(int q) {
  GaussRule r;
  r.n = q;
  switch (q) {
    case 1:
      r.x = {0.0};
      r.w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      r.x = {-a, a};
      r.w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      r.x = {-a, 0.0, a};
      r.w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double s = std::sqrt(6.0 / 5.0);
      const double a = std::sqrt((3.0 - 2.0 * s) / 7.0);
      const double b = std::sqrt((3.0 + 2.0 * s) / 7.0);
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      r.x = {-b, -a, a, b};
      r.w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double s = std::sqrt(10.0 / 7.0);
      const double a = std::sqrt(5.0 - 2.0 * s) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * s) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      r.x = {-b, -a, 0.0, a, b};
      r.w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw InvalidArgument("gauss_points must be between 1 and 5");
  }
  return r;
}

/// rho * (p I - 2 nu eps) n
Vec2 traction(const FluidParams& fluid, const BoundaryStress& s, Vec2 n) {
  const double txx = s.p - 2.0 * fluid.nu * s.eps.xx;
  const double tyy = s.p - 2.0 * fluid.nu * s.eps.yy;
  const double txy = -2.0 * fluid.nu * s.eps.xy;
  return Vec2{fluid.rho * (txx * n.x + txy * n.y), fluid.rho * (txy * n.x + tyy * n.y)};
}

}  // namespace

ForceMoment compute_force_moment(const std::vector<BoundarySegment>& loop,
                                 const StressField& stress, double time,
                                 const FluidParams& fluid, Vec2 center, int gauss_points) {
  fluid.validate();
  if (!stress) throw InvalidArgument("stress field callback is empty");
  if (loop.empty()) throw InvalidArgument("boundary loop is empty");
  const GaussRule rule = gauss_rule(gauss_points);

  double perimeter = 0.0;
  for (const BoundarySegment& seg : loop) {
    const double len = dist(seg.a, seg.b);
    if (!(len > 0.0)) throw InvalidArgument("boundary loop contains a degenerate segment");
    perimeter += len;
  }
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 end = loop[i].b;
    const Vec2 next = loop[(i + 1) % loop.size()].a;
    if (dist(end, next) > 1e-12 * perimeter) {
      throw InvalidArgument("boundary loop is not closed: segment " + std::to_string(i) +
                            " does not meet its successor");
    }
  }

  ForceMoment total;
  for (const BoundarySegment& seg : loop) {
    const Vec2 tangent{seg.b.x - seg.a.x, seg.b.y - seg.a.y};
    const double len = norm(tangent);
    // Outward normal for a counterclockwise body loop (interior to the left).
    const Vec2 n{tangent.y / len, -tangent.x / len};
    for (int g = 0; g < rule.n; ++g) {
      const double lambda = 0.5 * (rule.x[static_cast<std::size_t>(g)] + 1.0);
      const Vec2 p{seg.a.x + lambda * tangent.x, seg.a.y + lambda * tangent.y};
      const double ds = rule.w[static_cast<std::size_t>(g)] * 0.5 * len;
      const Vec2 tr = traction(fluid, stress(p, time), n);
      total.F.x += ds * tr.x;
      total.F.y += ds * tr.y;
      const Vec2 dx{p.x - center.x, p.y - center.y};
      total.M += ds * cross(dx, tr);
    }
  }
  return total;
}

namespace {

class ZeroProvider final : public ForceProvider {
 public:
  ForceMoment evaluate(const ProviderInput&) override { return {}; }
  std::string name() const override { return "zero"; }
};

class ConstantProvider final : public ForceProvider {
 public:
  ConstantProvider(Vec2 force, double moment) : value_{force, moment} {}
  ForceMoment evaluate(const ProviderInput&) override { return value_; }
  std::string name() const override { return "constant"; }

 private:
  ForceMoment value_;
};

class SineProvider final : public ForceProvider {
 public:
  SineProvider(double amplitude_fy, double amplitude_m, double omega)
      : amplitude_fy_(amplitude_fy), amplitude_m_(amplitude_m), omega_(omega) {}
  ForceMoment evaluate(const ProviderInput& input) override {
    const double s = std::sin(omega_ * input.t);
    return ForceMoment{Vec2{0.0, amplitude_fy_ * s}, amplitude_m_ * s};
  }
  std::string name() const override { return "sine"; }

 private:
  double amplitude_fy_, amplitude_m_, omega_;
};

class LinearProvider final : public ForceProvider {
 public:
  LinearProvider(double k_d, double k_ddot, double k_theta, double k_thetadot)
      : k_d_(k_d), k_ddot_(k_ddot), k_theta_(k_theta), k_thetadot_(k_thetadot) {}
  ForceMoment evaluate(const ProviderInput& input) override {
    return ForceMoment{Vec2{0.0, -(k_d_ * input.d + k_ddot_ * input.ddot)},
                       -(k_theta_ * input.theta + k_thetadot_ * input.thetadot)};
  }
  std::string name() const override { return "linear"; }

 private:
  double k_d_, k_ddot_, k_theta_, k_thetadot_;
};

double interp_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double f = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + f * (ys[j] - ys[j - 1]);
}

class QuasiSteadyProvider final : public ForceProvider {
 public:
  QuasiSteadyProvider(QuasiSteadyTable table, double rho, double u_ref, double body_height)
      : table_(std::move(table)), rho_(rho), u_ref_(u_ref), h_(body_height) {
    if (table_.alpha.size() < 2 || table_.alpha.size() != table_.cy.size() ||
        table_.alpha.size() != table_.cm.size()) {
      throw InvalidArgument("quasi-steady table needs matching alpha/cy/cm columns, length >= 2");
    }
    for (std::size_t i = 1; i < table_.alpha.size(); ++i) {
      if (!(table_.alpha[i] > table_.alpha[i - 1])) {
        throw InvalidArgument("quasi-steady table alpha column must be strictly increasing");
      }
    }
    if (!(rho_ > 0.0) || !(u_ref_ > 0.0) || !(h_ > 0.0)) {
      throw InvalidArgument("quasi-steady model needs positive rho, u_ref, and body height");
    }
  }

  ForceMoment evaluate(const ProviderInput& input) override {
    const double alpha = input.theta - std::atan2(input.ddot, u_ref_);
    const double q = 0.5 * rho_ * u_ref_ * u_ref_;
    const double cy = interp_table(table_.alpha, table_.cy, alpha);
    const double cm = interp_table(table_.alpha, table_.cm, alpha);
    return ForceMoment{Vec2{0.0, q * h_ * cy}, q * h_ * h_ * cm};
  }
  std::string name() const override { return "quasi_steady"; }

 private:
  QuasiSteadyTable table_;
  double rho_, u_ref_, h_;
};

class PressureFieldProvider final : public ForceProvider {
 public:
  PressureFieldProvider(FluidParams fluid, double c0, double cx, double cy, SymTensor2 eps,
                        int gauss_points)
      : fluid_(fluid), c0_(c0), cx_(cx), cy_(cy), eps_(eps), gauss_points_(gauss_points) {
    fluid_.validate();
  }

  ForceMoment evaluate(const ProviderInput& input) override {
    if (input.body == nullptr || input.body->empty()) {
      throw InvalidArgument("pressure-field provider needs the body boundary polyline");
    }
    const auto field = [this](Vec2 p, double) {
      return BoundaryStress{c0_ + cx_ * p.x + cy_ * p.y, eps_};
    };
    return compute_force_moment(*input.body, field, input.t, fluid_, input.body_center,
                                gauss_points_);
  }
  std::string name() const override { return "pressure_field"; }

 private:
  FluidParams fluid_;
  double c0_, cx_, cy_;
  SymTensor2 eps_;
  int gauss_points_;
};

}  // namespace

std::unique_ptr<ForceProvider> make_zero_provider() { return std::make_unique<ZeroProvider>(); }

std::unique_ptr<ForceProvider> make_constant_provider(Vec2 force, double moment) {
  return std::make_unique<ConstantProvider>(force, moment);
}

std::unique_ptr<ForceProvider> make_sine_provider(double amplitude_fy, double amplitude_m,
                                                  double omega) {
  return std::make_unique<SineProvider>(amplitude_fy, amplitude_m, omega);
}

std::unique_ptr<ForceProvider> make_linear_provider(double k_d, double k_ddot, double k_theta,
                                                    double k_thetadot) {
  return std::make_unique<LinearProvider>(k_d, k_ddot, k_theta, k_thetadot);
}

std::unique_ptr<ForceProvider> make_quasi_steady_provider(QuasiSteadyTable table, double rho,
                                                          double u_ref, double body_height) {
  return std::make_unique<QuasiSteadyProvider>(std::move(table), rho, u_ref, body_height);
}

std::unique_ptr<ForceProvider> make_pressure_field_provider(FluidParams fluid, double c0,
                                                            double cx, double cy, SymTensor2 eps,
                                                            int gauss_points) {
  return std::make_unique<PressureFieldProvider>(fluid, c0, cx, cy, eps, gauss_points);
}

std::int64_t CouplingConfig::step_count() const {
  const double span = t_end - t_start;
  if (!(span > 0.0)) throw InvalidArgument("time span must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const std::int64_t n = std::llround(span / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - span) > 1e-9 * span) {
    throw InvalidArgument("time step does not divide the time span into whole slabs");
  }
  return n;
}

std::vector<BoundarySegment> body_segments(const SpatialMesh& mesh) {
  if (mesh.body_loop.empty()) throw InvalidArgument("mesh has no body boundary loop");
  std::vector<BoundarySegment> segs;
  const std::size_t n = mesh.body_loop.size();
  segs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    segs.push_back(BoundarySegment{mesh.position(mesh.body_loop[i]),
                                   mesh.position(mesh.body_loop[(i + 1) % n])});
  }
  return segs;
}

Simulation::Simulation(SpatialMesh initial_mesh, CouplingConfig config,
                       std::unique_ptr<ForceProvider> provider)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      motion_(ReferenceMotion::build(initial_mesh, config_.boxes)) {
  if (!provider_) throw InvalidArgument("force provider must not be null");
  (void)config_.step_count();  // validates the time grid
  if (!(config_.delta_rb > 0.0)) throw InvalidArgument("delta_rb must be positive");
  if (config_.max_outer_iters < 1) throw InvalidArgument("max_outer_iters must be >= 1");
  config_.fluid.validate();
  for (const DofConfig* dof : {&config_.heave, &config_.pitch}) {
    if (dof->active) {
      dof->params.validate();
    } else if (dof->initial_rate != 0.0) {
      throw InvalidArgument("inactive degree of freedom cannot have a nonzero initial rate");
    }
  }
  if (config_.heave.active && !config_.boxes) {
    throw InvalidArgument("translation requires blend boxes");
  }

  const ValidationReport report = validate_spatial_mesh(initial_mesh);
  if (!report.ok()) {
    throw ConformityError("initial mesh failed validation: " + report.to_string());
  }

  const std::int64_t n_verts = initial_mesh.vertex_count();
  if (config_.pitch.active) {
    bool any_rotating = false;
    for (VertexId i = 0; i < n_verts; ++i) any_rotating = any_rotating || motion_.rotates(i);
    if (!any_rotating) {
      throw InvalidArgument("pitch is active but the mesh has no rotating vertices");
    }
    for (VertexId v : initial_mesh.body_loop) {
      if (!motion_.rotates(v)) {
        throw InvalidArgument("pitch is active but part of the body boundary does not rotate");
      }
    }
    if (config_.heave.active && motion_.min_rotating_weight() != 1.0) {
      throw InvalidArgument(
          "combined rotation and translation require the whole rotating group strictly inside "
          "the inner blend box");
    }
  }
  if (config_.heave.active) {
    for (VertexId v : initial_mesh.body_loop) {
      if (motion_.weight(v) != 1.0) {
        throw InvalidArgument("heave is active but part of the body boundary has blend weight < 1");
      }
    }
  }

  mesh_ = std::move(initial_mesh);
  if (mesh_.annulus) {
    annulus_ = AnnulusState{mesh_.annulus->n_quads, mesh_.annulus->sliding_shift, 0.0};
  }
  d0_ = config_.heave.initial_value;
  theta0_ = config_.pitch.initial_value;

  const std::vector<BoundarySegment> body = body_segments(mesh_);
  ProviderInput input{config_.t_start,
                      config_.heave.initial_value,
                      config_.heave.initial_rate,
                      config_.pitch.initial_value,
                      config_.pitch.initial_rate,
                      &mesh_,
                      &body,
                      mesh_.rotation_center};
  load_ = provider_->evaluate(input);

  const auto initial_state = [this](const DofConfig& dof, double load_component) {
    if (!dof.active) {
      return DofState{dof.initial_value, 0.0, dof.initial_value, 0.0};
    }
    return with_first_order_history(dof.params, dof.initial_value, dof.initial_rate,
                                    load_component, config_.dt);
  };
  heave_ = initial_state(config_.heave, load_.F.y);
  pitch_ = initial_state(config_.pitch, load_.M);
  log_info("simulation initialized: provider=" + provider_->name() +
           " steps=" + std::to_string(config_.step_count()));
}

double Simulation::time() const {
  return config_.t_start + static_cast<double>(steps_done_) * config_.dt;
}

const SpaceTimeSlab& Simulation::last_slab() const {
  if (!last_slab_) throw InvalidArgument("no slab has been built yet");
  return *last_slab_;
}

SpatialMesh Simulation::build_mesh_at(double d, double theta, std::int64_t id_offset) const {
  SpatialMesh top = mesh_;
  motion_.reposition(top, theta - theta0_, d - d0_);
  top.id_offset = id_offset;
  return top;
}

StepRecord Simulation::step() {
  if (steps_done_ >= config_.step_count())
    throw InvalidArgument("simulation already reached t_end");
  const double dt = config_.dt;
  const double t_now = time();
  const double t_next = config_.t_start + static_cast<double>(steps_done_ + 1) * dt;
  const std::int64_t top_offset = mesh_.id_offset + mesh_.vertex_count();

  // Forward predictor from the previous slab's converged load.
  std::pair<double, double> heave_it{heave_.value, heave_.rate};
  std::pair<double, double> pitch_it{pitch_.value, pitch_.rate};
  if (config_.heave.active) heave_it = predictor(config_.heave.params, heave_, load_.F.y, dt);
  if (config_.pitch.active) pitch_it = predictor(config_.pitch.params, pitch_, load_.M, dt);

  const double theta_bottom = pitch_.value;
  const auto build_top = [&](double d, double theta, SwapDecision* decision_out) {
    if (annulus_) {
      const double pitch_angle = annulus_->angular_pitch();
      if (std::abs(theta - theta_bottom) > 0.5 * pitch_angle) {
        throw MotionRejected("per-slab rotation " + std::to_string(theta - theta_bottom) +
                             " exceeds half the sliding-layer pitch " +
                             std::to_string(pitch_angle));
      }
    }
    SpatialMesh top = build_mesh_at(d, theta, top_offset);
    SwapDecision decision;
    if (annulus_) {
      AnnulusState state = *annulus_;
      state.accumulated_rotation = theta - theta0_;
      const RepresentativeDiagonals diags = representative_diagonals(top, state);
      decision = decide_swap(state, diags);
      if (decision.swap) apply_swap_to_mesh(top, decision);
    }
    if (decision_out != nullptr) *decision_out = decision;
    return top;
  };

  bool converged = false;
  int outer_iters = 0;
  for (int l = 1; l <= config_.max_outer_iters; ++l) {
    outer_iters = l;
    SwapDecision decision;
    const SpatialMesh top = build_top(heave_it.first, pitch_it.first, &decision);
    const SpaceTimeSlab slab = extrude_slab(mesh_, top, decision, t_now, t_next, &cache_, nullptr);
    (void)slab;  // the flow stand-in samples only the spatial boundary

    const std::vector<BoundarySegment> body = body_segments(top);
    ProviderInput input{t_next,          heave_it.first, heave_it.second, pitch_it.first,
                        pitch_it.second, &top,           &body,           top.rotation_center};
    const ForceMoment load = provider_->evaluate(input);

    double worst = 0.0;
    if (config_.heave.active) {
      const auto next = corrector(config_.heave.params, heave_, heave_it, load.F.y, dt);
      worst = std::max(worst, std::hypot(next.first - heave_it.first,
                                         next.second - heave_it.second));
      heave_it = next;
    }
    if (config_.pitch.active) {
      const auto next = corrector(config_.pitch.params, pitch_, pitch_it, load.M, dt);
      worst = std::max(worst, std::hypot(next.first - pitch_it.first,
                                         next.second - pitch_it.second));
      pitch_it = next;
    }
    if (worst < config_.delta_rb) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("staggered coupling did not converge in " +
                           std::to_string(config_.max_outer_iters) + " outer iterations at t=" +
                           std::to_string(t_next));
  }

  // Rebuild mesh and slab from the converged state so the stored geometry is
  // exactly the motion map applied to the converged unknowns.
  SwapDecision decision;
  SpatialMesh top = build_top(heave_it.first, pitch_it.first, &decision);
  SpaceTimeSlab slab = extrude_slab(mesh_, top, decision, t_now, t_next, &cache_, &stats_);
  if (config_.validate_each_slab) {
    const ConformityReport report = validate_slab(slab, &mesh_, &top);
    if (!report.ok()) {
      throw ConformityError("slab failed validation at t=" + std::to_string(t_next) + ": " +
                            report.to_string());
    }
  }

  const std::vector<BoundarySegment> body = body_segments(top);
  ProviderInput input{t_next,          heave_it.first, heave_it.second, pitch_it.first,
                      pitch_it.second, &top,           &body,           top.rotation_center};
  load_ = provider_->evaluate(input);

  if (config_.heave.active) {
    heave_ = DofState{heave_it.first, heave_it.second, heave_.value, heave_.rate};
  }
  if (config_.pitch.active) {
    pitch_ = DofState{pitch_it.first, pitch_it.second, pitch_.value, pitch_.rate};
  }
  if (annulus_) {
    annulus_->accumulated_rotation = pitch_it.first - theta0_;
    *annulus_ = apply_swap(*annulus_, decision);
  }
  mesh_ = std::move(top);
  last_slab_ = std::move(slab);
  ++steps_done_;

  StepRecord rec;
  rec.index = steps_done_;
  rec.t = t_next;
  rec.d = heave_it.first;
  rec.ddot = heave_it.second;
  rec.theta = pitch_it.first;
  rec.thetadot = pitch_it.second;
  rec.Fy = load_.F.y;
  rec.M = load_.M;
  rec.outer_iters = outer_iters;
  rec.swapped = decision.swap;
  if (decision.swap) {
    log_debug("slab " + std::to_string(rec.index) + ": sliding swap " +
              std::string(to_string(decision.direction)));
  }
  return rec;
}

std::vector<StepRecord> run_simulation(
    Simulation& sim, std::int64_t n_steps,
    const std::function<void(const StepRecord&, const Simulation&)>& on_step) {
  if (n_steps < 0) n_steps = sim.config().step_count() - sim.steps_done();
  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(n_steps));
  for (std::int64_t i = 0; i < n_steps; ++i) {
    records.push_back(sim.step());
    if (on_step) on_step(records.back(), sim);
  }
  return records;
}

}  // namespace slabforge
