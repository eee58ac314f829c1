#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slabforge/extrude.hpp"
#include "slabforge/mesh.hpp"
#include "slabforge/motion.hpp"
#include "slabforge/rigid_body.hpp"
#include "slabforge/sliding.hpp"

namespace slabforge {

struct FluidParams {
  double rho = 1.0;
  double nu = 1.0;
  void validate() const;  // rho > 0, nu > 0
};

struct SymTensor2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;  // symmetric strain-rate tensor
};

/// Pressure and strain rate sampled at one boundary point.
struct BoundaryStress {
  double p = 0.0;
  SymTensor2 eps;
};

/// Pointwise stress sample on the body boundary: (position, time) -> stress.
using StressField = std::function<BoundaryStress(Vec2, double)>;

/// Directed boundary segment; the body interior lies to the left, so a
/// counterclockwise loop has outward normals (tangent.y, -tangent.x).
struct BoundarySegment {
  Vec2 a, b;
};

/// Traction integral over a closed body boundary: F is the loop integral of
/// rho (p I - 2 nu eps) n ds with n outward from the body, M the matching
/// moment of the traction about `center`. Gauss-Legendre quadrature with
/// `gauss_points` nodes per segment (1..5), exact for polynomial integrands of
/// degree 2q-1 along each segment. Throws on an open loop.
ForceMoment compute_force_moment(const std::vector<BoundarySegment>& loop,
                                 const StressField& stress, double time,
                                 const FluidParams& fluid, Vec2 center, int gauss_points = 3);

/// Everything a force provider may see: the slab-end time, the rigid-body
/// iterate, and the mesh/body geometry positioned at that iterate.
struct ProviderInput {
  double t = 0.0;
  double d = 0.0, ddot = 0.0;
  double theta = 0.0, thetadot = 0.0;
  const SpatialMesh* mesh = nullptr;
  const std::vector<BoundarySegment>* body = nullptr;
  Vec2 body_center{0.0, 0.0};
};

/// Stand-in for the flow solve: deterministically maps the coupling iterate to
/// a force and moment on the body.
class ForceProvider {
 public:
  virtual ~ForceProvider() = default;
  virtual ForceMoment evaluate(const ProviderInput& input) = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<ForceProvider> make_zero_provider();
std::unique_ptr<ForceProvider> make_constant_provider(Vec2 force, double moment);
/// F_y = amplitude_fy * sin(omega t), M = amplitude_m * sin(omega t).
std::unique_ptr<ForceProvider> make_sine_provider(double amplitude_fy, double amplitude_m,
                                                  double omega);
/// Linear surrogate: F_y = -(k_d d + k_ddot ddot), M = -(k_theta theta +
/// k_thetadot thetadot).
std::unique_ptr<ForceProvider> make_linear_provider(double k_d, double k_ddot, double k_theta,
                                                    double k_thetadot);
/// Quasi-steady galloping model: effective angle alpha = theta -
/// atan2(ddot, u_ref); piecewise-linear coefficient tables give F_y =
/// 0.5 rho u_ref^2 h Cy(alpha) and M = 0.5 rho u_ref^2 h^2 Cm(alpha).
struct QuasiSteadyTable {
  std::vector<double> alpha;  // strictly increasing
  std::vector<double> cy;
  std::vector<double> cm;
};
std::unique_ptr<ForceProvider> make_quasi_steady_provider(QuasiSteadyTable table, double rho,
                                                          double u_ref, double body_height);
/// Analytic stress field p = c0 + cx x + cy y with a constant strain rate,
/// integrated over the body boundary; exercises the traction quadrature.
std::unique_ptr<ForceProvider> make_pressure_field_provider(FluidParams fluid, double c0,
                                                            double cx, double cy,
                                                            SymTensor2 eps,
                                                            int gauss_points = 3);

struct DofConfig {
  bool active = false;
  DofParams params;
  double initial_value = 0.0;
  double initial_rate = 0.0;
};

struct CouplingConfig {
  double t_start = 0.0;
  double t_end = 1.0;
  double dt = 0.1;
  double delta_rb = 1e-5;
  int max_outer_iters = 50;
  FluidParams fluid;
  std::optional<BlendBoxes> boxes;  // required when heave is active
  DofConfig heave;  // vertical translation (d)
  DofConfig pitch;  // rotation (theta)
  bool validate_each_slab = true;

  std::int64_t step_count() const;  // uniform grid; throws if dt does not divide the span
};

struct StepRecord {
  std::int64_t index = 0;  // slab index, 1-based end time t_start + index*dt
  double t = 0.0;
  double d = 0.0, ddot = 0.0;
  double theta = 0.0, thetadot = 0.0;
  double Fy = 0.0, M = 0.0;
  int outer_iters = 0;
  bool swapped = false;
};

/// Drives the staggered per-slab loop: forward predictor from the previous
/// slab's converged load, then alternate (mesh update at the iterate, swap
/// decision, extrusion, provider evaluation, one corrector application per
/// active degree of freedom) until both update norms pass delta_rb; the slab
/// and mesh are finally rebuilt from the converged state so that stored
/// geometry reproduces the motion map bitwise.
class Simulation {
 public:
  Simulation(SpatialMesh initial_mesh, CouplingConfig config,
             std::unique_ptr<ForceProvider> provider);

  /// Advance one slab; throws InvalidArgument once t_end has been reached.
  StepRecord step();

  const SpatialMesh& current_mesh() const { return mesh_; }
  const SpaceTimeSlab& last_slab() const;
  const CouplingConfig& config() const { return config_; }
  std::int64_t steps_done() const { return steps_done_; }
  double time() const;
  const ExtrudeStats& stats() const { return stats_; }
  const DofState& heave_state() const { return heave_; }
  const DofState& pitch_state() const { return pitch_; }

 private:
  SpatialMesh build_mesh_at(double d, double theta, std::int64_t id_offset) const;

  CouplingConfig config_;
  std::unique_ptr<ForceProvider> provider_;
  ReferenceMotion motion_;
  SpatialMesh mesh_;  // current committed mesh at time()
  std::optional<AnnulusState> annulus_;
  DofState heave_, pitch_;
  ForceMoment load_;  // converged load at the current time level
  double d0_ = 0.0, theta0_ = 0.0;
  std::int64_t steps_done_ = 0;
  std::optional<SpaceTimeSlab> last_slab_;
  BlockCache cache_;
  ExtrudeStats stats_;
};

/// Run `n_steps` slabs (default: whatever remains of the config's grid),
/// invoking `on_step` after each accepted slab. Returns all step records.
std::vector<StepRecord> run_simulation(
    Simulation& sim, std::int64_t n_steps = -1,
    const std::function<void(const StepRecord&, const Simulation&)>& on_step = {});

/// Body boundary polyline of a mesh, as directed segments in loop order.
/// Throws InvalidArgument when the mesh records no body boundary.
std::vector<BoundarySegment> body_segments(const SpatialMesh& mesh);

}  // namespace slabforge
