#pragma once

#include <utility>

#include "slabforge/geometry.hpp"

namespace slabforge {

/// Force per unit length and moment about the body center.
struct ForceMoment {
  Vec2 F{0.0, 0.0};
  double M = 0.0;
};

/// One spring-damper degree of freedom: inertia * a + damping * v +
/// stiffness * x = load. Covers vertical translation (m, c_y, k_y, F_y) and
/// rotation (I_theta, c_theta, k_theta, M) identically.
struct DofParams {
  double inertia = 1.0;
  double damping = 0.0;
  double stiffness = 0.0;

  void validate() const;  // inertia > 0, damping >= 0, stiffness >= 0
  double undamped_frequency() const;  // sqrt(stiffness/inertia) / (2 pi)
};

/// Displacement/velocity pair at t^n plus the t^{n-1} history the two-step
/// corrector needs.
struct DofState {
  double value = 0.0;
  double rate = 0.0;
  double prev_value = 0.0;
  double prev_rate = 0.0;
};

/// History backfill for the first step: invents a consistent t^{-1} level via
/// one backward Euler step on the full (value, rate) state, so the two-step
/// corrector applies unchanged from the first slab. Backing the rate up by the
/// initial acceleration keeps the invented level's error O(dt^2), which the
/// scheme's second order absorbs; dropping that term would inject a persistent
/// O(dt) rate error.
DofState with_first_order_history(const DofParams& params, double value, double rate,
                                  double load, double dt);

/// Forward-Euler predictor: explicit first guess for (value, rate) at t^{n+1}
/// from the state and load at t^n.
std::pair<double, double> predictor(const DofParams& params, const DofState& state,
                                    double load_now, double dt);

/// One two-step backward-difference corrector application: maps iterate l-1 to
/// iterate l using the load at t^{n+1}.
std::pair<double, double> corrector(const DofParams& params, const DofState& state,
                                    std::pair<double, double> iterate, double load_next,
                                    double dt);

/// Residual of the implicit two-step system at a candidate (value, rate):
/// zero exactly at the corrector's fixed point.
double bdf2_residual(const DofParams& params, const DofState& state,
                     std::pair<double, double> candidate, double load_next, double dt);

/// Direct linear solve of the implicit two-step system (the corrector's exact
/// fixed point); used as an oracle and by the equivalence tests.
std::pair<double, double> solve_bdf2_step(const DofParams& params, const DofState& state,
                                          double load_next, double dt);

struct IntegrateResult {
  DofState state;          // converged state at t^{n+1} (history shifted)
  int iterations = 0;      // corrector applications performed
  double update_norm = 0;  // last iterate-to-iterate update
  double residual = 0;     // implicit-system residual of the returned state
};

/// Predictor followed by corrector iterations until the update norm
/// sqrt(dvalue^2 + drate^2) drops below delta_rb. Throws ConvergenceError
/// when max_iters corrector applications do not reach the tolerance.
IntegrateResult integrate_dof(const DofParams& params, const DofState& state, double load_now,
                              double load_next, double dt, double delta_rb, int max_iters = 100);

/// Rigid surface velocity at offset dx from the center of gravity, for a body
/// translating vertically at ddot and spinning at thetadot.
Vec2 body_surface_velocity(double ddot, double thetadot, Vec2 dx);

}  // namespace slabforge
