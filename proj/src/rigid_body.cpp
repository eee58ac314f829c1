#include "slabforge/rigid_body.hpp"

#include <cmath>
#include <string>

#include "slabforge/error.hpp"

namespace slabforge {

namespace {
constexpr double kTau = 6.283185307179586476925286766559;  // 2*pi
}

void DofParams::validate() const {
  if (!(inertia > 0.0)) throw InvalidArgument("degree-of-freedom inertia must be positive");
  if (damping < 0.0 || stiffness < 0.0)
    throw InvalidArgument("damping and stiffness must be non-negative");
}

double DofParams::undamped_frequency() const { return std::sqrt(stiffness / inertia) / kTau; }

DofState with_first_order_history(const DofParams& params, double value, double rate,
                                  double load, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const double accel = (load - params.stiffness * value - params.damping * rate) / params.inertia;
  DofState s;
  s.value = value;
  s.rate = rate;
  s.prev_value = value - dt * rate;
  s.prev_rate = rate - dt * accel;
  return s;
}

std::pair<double, double> predictor(const DofParams& params, const DofState& state,
                                    double load_now, double dt) {
  const double accel =
      (-params.stiffness * state.value - params.damping * state.rate + load_now) / params.inertia;
  return {dt * state.rate + state.value, dt * accel + state.rate};
}

std::pair<double, double> corrector(const DofParams& params, const DofState& state,
                                    std::pair<double, double> iterate, double load_next,
                                    double dt) {
  const auto [value_prev_iter, rate_prev_iter] = iterate;
  const double value_next = (2.0 / 3.0) * dt * rate_prev_iter + (4.0 / 3.0) * state.value -
                            (1.0 / 3.0) * state.prev_value;
  const double accel = (-params.stiffness * value_prev_iter - params.damping * rate_prev_iter +
                        load_next) /
                       params.inertia;
  const double rate_next = (2.0 / 3.0) * dt * accel + (4.0 / 3.0) * state.rate -
                           (1.0 / 3.0) * state.prev_rate;
  return {value_next, rate_next};
}

double bdf2_residual(const DofParams& params, const DofState& state,
                     std::pair<double, double> candidate, double load_next, double dt) {
  const auto [d, b] = candidate;
  const double rd = d - (2.0 / 3.0) * dt * b - (4.0 / 3.0) * state.value +
                    (1.0 / 3.0) * state.prev_value;
  const double accel =
      (-params.stiffness * d - params.damping * b + load_next) / params.inertia;
  const double rb = b - (2.0 / 3.0) * dt * accel - (4.0 / 3.0) * state.rate +
                    (1.0 / 3.0) * state.prev_rate;
  return std::sqrt(rd * rd + rb * rb);
}

std::pair<double, double> solve_bdf2_step(const DofParams& params, const DofState& state,
                                          double load_next, double dt) {
  const double alpha = 2.0 * dt / 3.0;
  const double ad = (4.0 / 3.0) * state.value - (1.0 / 3.0) * state.prev_value;
  const double ab = (4.0 / 3.0) * state.rate - (1.0 / 3.0) * state.prev_rate;
  const double denom =
      1.0 + (alpha * params.damping + alpha * alpha * params.stiffness) / params.inertia;
  const double b = (ab + (alpha / params.inertia) * (load_next - params.stiffness * ad)) / denom;
  const double d = alpha * b + ad;
  return {d, b};
}

IntegrateResult integrate_dof(const DofParams& params, const DofState& state, double load_now,
                              double load_next, double dt, double delta_rb, int max_iters) {
  params.validate();
  if (!(delta_rb > 0.0)) throw InvalidArgument("rigid-body tolerance must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");

  std::pair<double, double> iterate = predictor(params, state, load_now, dt);
  double update = 0.0;
  for (int l = 1; l <= max_iters; ++l) {
    const std::pair<double, double> next = corrector(params, state, iterate, load_next, dt);
    update = std::hypot(next.first - iterate.first, next.second - iterate.second);
    iterate = next;
    if (update < delta_rb) {
      IntegrateResult res;
      res.state.value = iterate.first;
      res.state.rate = iterate.second;
      res.state.prev_value = state.value;
      res.state.prev_rate = state.rate;
      res.iterations = l;
      res.update_norm = update;
      res.residual = bdf2_residual(params, state, iterate, load_next, dt);
      return res;
    }
  }
  throw ConvergenceError("rigid-body corrector did not converge in " +
                         std::to_string(max_iters) + " iterations (last update " +
                         std::to_string(update) + ", residual " +
                         std::to_string(bdf2_residual(params, state, iterate, load_next, dt)) +
                         ")");
}

Vec2 body_surface_velocity(double ddot, double thetadot, Vec2 dx) {
  return Vec2{-thetadot * dx.y, ddot + thetadot * dx.x};
}

}  // namespace slabforge
