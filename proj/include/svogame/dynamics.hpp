#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "svogame/types.hpp"

namespace svogame {

// Discrete-time double integrator: p' = p + dt v + dt^2/2 a, v' = v + dt a.
inline VehicleState step(const VehicleState& x, const Control& u, double dt) {
  return VehicleState{x.position + dt * x.speed + 0.5 * dt * dt * u.acceleration,
                      x.speed + dt * u.acceleration};
}

// States at steps k+1..k+H; the initial state is not included.
inline std::vector<VehicleState> rollout(const VehicleState& x0, const ControlSequence& seq,
                                         double dt) {
  if (seq.empty()) throw std::invalid_argument("rollout: control sequence is empty");
  std::vector<VehicleState> states;
  states.reserve(seq.size());
  VehicleState x = x0;
  for (const Control& u : seq) {
    x = step(x, u, dt);
    states.push_back(x);
  }
  return states;
}

namespace detail {

inline ControlSequence to_sequence(const double* z, std::size_t h) {
  ControlSequence seq(h);
  for (std::size_t k = 0; k < h; ++k) seq[k] = Control{z[k]};
  return seq;
}

}  // namespace detail

// x' = A x + B u with A = [[1, dt], [0, 1]], B = [dt^2/2, dt].
struct StateJacobians {
  std::array<std::array<double, 2>, 2> a;
  std::array<double, 2> b;
};

inline StateJacobians state_jacobians(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("state_jacobians: dt must be positive");
  return StateJacobians{{{{1.0, dt}, {0.0, 1.0}}}, {0.5 * dt * dt, dt}};
}

/// Whether both next states match one dynamics step from the start states.
inline bool segment_consistent(const TrajectorySegment& seg, double dt, double tol = 1e-9) {
  auto close = [tol](const VehicleState& a, const VehicleState& b) {
    const double sp = std::abs(a.position - b.position);
    const double sv = std::abs(a.speed - b.speed);
    return sp <= tol * std::max(1.0, std::abs(b.position)) &&
           sv <= tol * std::max(1.0, std::abs(b.speed));
  };
  return close(seg.x1_next, step(seg.x1, seg.u1, dt)) &&
         close(seg.x2_next, step(seg.x2, seg.u2, dt));
}

}  // namespace svogame
