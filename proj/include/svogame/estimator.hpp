#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "svogame/config.hpp"
#include "svogame/dynamics.hpp"
#include "svogame/objectives.hpp"
#include "svogame/optimize.hpp"
#include "svogame/types.hpp"

namespace svogame {

// Moving-horizon maximum-entropy IRL state for the HDV orientation estimate.
// psi is the unconstrained parameter with phi2 = (pi/2) * sigmoid(psi), so the
// estimate stays strictly inside (0, pi/2) regardless of update history.
struct EstimatorState {
  double psi{0.0};
  double eta{1.0};
  std::deque<TrajectorySegment> segment_buffer;
};

inline EstimatorState initialize(std::optional<double> phi2_init = std::nullopt,
                                 double eta = 1.0) {
  EstimatorState state;
  state.eta = eta;
  if (phi2_init) state.psi = psi_from_phi(*phi2_init);
  return state;
}

// Appends one observed transition; the oldest segment is evicted once the
// buffer exceeds the estimation horizon.
inline EstimatorState push_segment(EstimatorState state, const TrajectorySegment& seg,
                                   const ScenarioConfig& cfg) {
  if (!segment_consistent(seg, cfg.dt)) {
    throw std::invalid_argument("push_segment: segment violates the transition dynamics");
  }
  state.segment_buffer.push_back(seg);
  const auto capacity = static_cast<std::size_t>(cfg.estimation_horizon);
  while (state.segment_buffer.size() > capacity) state.segment_buffer.pop_front();
  return state;
}

inline FeatureVector empirical_features(const EstimatorState& state, const ScenarioConfig& cfg) {
  if (state.segment_buffer.empty()) {
    throw std::runtime_error("empirical_features: no segments collected");
  }
  FeatureVector sum{0.0, 0.0};
  for (const auto& seg : state.segment_buffer) {
    const FeatureVector f = features(seg, cfg);
    sum.ego += f.ego;
    sum.coop += f.coop;
  }
  const double n = static_cast<double>(state.segment_buffer.size());
  return FeatureVector{sum.ego / n, sum.coop / n};
}

namespace detail {

constexpr double kInnerAccelClamp = 50.0;  // never binds for physical scenarios

// One-step HDV action problem: minimize theta(phi2)^T f over the scalar
// acceleration, with the CAV's next state held fixed.
struct HdvStepProblem {
  VehicleState x1_next;
  VehicleState x2;
  double phi2{0.0};
  ScenarioConfig cfg;

  std::size_t size() const { return 1; }

  double value(const std::vector<double>& z) const {
    const VehicleState x2n = step(x2, Control{z[0]}, cfg.dt);
    return std::cos(phi2) * ego_cost_hdv(x2n, Control{z[0]}, cfg) +
           std::sin(phi2) * coop_cost(x1_next, x2n, cfg);
  }

  void gradient(const std::vector<double>& z, std::vector<double>& grad) const {
    const double dt = cfg.dt;
    const VehicleState x2n = step(x2, Control{z[0]}, dt);
    const double ego = 2.0 * cfg.w3 * z[0] + 2.0 * cfg.w4 * (x2n.speed - cfg.v_max) * dt;
    const double coop =
        coop_cost_dd(x1_next, x2n, cfg) * 2.0 * x2n.position * (0.5 * dt * dt);
    grad.assign(1, std::cos(phi2) * ego + std::sin(phi2) * coop);
  }

  void bounds(const std::vector<double>&, std::vector<double>& lo,
              std::vector<double>& hi) const {
    lo.assign(1, -kInnerAccelClamp);
    hi.assign(1, kInnerAccelClamp);
  }
};

}  // namespace detail

// Most-likely one-step HDV acceleration under orientation phi2: coarse grid to
// localize, then a projected-gradient polish.
inline double optimal_hdv_accel(const VehicleState& x1_next, const VehicleState& x2, double phi2,
                                const ScenarioConfig& cfg) {
  detail::HdvStepProblem problem{x1_next, x2, phi2, cfg};
  constexpr int kGridPoints = 201;
  double best_a = 0.0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<double> z(1);
  for (int i = 0; i < kGridPoints; ++i) {
    z[0] = -detail::kInnerAccelClamp +
           (2.0 * detail::kInnerAccelClamp * i) / (kGridPoints - 1);
    const double v = problem.value(z);
    if (v < best_v) {
      best_v = v;
      best_a = z[0];
    }
  }
  SolverOptions opts;
  opts.gradient_tolerance = 1e-9;
  opts.step_tolerance = 1e-13;
  opts.max_iterations = 500;
  const MinimizeResult res = minimize_box(problem, std::vector<double>{best_a}, opts);
  return res.x[0];
}

// Replaces the observed HDV action with the phi2-optimal one and re-rolls the
// HDV next state; everything observed about the CAV is kept fixed.
inline TrajectorySegment optimized_segment(const TrajectorySegment& seg, double phi2,
                                           const ScenarioConfig& cfg) {
  if (!(phi2 > 0.0) || !(phi2 < kHalfPi)) {
    throw std::domain_error("optimized_segment: phi2 must lie in (0, pi/2)");
  }
  TrajectorySegment out = seg;
  out.u2 = Control{optimal_hdv_accel(seg.x1_next, seg.x2, phi2, cfg)};
  out.x2_next = step(seg.x2, out.u2, cfg.dt);
  return out;
}

inline FeatureVector expected_features(const EstimatorState& state, double phi2,
                                       const ScenarioConfig& cfg) {
  if (state.segment_buffer.empty()) {
    throw std::runtime_error("expected_features: no segments collected");
  }
  FeatureVector sum{0.0, 0.0};
  for (const auto& seg : state.segment_buffer) {
    const FeatureVector f = features(optimized_segment(seg, phi2, cfg), cfg);
    sum.ego += f.ego;
    sum.coop += f.coop;
  }
  const double n = static_cast<double>(state.segment_buffer.size());
  return FeatureVector{sum.ego / n, sum.coop / n};
}

// Ascent direction for the approximated log-likelihood in psi. Under the cost
// convention p(r) proportional to exp(-theta^T f(r)), the theta-gradient is
// expected minus empirical features; the chain rule contracts it with
// theta'(phi2) = [-sin phi2, cos phi2] and dphi/dpsi = (pi/2) s (1 - s).
inline double likelihood_gradient_psi(const EstimatorState& state, const ScenarioConfig& cfg) {
  if (state.segment_buffer.empty()) {
    throw std::runtime_error("likelihood_gradient_psi: no segments collected");
  }
  const double phi2 = phi_from_psi(state.psi);
  const FeatureVector emp = empirical_features(state, cfg);
  const FeatureVector exp = expected_features(state, phi2, cfg);
  const FeatureVector delta{exp.ego - emp.ego, exp.coop - emp.coop};
  const double s = sigmoid(state.psi);
  const double dphi_dpsi = kHalfPi * s * (1.0 - s);
  return (-std::sin(phi2) * delta.ego + std::cos(phi2) * delta.coop) * dphi_dpsi;
}

// One estimator update: n_inner gradient-ascent steps on psi. An empty buffer
// leaves the state unchanged.
inline std::pair<EstimatorState, double> update(EstimatorState state, const ScenarioConfig& cfg) {
  if (state.segment_buffer.empty()) {
    return {state, phi_from_psi(state.psi)};
  }
  for (int i = 0; i < cfg.n_inner; ++i) {
    state.psi += state.eta * likelihood_gradient_psi(state, cfg);
  }
  return {std::move(state), phi_from_psi(state.psi)};
}

}  // namespace svogame
