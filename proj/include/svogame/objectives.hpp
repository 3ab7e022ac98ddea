#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "svogame/config.hpp"
#include "svogame/dynamics.hpp"
#include "svogame/types.hpp"

namespace svogame {

// Feature vector of the HDV objective: its egoistic stage cost and the shared
// collision barrier.
struct FeatureVector {
  double ego{0.0};
  double coop{0.0};
};

// Unit-circle weights (cos phi2, sin phi2) applied to the feature vector.
struct ThetaWeights {
  double cos_phi{0.0};
  double sin_phi{0.0};
};

inline ThetaWeights theta_weights(double phi2) {
  return ThetaWeights{std::cos(phi2), std::sin(phi2)};
}

inline double dot(const ThetaWeights& th, const FeatureVector& f) {
  return th.cos_phi * f.ego + th.sin_phi * f.coop;
}

inline double ego_cost_cav(const VehicleState& x_next, const Control& u,
                           const ScenarioConfig& cfg) {
  const double dv = x_next.speed - cfg.v_max;
  return cfg.w1 * u.acceleration * u.acceleration + cfg.w2 * dv * dv;
}

inline double ego_cost_hdv(const VehicleState& x_next, const Control& u,
                           const ScenarioConfig& cfg) {
  const double dv = x_next.speed - cfg.v_max;
  return cfg.w3 * u.acceleration * u.acceleration + cfg.w4 * dv * dv;
}

// Collision barrier on D = p1^2 + p2^2 - r^2. The hyperbola w5/D is singular
// at D = 0, so below barrier_epsilon it continues along its tangent line;
// the result is finite, positive and C1 everywhere.
inline double coop_cost(const VehicleState& x1_next, const VehicleState& x2_next,
                        const ScenarioConfig& cfg) {
  const double p1 = x1_next.position;
  const double p2 = x2_next.position;
  const double d = p1 * p1 + p2 * p2 - cfg.r * cfg.r;
  const double eps = cfg.barrier_epsilon;
  if (d > eps) return cfg.w5 / d;
  return cfg.w5 / eps - cfg.w5 / (eps * eps) * (d - eps);
}

// d(coop_cost)/dD at the same point.
inline double coop_cost_dd(const VehicleState& x1_next, const VehicleState& x2_next,
                           const ScenarioConfig& cfg) {
  const double p1 = x1_next.position;
  const double p2 = x2_next.position;
  const double d = p1 * p1 + p2 * p2 - cfg.r * cfg.r;
  const double eps = cfg.barrier_epsilon;
  if (d > eps) return -cfg.w5 / (d * d);
  return -cfg.w5 / (eps * eps);
}

inline double weighted_player_cost(double phi, double ego, double coop) {
  return ego * std::cos(phi) + coop * std::sin(phi);
}

// Single objective whose minimizers are Nash equilibria of the two-player
// game: l1 cos(phi1) sin(phi2) + l2 sin(phi1) cos(phi2) + l12 sin(phi1) sin(phi2).
inline double potential_cost(const VehicleState& x1_next, const Control& u1,
                             const VehicleState& x2_next, const Control& u2,
                             const SvoPair& svo, const ScenarioConfig& cfg) {
  const double c1 = std::cos(svo.phi1), s1 = std::sin(svo.phi1);
  const double c2 = std::cos(svo.phi2), s2 = std::sin(svo.phi2);
  return ego_cost_cav(x1_next, u1, cfg) * c1 * s2 +
         ego_cost_hdv(x2_next, u2, cfg) * s1 * c2 +
         coop_cost(x1_next, x2_next, cfg) * s1 * s2;
}

namespace detail {

// Every horizon objective used here is alpha*sum(l1) + beta*sum(l2) + gamma*sum(l12).
struct CostWeights {
  double alpha{0.0};
  double beta{0.0};
  double gamma{0.0};
};

inline CostWeights potential_weights(const SvoPair& svo) {
  const double c1 = std::cos(svo.phi1), s1 = std::sin(svo.phi1);
  const double c2 = std::cos(svo.phi2), s2 = std::sin(svo.phi2);
  return CostWeights{c1 * s2, s1 * c2, s1 * s2};
}

inline CostWeights player_weights(int player, const SvoPair& svo) {
  if (player == 1) return CostWeights{std::cos(svo.phi1), 0.0, std::sin(svo.phi1)};
  if (player == 2) return CostWeights{0.0, std::cos(svo.phi2), std::sin(svo.phi2)};
  throw std::invalid_argument("player index must be 1 or 2");
}

inline void check_sequences(const ControlSequence& seq1, const ControlSequence& seq2) {
  if (seq1.empty() || seq1.size() != seq2.size()) {
    throw std::invalid_argument("control sequences must be non-empty and of equal length");
  }
}

inline double weighted_horizon_cost(const VehicleState& x1_0, const VehicleState& x2_0,
                                    const ControlSequence& seq1, const ControlSequence& seq2,
                                    const CostWeights& w, const ScenarioConfig& cfg) {
  check_sequences(seq1, seq2);
  const auto xs1 = rollout(x1_0, seq1, cfg.dt);
  const auto xs2 = rollout(x2_0, seq2, cfg.dt);
  double total = 0.0;
  for (std::size_t k = 0; k < seq1.size(); ++k) {
    total += w.alpha * ego_cost_cav(xs1[k], seq1[k], cfg) +
             w.beta * ego_cost_hdv(xs2[k], seq2[k], cfg) +
             w.gamma * coop_cost(xs1[k], xs2[k], cfg);
  }
  return total;
}

// Backward (adjoint) sweep through the linear dynamics. The stage cost at k
// touches x_{k+1} and u_k only, so grad[k] = dl_k/du_k + B^T lambda_{k+1}
// with lambda accumulating A^T-propagated next-state partials.
inline std::pair<std::vector<double>, std::vector<double>> weighted_horizon_gradient(
    const VehicleState& x1_0, const VehicleState& x2_0, const ControlSequence& seq1,
    const ControlSequence& seq2, const CostWeights& w, const ScenarioConfig& cfg) {
  check_sequences(seq1, seq2);
  const std::size_t h = seq1.size();
  const double dt = cfg.dt;
  const auto xs1 = rollout(x1_0, seq1, dt);
  const auto xs2 = rollout(x2_0, seq2, dt);

  std::vector<double> grad1(h, 0.0), grad2(h, 0.0);
  double lp1 = 0.0, lv1 = 0.0;  // adjoint for the CAV chain
  double lp2 = 0.0, lv2 = 0.0;  // adjoint for the HDV chain
  for (std::size_t k = h; k-- > 0;) {
    const double dd = coop_cost_dd(xs1[k], xs2[k], cfg) * w.gamma;
    // Stage partials with respect to the next states.
    const double gp1 = dd * 2.0 * xs1[k].position;
    const double gv1 = w.alpha * 2.0 * cfg.w2 * (xs1[k].speed - cfg.v_max);
    const double gp2 = dd * 2.0 * xs2[k].position;
    const double gv2 = w.beta * 2.0 * cfg.w4 * (xs2[k].speed - cfg.v_max);
    // lambda <- g + A^T lambda, then grad = dl/du + B^T lambda.
    lv1 = dt * lp1 + lv1 + gv1;
    lp1 += gp1;
    lv2 = dt * lp2 + lv2 + gv2;
    lp2 += gp2;
    grad1[k] = w.alpha * 2.0 * cfg.w1 * seq1[k].acceleration + 0.5 * dt * dt * lp1 + dt * lv1;
    grad2[k] = w.beta * 2.0 * cfg.w3 * seq2[k].acceleration + 0.5 * dt * dt * lp2 + dt * lv2;
  }
  return {std::move(grad1), std::move(grad2)};
}

}  // namespace detail

inline double horizon_potential(const VehicleState& x1_0, const VehicleState& x2_0,
                                const ControlSequence& seq1, const ControlSequence& seq2,
                                const SvoPair& svo, const ScenarioConfig& cfg) {
  return detail::weighted_horizon_cost(x1_0, x2_0, seq1, seq2, detail::potential_weights(svo),
                                       cfg);
}

inline std::pair<std::vector<double>, std::vector<double>> horizon_potential_gradient(
    const VehicleState& x1_0, const VehicleState& x2_0, const ControlSequence& seq1,
    const ControlSequence& seq2, const SvoPair& svo, const ScenarioConfig& cfg) {
  return detail::weighted_horizon_gradient(x1_0, x2_0, seq1, seq2,
                                           detail::potential_weights(svo), cfg);
}

// Horizon sum of one player's own game objective (ego * cos phi + coop * sin phi).
inline double horizon_player_cost(int player, const VehicleState& x1_0, const VehicleState& x2_0,
                                  const ControlSequence& seq1, const ControlSequence& seq2,
                                  const SvoPair& svo, const ScenarioConfig& cfg) {
  return detail::weighted_horizon_cost(x1_0, x2_0, seq1, seq2,
                                       detail::player_weights(player, svo), cfg);
}

inline std::pair<std::vector<double>, std::vector<double>> horizon_player_cost_gradient(
    int player, const VehicleState& x1_0, const VehicleState& x2_0, const ControlSequence& seq1,
    const ControlSequence& seq2, const SvoPair& svo, const ScenarioConfig& cfg) {
  return detail::weighted_horizon_gradient(x1_0, x2_0, seq1, seq2,
                                           detail::player_weights(player, svo), cfg);
}

inline FeatureVector features(const TrajectorySegment& seg, const ScenarioConfig& cfg) {
  return FeatureVector{ego_cost_hdv(seg.x2_next, seg.u2, cfg),
                       coop_cost(seg.x1_next, seg.x2_next, cfg)};
}

}  // namespace svogame
