#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "svogame/config.hpp"
#include "svogame/dynamics.hpp"
#include "svogame/estimator.hpp"
#include "svogame/objectives.hpp"
#include "svogame/optimize.hpp"
#include "svogame/types.hpp"

namespace svogame {

// Synthetic human driver parameterized by a hidden ground-truth orientation.
struct HdvPolicy {
  double true_phi2{kHalfPi / 2.0};
  int horizon{1};
  double noise_std{0.0};
};

inline void validate_policy(const HdvPolicy& policy) {
  if (!(policy.true_phi2 > 0.0) || !(policy.true_phi2 < kHalfPi)) {
    throw std::invalid_argument("hdv: true_phi2 must lie in (0, pi/2)");
  }
  if (policy.horizon < 1) throw std::invalid_argument("hdv: horizon must be at least 1");
  if (!(policy.noise_std >= 0.0)) throw std::invalid_argument("hdv: noise_std must be >= 0");
}

namespace detail {

// Multi-step variant: the CAV is extrapolated with its last observed
// acceleration held constant; only the HDV ego and coupling terms are costed.
inline double hdv_lookahead_accel(const HdvPolicy& policy, const VehicleState& x1,
                                  const VehicleState& x2, const Control& cav_predicted_u1,
                                  const ScenarioConfig& cfg) {
  const double a1 = optimal_hdv_accel(step(x1, cav_predicted_u1, cfg.dt), x2, policy.true_phi2,
                                      cfg);
  if (policy.horizon == 1) return a1;

  const std::size_t h = static_cast<std::size_t>(policy.horizon);
  const ControlSequence cav_seq(h, cav_predicted_u1);
  const CostWeights w{0.0, std::cos(policy.true_phi2), std::sin(policy.true_phi2)};

  struct LookaheadProblem {
    VehicleState x1, x2;
    ControlSequence cav_seq;
    CostWeights w;
    ScenarioConfig cfg;

    std::size_t size() const { return cav_seq.size(); }
    double value(const std::vector<double>& z) const {
      return weighted_horizon_cost(x1, x2, cav_seq, to_sequence(z.data(), z.size()), w, cfg);
    }
    void gradient(const std::vector<double>& z, std::vector<double>& grad) const {
      auto [g1, g2] =
          weighted_horizon_gradient(x1, x2, cav_seq, to_sequence(z.data(), z.size()), w, cfg);
      grad = std::move(g2);
    }
    void bounds(const std::vector<double>&, std::vector<double>& lo,
                std::vector<double>& hi) const {
      lo.assign(cav_seq.size(), -kInnerAccelClamp);
      hi.assign(cav_seq.size(), kInnerAccelClamp);
    }
  };

  LookaheadProblem problem{x1, x2, cav_seq, w, cfg};
  SolverOptions opts;
  opts.gradient_tolerance = 1e-8;
  opts.step_tolerance = 1e-12;
  opts.max_iterations = 500;
  const MinimizeResult res = minimize_box(problem, std::vector<double>(h, a1), opts);
  return res.x[0];
}

}  // namespace detail

// HDV action for the current step. Outside the control zone the human holds
// speed; inside, the action minimizes the phi2-weighted one-step (or
// lookahead) objective, optionally perturbed by Gaussian noise.
inline Control hdv_action(const HdvPolicy& policy, const VehicleState& x1, const VehicleState& x2,
                          const Control& cav_predicted_u1, const ScenarioConfig& cfg,
                          std::mt19937& rng) {
  validate_policy(policy);
  if (x2.position < -cfg.control_zone_length || x2.position > cfg.r) return Control{0.0};

  double a = detail::hdv_lookahead_accel(policy, x1, x2, cav_predicted_u1, cfg);
  if (policy.noise_std > 0.0) {
    a += std::normal_distribution<double>(0.0, policy.noise_std)(rng);
  }
  return Control{a};
}

// Deterministic convenience overload for noise-free policies.
inline Control hdv_action(const HdvPolicy& policy, const VehicleState& x1, const VehicleState& x2,
                          const Control& cav_predicted_u1, const ScenarioConfig& cfg) {
  if (policy.noise_std > 0.0) {
    throw std::invalid_argument("hdv_action: noisy policy needs a generator");
  }
  std::mt19937 rng(0);
  return hdv_action(policy, x1, x2, cav_predicted_u1, cfg, rng);
}

}  // namespace svogame
