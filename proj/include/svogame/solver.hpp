#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
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

struct SolverResult {
  ControlSequence seq1;
  ControlSequence seq2;
  double objective{0.0};
  int iterations{0};
  bool converged{false};
  double kkt_residual{0.0};
};

namespace detail {

constexpr double kHdvAccelClamp = 50.0;  // numerical safety only, never binds

// Speed limits become per-stage acceleration bounds along the current CAV
// rollout: a_k in [(v_min - v_k)/dt, (v_max - v_k)/dt] intersected with
// [u_min, u_max]. The rollout advances with the clamped acceleration, so the
// interval sequence always describes a reachable speed profile and clamping
// onto it is exactly the forward-sequential feasibility restoration. From an
// infeasible speed the first interval collapses to the recovering extreme.
inline void cav_stage_bounds(const VehicleState& x1_0, const double* accels, std::size_t h,
                             const ScenarioConfig& cfg, double* lo, double* hi) {
  double v = x1_0.speed;
  for (std::size_t k = 0; k < h; ++k) {
    lo[k] = std::clamp((cfg.v_min - v) / cfg.dt, cfg.u_min, cfg.u_max);
    hi[k] = std::clamp((cfg.v_max - v) / cfg.dt, cfg.u_min, cfg.u_max);
    v += cfg.dt * std::clamp(accels[k], lo[k], hi[k]);
  }
}

// Joint horizon objective over z = [u1_0..u1_{H-1}, u2_0..u2_{H-1}].
struct JointHorizonProblem {
  VehicleState x1_0, x2_0;
  SvoPair svo;
  ScenarioConfig cfg;

  std::size_t size() const { return 2 * static_cast<std::size_t>(cfg.horizon); }

  double value(const std::vector<double>& z) const {
    const std::size_t h = cfg.horizon;
    return horizon_potential(x1_0, x2_0, to_sequence(z.data(), h), to_sequence(z.data() + h, h),
                             svo, cfg);
  }

  void gradient(const std::vector<double>& z, std::vector<double>& grad) const {
    const std::size_t h = cfg.horizon;
    auto [g1, g2] = horizon_potential_gradient(x1_0, x2_0, to_sequence(z.data(), h),
                                               to_sequence(z.data() + h, h), svo, cfg);
    grad.resize(2 * h);
    std::copy(g1.begin(), g1.end(), grad.begin());
    std::copy(g2.begin(), g2.end(), grad.begin() + h);
  }

  void bounds(const std::vector<double>& z, std::vector<double>& lo,
              std::vector<double>& hi) const {
    const std::size_t h = cfg.horizon;
    lo.resize(2 * h);
    hi.resize(2 * h);
    cav_stage_bounds(x1_0, z.data(), h, cfg, lo.data(), hi.data());
    // HDV inputs are unconstrained in the game; the wide clamp is numerical.
    std::fill(lo.begin() + h, lo.end(), -kHdvAccelClamp);
    std::fill(hi.begin() + h, hi.end(), kHdvAccelClamp);
  }
};

// One player's horizon objective with the other sequence frozen.
struct PlayerHorizonProblem {
  int player{1};
  ControlSequence frozen;
  VehicleState x1_0, x2_0;
  SvoPair svo;
  ScenarioConfig cfg;

  std::size_t size() const { return static_cast<std::size_t>(cfg.horizon); }

  double value(const std::vector<double>& z) const {
    const auto own = to_sequence(z.data(), z.size());
    const auto& seq1 = player == 1 ? own : frozen;
    const auto& seq2 = player == 1 ? frozen : own;
    return horizon_player_cost(player, x1_0, x2_0, seq1, seq2, svo, cfg);
  }

  void gradient(const std::vector<double>& z, std::vector<double>& grad) const {
    const auto own = to_sequence(z.data(), z.size());
    const auto& seq1 = player == 1 ? own : frozen;
    const auto& seq2 = player == 1 ? frozen : own;
    auto [g1, g2] = horizon_player_cost_gradient(player, x1_0, x2_0, seq1, seq2, svo, cfg);
    grad = player == 1 ? std::move(g1) : std::move(g2);
  }

  void bounds(const std::vector<double>& z, std::vector<double>& lo,
              std::vector<double>& hi) const {
    const std::size_t h = z.size();
    lo.resize(h);
    hi.resize(h);
    if (player == 1) {
      cav_stage_bounds(x1_0, z.data(), h, cfg, lo.data(), hi.data());
    } else {
      std::fill(lo.begin(), lo.end(), -kHdvAccelClamp);
      std::fill(hi.begin(), hi.end(), kHdvAccelClamp);
    }
  }
};

// Forward-sequential projection of the CAV accelerations. Each stage bound is
// derived from the already-projected speed, so the projected rollout satisfies
// the speed limits exactly whenever they are reachable.
inline void project_cav_feasible(const VehicleState& x1_0, double* accels, std::size_t h,
                                 const ScenarioConfig& cfg) {
  double v = x1_0.speed;
  for (std::size_t k = 0; k < h; ++k) {
    const double lo = std::clamp((cfg.v_min - v) / cfg.dt, cfg.u_min, cfg.u_max);
    const double hi = std::clamp((cfg.v_max - v) / cfg.dt, cfg.u_min, cfg.u_max);
    accels[k] = std::clamp(accels[k], lo, hi);
    v += cfg.dt * accels[k];
  }
}

}  // namespace detail

// Minimize the joint horizon potential over both control sequences subject to
// the CAV's acceleration and speed limits. The initial guess is the warm start
// when given, all-zero accelerations otherwise.
inline SolverResult solve(const VehicleState& x1_0, const VehicleState& x2_0, const SvoPair& svo,
                          const ScenarioConfig& cfg,
                          const std::optional<std::pair<ControlSequence, ControlSequence>>&
                              warm_start = std::nullopt,
                          const SolverOptions& opts = {}) {
  const std::size_t h = cfg.horizon;
  std::vector<double> z0(2 * h, 0.0);
  if (warm_start) {
    if (warm_start->first.size() != h || warm_start->second.size() != h) {
      throw std::invalid_argument("solve: warm start sequences must have horizon length");
    }
    for (std::size_t k = 0; k < h; ++k) {
      z0[k] = warm_start->first[k].acceleration;
      z0[h + k] = warm_start->second[k].acceleration;
    }
  }

  detail::JointHorizonProblem problem{x1_0, x2_0, svo, cfg};
  MinimizeResult res = minimize_box(problem, std::move(z0), opts);

  detail::project_cav_feasible(x1_0, res.x.data(), h, cfg);

  SolverResult out;
  out.seq1 = detail::to_sequence(res.x.data(), h);
  out.seq2 = detail::to_sequence(res.x.data() + h, h);
  out.objective = problem.value(res.x);
  out.iterations = res.iterations;

  // Residual at the projected point, against bounds re-derived from it.
  std::vector<double> grad, lo, hi;
  problem.gradient(res.x, grad);
  problem.bounds(res.x, lo, hi);
  double residual = 0.0;
  for (std::size_t i = 0; i < res.x.size(); ++i) {
    const double moved = res.x[i] - std::clamp(res.x[i] - grad[i], lo[i], hi[i]);
    residual = std::max(residual, std::abs(moved));
  }
  out.kkt_residual = residual;
  out.converged = residual <= opts.gradient_tolerance * std::max(1.0, std::abs(out.objective));
  return out;
}

// Re-optimize one player's own objective with the other sequence held fixed.
// The optional init seeds the local search (zeros otherwise); certifying a
// solve() output passes its own slice so the check stays within that basin.
inline ControlSequence best_response(int player, const ControlSequence& frozen_seq,
                                     const VehicleState& x1_0, const VehicleState& x2_0,
                                     const SvoPair& svo, const ScenarioConfig& cfg,
                                     const std::optional<ControlSequence>& init = std::nullopt,
                                     const SolverOptions& opts = {}) {
  const std::size_t h = cfg.horizon;
  if (player != 1 && player != 2) throw std::invalid_argument("best_response: player is 1 or 2");
  if (frozen_seq.size() != h) {
    throw std::invalid_argument("best_response: frozen sequence must have horizon length");
  }
  std::vector<double> z0(h, 0.0);
  if (init) {
    if (init->size() != h) {
      throw std::invalid_argument("best_response: init must have horizon length");
    }
    for (std::size_t k = 0; k < h; ++k) z0[k] = (*init)[k].acceleration;
  }
  detail::PlayerHorizonProblem problem{player, frozen_seq, x1_0, x2_0, svo, cfg};
  MinimizeResult res = minimize_box(problem, std::move(z0), opts);
  if (player == 1) detail::project_cav_feasible(x1_0, res.x.data(), h, cfg);
  return detail::to_sequence(res.x.data(), h);
}

}  // namespace svogame
