#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "svogame/config.hpp"
#include "svogame/solver.hpp"
#include "svogame/types.hpp"

namespace svogame {

// CAV orientation complementary to the HDV estimate: phi1 = pi/2 - phi2.
inline double adapt_cav_svo(double phi2_estimate) {
  if (!(phi2_estimate > 0.0) || !(phi2_estimate < kHalfPi)) {
    throw std::domain_error("adapt_cav_svo: estimate must lie in (0, pi/2)");
  }
  return kHalfPi - phi2_estimate;
}

struct PlannerState {
  std::optional<std::pair<ControlSequence, ControlSequence>> previous_solution;
  SvoPair current_svo{make_svo(kHalfPi / 2.0, kHalfPi / 2.0)};
};

struct PlanStepResult {
  Control u1_apply;
  ControlSequence predicted_hdv_seq;
  PlannerState state;
  SolverResult solution;
};

namespace detail {

inline ControlSequence shift_left_repeat_last(const ControlSequence& seq) {
  ControlSequence shifted(seq.size());
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) shifted[k] = seq[k + 1];
  if (!shifted.empty()) shifted.back() = seq.back();
  return shifted;
}

}  // namespace detail

// One receding-horizon step: adapt the CAV angle to the current HDV estimate,
// solve the joint problem warm-started from the shifted previous solution, and
// return the first CAV action plus the full predicted HDV sequence.
inline PlanStepResult plan_step(const VehicleState& x1, const VehicleState& x2,
                                double phi2_estimate, PlannerState state,
                                const ScenarioConfig& cfg, const SolverOptions& opts = {}) {
  const double phi1 = adapt_cav_svo(phi2_estimate);
  const SvoPair svo = make_svo(phi1, phi2_estimate);

  std::optional<std::pair<ControlSequence, ControlSequence>> warm;
  if (state.previous_solution &&
      state.previous_solution->first.size() == static_cast<std::size_t>(cfg.horizon)) {
    warm = std::make_pair(detail::shift_left_repeat_last(state.previous_solution->first),
                          detail::shift_left_repeat_last(state.previous_solution->second));
  }

  SolverResult sol = solve(x1, x2, svo, cfg, warm, opts);

  PlanStepResult out;
  out.u1_apply = sol.seq1.front();
  out.predicted_hdv_seq = sol.seq2;
  out.state.previous_solution = std::make_pair(sol.seq1, sol.seq2);
  out.state.current_svo = svo;
  out.solution = std::move(sol);
  return out;
}

}  // namespace svogame
