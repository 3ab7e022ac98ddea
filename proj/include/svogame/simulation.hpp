#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svogame/config.hpp"
#include "svogame/dynamics.hpp"
#include "svogame/estimator.hpp"
#include "svogame/hdv.hpp"
#include "svogame/objectives.hpp"
#include "svogame/planner.hpp"
#include "svogame/types.hpp"

namespace svogame {

struct LogRecord {
  double t{0.0};
  double p1{0.0}, v1{0.0}, a1{0.0};
  double p2{0.0}, v2{0.0}, a2{0.0};
  double phi1{0.0}, phi2_est{0.0}, phi2_true{0.0};
  double potential{0.0};
  double dist{0.0};
};

using SimulationLog = std::vector<LogRecord>;

struct RunSpec {
  VehicleState x1_init{-120.0, 20.0};
  VehicleState x2_init{-120.0, 20.0};
  HdvPolicy hdv{};
  ScenarioConfig config{};
  std::optional<double> phi2_init;  // estimator start; default psi = 0 (pi/4)
  double stop_margin{30.0};
  int max_steps{600};
  unsigned seed{0};
  SolverOptions solver_options{};
};

// Solver failure mid-run; carries everything logged up to the failing step.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, SimulationLog partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SimulationLog& partial_log() const { return partial_; }

 private:
  SimulationLog partial_;
};

namespace detail {

inline void validate_run_spec(const RunSpec& spec) {
  validate_config(spec.config);
  validate_policy(spec.hdv);
  validate_options(spec.solver_options);
  const double lc = spec.config.control_zone_length;
  if (spec.x1_init.position < -lc || spec.x2_init.position < -lc) {
    throw std::invalid_argument("run: initial positions must be inside the control zone");
  }
  if (spec.x1_init.speed < spec.config.v_min || spec.x1_init.speed > spec.config.v_max) {
    throw std::invalid_argument("run: CAV initial speed violates the speed limits");
  }
  if (spec.max_steps < 1) throw std::invalid_argument("run: max_steps must be at least 1");
  if (spec.phi2_init && (!(*spec.phi2_init > 0.0) || !(*spec.phi2_init < kHalfPi))) {
    throw std::domain_error("run: phi2_init must lie in (0, pi/2)");
  }
}

}  // namespace detail

// Closed-loop run: per step, push the latest observed transition into the
// estimator, update the SVO estimate, plan the CAV action, query the HDV with
// the last observed CAV acceleration, then advance both vehicles.
inline SimulationLog run(const RunSpec& spec) {
  detail::validate_run_spec(spec);
  const ScenarioConfig& cfg = spec.config;

  EstimatorState est = initialize(spec.phi2_init, cfg.eta);
  PlannerState planner;
  std::mt19937 rng(spec.seed);

  SimulationLog log;
  VehicleState x1 = spec.x1_init;
  VehicleState x2 = spec.x2_init;
  VehicleState x1_prev{}, x2_prev{};
  double u1_prev = 0.0, u2_prev = 0.0;
  double phi1 = adapt_cav_svo(phi_from_psi(est.psi));
  double phi2_hat = phi_from_psi(est.psi);

  int k = 0;
  for (; k < spec.max_steps; ++k) {
    // Ingest the step k-1 transition only if the HDV was inside its control
    // window at the segment start; outside it the policy emits a hard zero
    // that is not a draw from the preference model and would bias the
    // estimate. The update itself still runs every step so the estimate
    // keeps refining against the retained window after the HDV exits.
    if (k >= 1 && x2_prev.position >= -cfg.control_zone_length &&
        x2_prev.position <= cfg.r) {
      est = push_segment(
          est, TrajectorySegment{x1_prev, x2_prev, x1, x2, Control{u1_prev}, Control{u2_prev}},
          cfg);
    }
    std::tie(est, phi2_hat) = update(est, cfg);
    phi1 = adapt_cav_svo(phi2_hat);

    double u1 = 0.0;
    if (x1.position >= -cfg.control_zone_length && x1.position <= cfg.r) {
      try {
        PlanStepResult res = plan_step(x1, x2, phi2_hat, std::move(planner), cfg,
                                       spec.solver_options);
        u1 = res.u1_apply.acceleration;
        planner = std::move(res.state);
      } catch (const SolverError& e) {
        throw RunAborted(std::string("run: planner failed at step ") + std::to_string(k) + ": " +
                             e.what(),
                         std::move(log));
      }
    }
    const double u2 =
        hdv_action(spec.hdv, x1, x2, Control{u1_prev}, cfg, rng).acceleration;

    const VehicleState x1_next = step(x1, Control{u1}, cfg.dt);
    const VehicleState x2_next = step(x2, Control{u2}, cfg.dt);
    const SvoPair svo = make_svo(phi1, phi2_hat);
    const double pot = potential_cost(x1_next, Control{u1}, x2_next, Control{u2}, svo, cfg);

    log.push_back(LogRecord{k * cfg.dt, x1.position, x1.speed, u1, x2.position, x2.speed, u2,
                            phi1, phi2_hat, spec.hdv.true_phi2, pot,
                            std::sqrt(x1.position * x1.position + x2.position * x2.position)});

    x1_prev = x1;
    x2_prev = x2;
    u1_prev = u1;
    u2_prev = u2;
    x1 = x1_next;
    x2 = x2_next;

    if (x1.position > spec.stop_margin && x2.position > spec.stop_margin) {
      ++k;
      break;
    }
  }

  log.push_back(LogRecord{k * cfg.dt, x1.position, x1.speed, 0.0, x2.position, x2.speed, 0.0,
                          phi1, phi2_hat, spec.hdv.true_phi2, 0.0,
                          std::sqrt(x1.position * x1.position + x2.position * x2.position)});
  return log;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "t,p1,v1,a1,p2,v2,a2,phi1,phi2_est,phi2_true,potential,dist";

inline void emit_csv(const SimulationLog& log, const std::string& path) {
  if (log.empty()) throw std::invalid_argument("emit_csv: log is empty");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << kCsvHeader << "\n";
  for (const LogRecord& r : log) {
    const double cols[] = {r.t,  r.p1,   r.v1,       r.a1,        r.p2,        r.v2,
                           r.a2, r.phi1, r.phi2_est, r.phi2_true, r.potential, r.dist};
    for (std::size_t i = 0; i < std::size(cols); ++i) {
      if (i) out << ',';
      out << detail::format_number(cols[i]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

// Position snapshots at a fixed interval, for redrawing the merging diagrams.
inline void emit_snapshot_json(const SimulationLog& log, const std::string& path,
                               double interval_s) {
  if (log.empty()) throw std::invalid_argument("emit_snapshot_json: log is empty");
  const double dt = log.size() > 1 ? log[1].t - log[0].t : interval_s;
  const long long m = std::llround(interval_s / dt);
  if (m < 1 || std::abs(m * dt - interval_s) > 1e-9) {
    throw std::invalid_argument("emit_snapshot_json: interval must be a multiple of dt");
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < log.size(); i += static_cast<std::size_t>(m)) {
    arr.push_back({{"t", log[i].t}, {"p1", log[i].p1}, {"p2", log[i].p2}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_snapshot_json: cannot open " + path);
  out << arr.dump(2) << "\n";
  if (!out) throw std::runtime_error("emit_snapshot_json: write failed for " + path);
}

inline SimulationLog load_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_log_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("load_log_csv: unexpected header in " + path);
  }
  SimulationLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    double cols[12];
    for (int i = 0; i < 12; ++i) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error("load_log_csv: short row in " + path);
      }
      cols[i] = std::stod(cell);
    }
    log.push_back(LogRecord{cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6],
                            cols[7], cols[8], cols[9], cols[10], cols[11]});
  }
  return log;
}

// Re-runs the estimator over a logged run. Element i is the estimate in force
// at step i; it aligns with the phi2_est column for every non-terminal record.
inline std::vector<double> replay_estimator(const SimulationLog& log, const ScenarioConfig& cfg,
                                            std::optional<double> phi2_init = std::nullopt) {
  if (log.empty()) throw std::invalid_argument("replay_estimator: log is empty");
  EstimatorState est = initialize(phi2_init, cfg.eta);
  std::vector<double> estimates;
  estimates.push_back(phi_from_psi(est.psi));
  for (std::size_t i = 1; i + 1 < log.size(); ++i) {
    const LogRecord& a = log[i - 1];
    const LogRecord& b = log[i];
    // Same ingestion gate as run(): skip segments whose start lies outside the
    // HDV control window, where the logged action is a hard zero.
    if (a.p2 >= -cfg.control_zone_length && a.p2 <= cfg.r) {
      est = push_segment(est,
                         TrajectorySegment{VehicleState{a.p1, a.v1}, VehicleState{a.p2, a.v2},
                                           VehicleState{b.p1, b.v1}, VehicleState{b.p2, b.v2},
                                           Control{a.a1}, Control{a.a2}},
                         cfg);
    }
    double phi2_hat = 0.0;
    std::tie(est, phi2_hat) = update(est, cfg);
    estimates.push_back(phi2_hat);
  }
  return estimates;
}

// First record index where the vehicle's position reaches the conflict point.
inline std::optional<std::size_t> crossing_step(const SimulationLog& log, int vehicle) {
  if (vehicle != 1 && vehicle != 2) throw std::invalid_argument("crossing_step: vehicle is 1 or 2");
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double p = vehicle == 1 ? log[i].p1 : log[i].p2;
    if (p >= 0.0) return i;
  }
  return std::nullopt;
}

inline double min_squared_distance(const SimulationLog& log) {
  if (log.empty()) throw std::invalid_argument("min_squared_distance: log is empty");
  double best = std::numeric_limits<double>::infinity();
  for (const LogRecord& r : log) best = std::min(best, r.p1 * r.p1 + r.p2 * r.p2);
  return best;
}

}  // namespace svogame
