#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svogame/svogame.hpp"

namespace {

constexpr double kEgoisticPhi = svogame::kHalfPi / 6.0;        // pi/12
constexpr double kAltruisticPhi = 5.0 * svogame::kHalfPi / 6.0;  // 5*pi/12

double parse_svo(std::string text) {
  if (text.rfind("preset:", 0) == 0) text = text.substr(7);
  if (text == "egoistic") return kEgoisticPhi;
  if (text == "altruistic") return kAltruisticPhi;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw svogame::ConfigError("hdv-svo: expected radians or egoistic/altruistic, got '" + text +
                               "'");
  }
  if (used != text.size()) {
    throw svogame::ConfigError("hdv-svo: trailing characters in '" + text + "'");
  }
  if (!(value > 0.0) || !(value < svogame::kHalfPi)) {
    throw svogame::ConfigError("hdv-svo: angle must lie strictly inside (0, pi/2)");
  }
  return value;
}

std::string crossing_order(const svogame::SimulationLog& log) {
  const auto c1 = svogame::crossing_step(log, 1);
  const auto c2 = svogame::crossing_step(log, 2);
  if (!c1 && !c2) return "none";
  if (!c1) return "hdv_first";
  if (!c2) return "cav_first";
  if (*c2 < *c1) return "hdv_first";
  if (*c1 < *c2) return "cav_first";
  return "tie";
}

void print_run_summary(const svogame::SimulationLog& log) {
  const auto& last = log.back();
  std::printf("steps=%zu order=%s min_dist=%.6g final_estimate=%.6g true=%.6g\n", log.size() - 1,
              crossing_order(log).c_str(), std::sqrt(svogame::min_squared_distance(log)),
              last.phi2_est, last.phi2_true);
}

int run_simulate(const std::string& config_path, const std::string& svo_text,
                 const std::string& out_dir, unsigned seed, int max_steps) {
  svogame::RunSpec spec;
  spec.config = svogame::load_config(config_path);
  spec.hdv.true_phi2 = parse_svo(svo_text);
  spec.seed = seed;
  if (max_steps > 0) spec.max_steps = max_steps;

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/log.csv";
  const std::string json_path = out_dir + "/snapshots.json";

  try {
    const svogame::SimulationLog log = svogame::run(spec);
    svogame::emit_csv(log, csv_path);
    svogame::emit_snapshot_json(log, json_path, 1.0);
    print_run_summary(log);
    return 0;
  } catch (const svogame::RunAborted& e) {
    std::cerr << e.what() << "\n";
    if (!e.partial_log().empty()) svogame::emit_csv(e.partial_log(), csv_path);
    return 2;
  }
}

int run_estimate_replay(const std::string& log_path, const std::string& config_path,
                        std::optional<double> phi2_init) {
  const svogame::ScenarioConfig cfg =
      config_path.empty() ? svogame::default_config() : svogame::load_config(config_path);
  const svogame::SimulationLog log = svogame::load_log_csv(log_path);
  if (log.empty()) {
    std::cerr << "estimate-replay: log has no records\n";
    return 2;
  }
  if (!phi2_init) phi2_init = log.front().phi2_est;
  const std::vector<double> replayed = svogame::replay_estimator(log, cfg, phi2_init);

  double max_dev = 0.0;
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(replayed[i] - log[i].phi2_est));
  }
  std::printf("steps=%zu final_logged=%.9g final_replayed=%.9g max_deviation=%.3g\n",
              replayed.size(), log.back().phi2_est, replayed.back(), max_dev);
  return 0;
}

int run_grid(const std::string& config_path, const std::vector<std::string>& svo_list,
             const std::string& out_dir, unsigned seed, int max_steps) {
  const svogame::ScenarioConfig cfg =
      config_path.empty() ? svogame::default_config() : svogame::load_config(config_path);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  int worst = 0;
  for (std::size_t i = 0; i < svo_list.size(); ++i) {
    svogame::RunSpec spec;
    spec.config = cfg;
    spec.hdv.true_phi2 = parse_svo(svo_list[i]);
    spec.seed = seed;
    if (max_steps > 0) spec.max_steps = max_steps;
    try {
      const svogame::SimulationLog log = svogame::run(spec);
      const auto& last = log.back();
      std::printf("phi2_true=%.6g order=%s estimate=%.6g abs_error=%.3g min_dist=%.6g steps=%zu\n",
                  spec.hdv.true_phi2, crossing_order(log).c_str(), last.phi2_est,
                  std::abs(last.phi2_est - spec.hdv.true_phi2),
                  std::sqrt(svogame::min_squared_distance(log)), log.size() - 1);
      if (!out_dir.empty()) {
        svogame::emit_csv(log, out_dir + "/run_" + std::to_string(i) + ".csv");
      }
    } catch (const svogame::RunAborted& e) {
      std::printf("phi2_true=%.6g aborted: %s\n", spec.hdv.true_phi2, e.what());
      worst = 2;
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SVO-adaptive merging planner and simulator"};
  app.require_subcommand(1);

  std::string config_path, svo_text, out_dir, log_path;
  std::vector<std::string> svo_list;
  std::optional<double> phi2_init;
  unsigned seed = 0;
  int max_steps = 0;

  CLI::App* simulate = app.add_subcommand("simulate", "Run one closed-loop merging simulation");
  simulate->add_option("--config", config_path, "Scenario config file")->required();
  simulate->add_option("--hdv-svo", svo_text, "HDV ground-truth SVO: radians or egoistic/altruistic")
      ->required();
  simulate->add_option("--out", out_dir, "Output directory for log.csv and snapshots.json")
      ->required();
  simulate->add_option("--seed", seed, "Noise seed");
  simulate->add_option("--max-steps", max_steps, "Step cap override");

  CLI::App* replay = app.add_subcommand("estimate-replay", "Re-run the estimator over a logged run");
  replay->add_option("--log", log_path, "CSV log produced by simulate")->required();
  replay->add_option("--config", config_path, "Scenario config file (defaults when omitted)");
  replay->add_option("--phi2-init", phi2_init, "Estimator start angle (defaults to the logged one)");

  CLI::App* grid = app.add_subcommand("grid", "Sweep ground-truth SVO values");
  grid->add_option("--svo-list", svo_list, "Comma-separated SVO values or presets")
      ->required()
      ->delimiter(',');
  grid->add_option("--config", config_path, "Scenario config file (defaults when omitted)");
  grid->add_option("--out", out_dir, "Directory for per-run CSV logs");
  grid->add_option("--seed", seed, "Noise seed");
  grid->add_option("--max-steps", max_steps, "Step cap override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage mistakes map onto the config-error exit code; help stays 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (simulate->parsed()) return run_simulate(config_path, svo_text, out_dir, seed, max_steps);
    if (replay->parsed()) return run_estimate_replay(log_path, config_path, phi2_init);
    return run_grid(config_path, svo_list, out_dir, seed, max_steps);
  } catch (const svogame::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const svogame::SolverError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
