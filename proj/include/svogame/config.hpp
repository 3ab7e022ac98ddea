#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace svogame {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weights, horizons, bounds and geometry of the merging scenario.
// File keys: w1..w5, dt, v_min, v_max, u_min, u_max, H, L, eta, r, Lc,
// barrier_epsilon, n_inner.
struct ScenarioConfig {
  double w1{1.0};   // CAV control effort
  double w2{5.0};   // CAV speed deviation
  double w3{1.0};   // HDV control effort
  double w4{5.0};   // HDV speed deviation
  double w5{1e7};   // collision barrier
  double dt{0.1};   // s
  double v_min{0.0};    // m/s
  double v_max{30.0};   // m/s
  double u_min{-10.0};  // m/s^2
  double u_max{5.0};    // m/s^2
  int horizon{20};             // H, control horizon steps
  int estimation_horizon{20};  // L, estimation horizon steps
  double eta{1.0};             // estimator learning rate
  double r{10.0};              // m, safety threshold
  double control_zone_length{120.0};  // Lc, m
  double barrier_epsilon{1.0};        // barrier saturation threshold
  int n_inner{1};  // gradient-ascent repeats per estimator update
};

inline ScenarioConfig default_config() { return ScenarioConfig{}; }

inline void validate_config(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(cfg.w1 > 0.0 && cfg.w2 > 0.0 && cfg.w3 > 0.0 && cfg.w4 > 0.0 && cfg.w5 > 0.0,
          "weights w1..w5 must be positive");
  require(cfg.dt > 0.0, "dt must be positive");
  require(cfg.v_min < cfg.v_max, "v_min must be below v_max");
  require(cfg.u_min < 0.0 && cfg.u_max > 0.0, "u_min must be negative and u_max positive");
  require(cfg.horizon >= 1, "H must be at least 1");
  require(cfg.estimation_horizon >= 1, "L must be at least 1");
  require(cfg.eta > 0.0, "eta must be positive");
  require(cfg.r > 0.0, "r must be positive");
  require(cfg.control_zone_length > 0.0, "Lc must be positive");
  require(cfg.barrier_epsilon > 0.0, "barrier_epsilon must be positive");
  require(cfg.n_inner >= 1, "n_inner must be at least 1");
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_number(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value '" + value + "' for key '" + key + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config: trailing characters in value '" + value + "' for key '" + key + "'");
  }
  return out;
}

inline int parse_count(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  const int n = static_cast<int>(v);
  if (static_cast<double>(n) != v) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
  return n;
}

}  // namespace detail

// Flat `key = value` lines, '#' starts a comment, unknown keys are an error.
inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "w1") cfg.w1 = detail::parse_number(key, value);
    else if (key == "w2") cfg.w2 = detail::parse_number(key, value);
    else if (key == "w3") cfg.w3 = detail::parse_number(key, value);
    else if (key == "w4") cfg.w4 = detail::parse_number(key, value);
    else if (key == "w5") cfg.w5 = detail::parse_number(key, value);
    else if (key == "dt") cfg.dt = detail::parse_number(key, value);
    else if (key == "v_min") cfg.v_min = detail::parse_number(key, value);
    else if (key == "v_max") cfg.v_max = detail::parse_number(key, value);
    else if (key == "u_min") cfg.u_min = detail::parse_number(key, value);
    else if (key == "u_max") cfg.u_max = detail::parse_number(key, value);
    else if (key == "H") cfg.horizon = detail::parse_count(key, value);
    else if (key == "L") cfg.estimation_horizon = detail::parse_count(key, value);
    else if (key == "eta") cfg.eta = detail::parse_number(key, value);
    else if (key == "r") cfg.r = detail::parse_number(key, value);
    else if (key == "Lc") cfg.control_zone_length = detail::parse_number(key, value);
    else if (key == "barrier_epsilon") cfg.barrier_epsilon = detail::parse_number(key, value);
    else if (key == "n_inner") cfg.n_inner = detail::parse_count(key, value);
    else throw ConfigError("config: unknown key '" + key + "' at line " + std::to_string(lineno));
  }
  validate_config(cfg);
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace svogame
