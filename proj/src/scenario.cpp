#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "mason/experiments.hpp"

namespace mason {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("scenario line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) fail(line, "not a number: " + v);
    return d;
  } catch (const std::exception&) {
    fail(line, "not a number: " + v);
  }
}

std::size_t to_count(const std::string& v, std::size_t line) {
  const double d = to_double(v, line);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d)))
    fail(line, "not a non-negative integer: " + v);
  return static_cast<std::size_t>(d);
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(lineno, "expected key = value");

    if (key == "conforming")
      cfg.conforming = to_count(value, lineno);
    else if (key == "lns")
      cfg.lns = to_count(value, lineno);
    else if (key == "attacker_nodes")
      cfg.attacker_nodes = to_count(value, lineno);
    else if (key == "sybils_per_node")
      cfg.sybils_per_node = to_count(value, lineno);
    else if (key == "area_m")
      cfg.area_m = to_double(value, lineno);
    else if (key == "min_separation_m")
      cfg.min_separation_m = to_double(value, lineno);
    else if (key == "tx_power_dbm")
      cfg.tx_power_dbm = to_double(value, lineno);
    else if (key == "path_loss_exponent")
      cfg.channel.path_loss_exponent = to_double(value, lineno);
    else if (key == "reference_loss_db")
      cfg.channel.reference_loss_db = to_double(value, lineno);
    else if (key == "sigma_shadow_db")
      cfg.channel.sigma_shadow_db = to_double(value, lineno);
    else if (key == "sigma_meas_db")
      cfg.channel.sigma_meas_db = to_double(value, lineno);
    else if (key == "coherence_length_m")
      cfg.channel.coherence_length_m = to_double(value, lineno);
    else if (key == "orientation_coherence_deg")
      cfg.channel.orientation_coherence_deg = to_double(value, lineno);
    else if (key == "quantization_step")
      cfg.radio.quantization_step = to_double(value, lineno);
    else if (key == "floor_dbm")
      cfg.radio.floor_dbm = to_double(value, lineno);
    else if (key == "attacker") {
      if (value == "none") {
        cfg.attacker_enabled = false;
      } else {
        cfg.attacker_enabled = true;
        if (value == "random-lies")
          cfg.strategy.kind = AttackKind::RandomLies;
        else if (value == "max-sybil-optimal")
          cfg.strategy.kind = AttackKind::MaxSybilOptimal;
        else if (value == "consistency-optimal")
          cfg.strategy.kind = AttackKind::ConsistencyOptimal;
        else if (value == "mobile")
          cfg.strategy.kind = AttackKind::Mobile;
        else
          fail(lineno, "unknown attacker kind: " + value);
      }
    } else if (key == "group_size")
      cfg.strategy.group_size = to_count(value, lineno);
    else if (key == "sigma_pred_dbm")
      cfg.strategy.sigma_pred_dbm = to_double(value, lineno);
    else if (key == "switch_latency_ms")
      cfg.strategy.switch_latency_ms = to_double(value, lineno);
    else if (key == "policy") {
      if (value == "max-sybil")
        cfg.policy = Policy::MaxSybil;
      else if (value == "consistency")
        cfg.policy = Policy::Consistency;
      else
        fail(lineno, "unknown policy: " + value);
    } else if (key == "threshold_dim2")
      cfg.thresholds.dim2 = to_double(value, lineno);
    else if (key == "threshold_dim3")
      cfg.thresholds.dim3 = to_double(value, lineno);
    else if (key == "threshold_dim4")
      cfg.thresholds.dim4 = to_double(value, lineno);
    else if (key == "motion_std_dbm") {
      cfg.thresholds.motion_std = to_double(value, lineno);
      cfg.protocol.motion_std_dbm = cfg.thresholds.motion_std;
    } else if (key == "gamma2")
      cfg.gamma.gamma2 = to_double(value, lineno);
    else if (key == "gamma3")
      cfg.gamma.gamma3 = to_double(value, lineno);
    else if (key == "gamma4")
      cfg.gamma.gamma4 = to_double(value, lineno);
    else if (key == "receiver_set_size")
      cfg.gamma.n = to_count(value, lineno);
    else if (key == "growth_looseness")
      cfg.gamma.growth_looseness = to_double(value, lineno);
    else if (key == "candidate_multiplier")
      cfg.gamma.candidate_multiplier = to_count(value, lineno);
    else if (key == "ratio_tolerance")
      cfg.gamma.ratio_tolerance = to_double(value, lineno);
    else if (key == "probes") {
      cfg.protocol.probes = to_count(value, lineno);
    } else if (key == "identity_cap")
      cfg.protocol.identity_cap = to_count(value, lineno);
    else if (key == "phase1_timeout_ms")
      cfg.protocol.phase1_timeout_ms = to_double(value, lineno);
    else if (key == "response_deadline_ms")
      cfg.protocol.response_deadline_ms = to_double(value, lineno);
    else if (key == "slot_ms")
      cfg.protocol.slot_ms = to_double(value, lineno);
    else if (key == "seed")
      cfg.master_seed = static_cast<std::uint64_t>(to_count(value, lineno));
    else if (key == "trials")
      cfg.trials = to_count(value, lineno);
    else
      fail(lineno, "unknown key: " + key);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  return parse_scenario(in);
}

}  // namespace mason
