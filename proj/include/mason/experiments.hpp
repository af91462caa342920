#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mason/protocol.hpp"

namespace mason {

struct ScenarioConfig {
  // counts; conforming includes the initiator (identity 0)
  std::size_t conforming = 10;
  std::size_t lns = 0;             // lying non-Sybil nodes, one identity each
  std::size_t attacker_nodes = 0;  // Sybil-claiming physical nodes
  std::size_t sybils_per_node = 0;

  // geometry: uniform placement over a square, rejecting pairs closer than
  // the minimum separation
  double area_m = 30.0;
  double min_separation_m = 1.0;
  double tx_power_dbm = 15.0;

  ChannelModel channel;
  RadioConfig radio;
  AttackerStrategy strategy;
  bool attacker_enabled = false;
  Policy policy = Policy::Consistency;
  SignalprintThresholds thresholds;
  GammaConfig gamma;
  ProtocolConfig protocol;

  std::uint64_t master_seed = 1;
  std::size_t trials = 100;

  std::size_t identity_count() const {
    return conforming + lns + attacker_nodes * sybils_per_node;
  }
  void validate() const;  // throws ConfigError
};

// key = value text; '#' comments; unknown keys are errors with the
// offending line number.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario_file(const std::string& path);

struct TrialResult {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;  // positive = Sybil
  double sybil_ratio = 0.0;  // Sybil fraction of accepted identities
  bool condition1_held = true;
  bool condition3_held = true;
  bool aborted = false;
  bool deferred = false;
  double wall_ms = 0.0;
};

struct Proportion {
  std::size_t hits = 0;
  std::size_t total = 0;
  double value() const;
  double wilson_low(double z = 1.96) const;
  double wilson_high(double z = 1.96) const;
};

struct Aggregate {
  std::vector<TrialResult> trials;
  Proportion sensitivity;  // TP / (TP + FN), pooled
  Proportion specificity;  // TN / (TN + FP), pooled
  double mean_sybil_ratio = 0.0;
  std::size_t aborts = 0;
};

// Ground-truth world for one trial; identities 0..conforming-1 are
// conforming, then lns liars, then the attacker nodes' Sybils.
World build_world(const ScenarioConfig& cfg, std::uint64_t trial_seed);

std::vector<IdentityId> attacker_identities(const ScenarioConfig& cfg);
bool truly_sybil(const ScenarioConfig& cfg, IdentityId id);

TrialResult run_trial(const ScenarioConfig& cfg, std::size_t trial_index,
                      std::ostream* trace = nullptr);

// True observations without the protocol event loop; keyed identically to
// phase II so both paths produce the same matrix.
ObservationMatrix synthesize_truth(const World& world, std::size_t probes,
                                   std::uint64_t trial_seed);

// Deterministic given (config, master seed) regardless of thread count;
// writes one CSV row per trial when `csv` is non-null.
Aggregate run_trials(const ScenarioConfig& cfg, std::size_t threads = 1,
                     std::ostream* csv = nullptr);

void write_trial_csv_header(std::ostream& out);
void write_trial_csv_row(std::ostream& out, std::size_t index,
                         const TrialResult& r);

// One aggregate row per (conforming, lns) grid point, with the analytic
// candidate-success probability and the conservative collapse bound
// alongside the simulated ratio.
void sweep_grid(const ScenarioConfig& tmpl,
                const std::vector<std::size_t>& conforming_axis,
                const std::vector<std::size_t>& lns_axis, std::size_t threads,
                std::ostream& csv);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Sweeps the clustering distance threshold over stationary scenarios with
// known ground truth, motion-filter survivors only. Pairwise distances are
// computed once per trial and re-thresholded per operating point.
std::vector<RocPoint> roc_curve(const ScenarioConfig& cfg,
                                const std::vector<double>& thresholds);

}  // namespace mason
