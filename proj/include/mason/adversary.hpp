#pragma once

#include <cstdint>
#include <vector>

#include "mason/channel.hpp"
#include "mason/observation.hpp"
#include "mason/signalprint.hpp"

namespace mason {

enum class AttackKind { RandomLies, MaxSybilOptimal, ConsistencyOptimal, Mobile };

struct AttackerStrategy {
  AttackKind kind = AttackKind::RandomLies;
  std::size_t group_size = 3;     // identities per guess group
  double sigma_pred_dbm = 7.3;    // prediction error of the attacker's
                                  // channel characterization
  std::size_t sybils_per_node = 0;
  double switch_latency_ms = 0.0;  // mobile attackers only

  bool valid() const { return group_size >= 1 && sigma_pred_dbm >= 0.0; }
};

// One guessed initiator-observed RSSI offset per targeted conforming
// identity, relative to the attacker's best prediction (the Gaussian mean).
struct GuessVector {
  std::vector<double> offsets;  // dBm, length = targeted conforming count
  double sum_sq = 0.0;          // enumeration key: lower = more probable
};

// The k most probable quantized guess vectors under i.i.d. N(mean,
// sigma_pred) coordinates: the all-means vector first, then in descending
// joint probability (ascending squared offset norm, 1 dBm steps).
std::vector<GuessVector> optimal_guess_vectors(std::size_t c_count,
                                               double sigma_pred,
                                               std::size_t group_count);

// Replaces every attacker-controlled observer row of `truth` with falsified
// reports. Guess groups report mutually consistent values so that a
// conforming target collapses into the group's bait cluster whenever the
// group's guess is close to the truth; attacker identities outside the
// group get distinct random values so their clusters dissolve.
ObservationMatrix fabricate_observations(const AttackerStrategy& strategy,
                                         const ObservationMatrix& truth,
                                         const std::vector<IdentityId>& attacker_ids,
                                         const std::vector<IdentityId>& targets,
                                         const RadioConfig& radio,
                                         std::uint64_t seed);

// Largest guess error that still collapses a target when a guess group
// controls `group_size` of the signalprint dimensions (the initiator's own
// dimension carries the error).
double collapse_error_window(std::size_t group_size,
                             const SignalprintThresholds& t);

// P(|N(0, sigma)| <= window).
double guess_hit_probability(double window, double sigma);

struct Condition3Result {
  std::size_t breaks = 0;
  std::size_t trials = 0;
  double estimate = 0.0;        // Monte Carlo break frequency
  double analytic_bound = 0.0;  // per-group union bound (upper bound)
  std::size_t group_count = 0;
  double per_target_hit_prob = 0.0;
};

// Monte Carlo estimate of the probability that an optimal consistency
// attacker collapses at least c - lns conforming identities in one round,
// i.e. breaks the "some gamma-consistent subset is mostly honest"
// condition. `window` < 0 selects the default per-coordinate collapse
// window of half the dimension-2 threshold. The analytic bound is the union
// bound over guess groups of a single group landing enough coordinate
// guesses at once.
Condition3Result condition3_break_probability(std::size_t c, std::size_t lns,
                                              double sigma_pred,
                                              const SignalprintThresholds& t,
                                              std::size_t trials,
                                              std::uint64_t seed,
                                              double window = -1.0);

// Expected collapsed-target count per round for a given group size, used to
// pick the max-sybil attacker's partition empirically.
double expected_collapses(std::size_t c, std::size_t group_size,
                          std::size_t group_count, double sigma_pred,
                          const SignalprintThresholds& t, std::size_t trials,
                          std::uint64_t seed);
std::size_t best_group_size(std::size_t c, std::size_t identity_budget,
                            double sigma_pred, const SignalprintThresholds& t,
                            std::size_t trials, std::uint64_t seed);

// A physical attacker that relocates between the per-identity positions it
// pretends to transmit from.
struct MobileAttacker {
  PhysicalNode node;
  double switch_latency_ms = 0.0;
  std::vector<Position> identity_targets;  // index = claimed identity slot
  Position current;                        // position at the last transmit
  double last_transmit_ms = -1.0e18;
};

// Position/orientation the attacker actually transmits from when answering
// a probe for `slot` at time t: the slot's target if the gap since its last
// transmission covers the switch latency, otherwise a point part-way along
// the move.
NodeState mobile_attacker_step(MobileAttacker& m, std::size_t slot,
                               double t_ms);

}  // namespace mason
