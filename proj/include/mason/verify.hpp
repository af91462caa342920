#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mason/experiments.hpp"

namespace mason {

struct VerifyReport {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;

  bool ok() const { return failures == 0; }
};

// Every receiver set containing the initiator, sizes 2..max_size.
std::vector<ReceiverSet> exhaustive_receiver_sets(std::size_t identity_count,
                                                  std::size_t max_size);

// Max-claim selection over an exhaustive candidate pool; the reference
// implementation for the worst-case guarantee check.
View exhaustive_max_sybil(const ObservationMatrix& obs,
                          const SignalprintThresholds& t, std::size_t max_size);

// Worst-case guarantee: over seeded adversarial scenarios with arbitrary
// falsified reports, the max-claim view never vouches for more Sybils than
// it collapses honest identities.
VerifyReport verify_worst_case_guarantee(std::size_t cases,
                                         std::size_t max_identities,
                                         std::uint64_t seed);

// The sampled consistency search equals brute force over every
// initiator-anchored receiver set of the working size: same exclusion
// count, selected view among the brute-force optima.
VerifyReport verify_oracle_equivalence(std::size_t cases,
                                       std::size_t max_identities,
                                       std::uint64_t seed);

// Candidate-success formula vs an idealized urn-model Monte Carlo across
// the (conforming, liar) grid.
VerifyReport verify_probability_formula(std::size_t runs_per_point,
                                        double tolerance, std::uint64_t seed);

// Runs all three; the `verify` subcommand's workload.
VerifyReport verify_all(std::size_t cases, std::size_t max_identities,
                        std::uint64_t seed);

}  // namespace mason
