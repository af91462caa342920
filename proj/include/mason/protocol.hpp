#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mason/adversary.hpp"
#include "mason/channel.hpp"
#include "mason/classification.hpp"
#include "mason/observation.hpp"

namespace mason {

enum class MessageKind {
  Request,
  HelloI,
  Ack,
  RandContrib,
  Transmit,
  HelloII,
  Commit,
  Reveal
};

const char* message_kind_name(MessageKind k);
std::optional<MessageKind> parse_message_kind(const std::string& name);

struct Digest256 {
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const Digest256&) const = default;
};

Digest256 sha256(const std::uint8_t* data, std::size_t len);
Digest256 sha256(const std::vector<std::uint8_t>& data);
std::string hex_digest(const Digest256& d, std::size_t truncate_bytes = 8);

// Canonical observation serialization: (observer, transmitter, probe,
// RSSI x 100) tuples with integer fields little-endian, sorted; the unit of
// commitment and of trace interop.
std::vector<std::uint8_t> canonical_serialization(const ObservationMatrix& m,
                                                  IdentityId observer);

enum class AbortReason { None, JammingSuspected, TooManyIdentities };
const char* abort_reason_name(AbortReason r);

struct ProtocolConfig {
  std::size_t identity_cap = 400;
  double phase1_timeout_ms = 15000.0;
  double response_deadline_ms = 10.0;
  std::size_t probes = 14;  // HELLO-II transmissions per identity
  double slot_ms = 12.0;    // per-packet round-trip airtime
  double motion_std_dbm = 2.5;
  double accel_gate_mps2 = 2.0;

  bool valid() const {
    return identity_cap >= 2 && phase1_timeout_ms > 0 &&
           response_deadline_ms > 0 && probes >= 2 && slot_ms > 0;
  }
};

// One physical device and the identities it claims. Conforming nodes claim
// exactly one.
struct WorldNode {
  PhysicalNode node;
  std::vector<IdentityId> identities;
  // intended transmit position per claimed identity (attackers pretending
  // to be elsewhere); empty = always transmit from node.position
  std::vector<Position> identity_positions;
  double response_latency_ms = 1.0;
  bool hello_suppressed = false;  // victim of selective jamming
};

struct World {
  std::vector<WorldNode> nodes;
  ChannelModel channel;
  RadioConfig radio;

  std::size_t identity_count() const;
  // index of the owning node per identity; identity 0 must belong to node 0
  std::vector<std::size_t> identity_owner() const;
};

// Event trace sink; one line per message: `t_ms kind sender payload_digest`.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream* out) : out_(out) {}
  void record(double t_ms, MessageKind kind, IdentityId sender,
              const std::string& digest);

 private:
  std::ostream* out_;
};

struct ProbeSchedule {
  Digest256 seed;
  std::vector<IdentityId> order;  // |I| * s entries, each identity s times
  double response_deadline_ms = 10.0;
};

// seed = digest of all contributions in canonical (ascending identity)
// order; the order is s seeded permutations of the roster, concatenated.
ProbeSchedule build_schedule(const std::vector<Digest256>& contribs,
                             const std::vector<IdentityId>& roster,
                             std::size_t s, double response_deadline_ms);

struct Phase1Result {
  std::vector<IdentityId> roster;
  AbortReason abort = AbortReason::None;
  double end_ms = 0.0;
};

Phase1Result run_phase1(const World& world, const ProtocolConfig& cfg,
                        TraceWriter& trace);

struct Phase2Result {
  ObservationMatrix logs;  // true per-node observations, pre-reporting
  std::vector<IdentityId> rejected_late;
  // initiator's per-probe series per identity, for the motion filter
  std::vector<std::vector<double>> initiator_series;
  double end_ms = 0.0;
};

Phase2Result run_phase2(const ProbeSchedule& schedule, const World& world,
                        const ProtocolConfig& cfg, std::uint64_t trial_seed,
                        TraceWriter& trace, MobileAttacker* mobile = nullptr,
                        double start_ms = 0.0);

struct Phase3Result {
  ObservationMatrix admitted;
  std::vector<IdentityId> dropped;  // digest mismatch or withheld reveal
  AbortReason abort = AbortReason::None;
  double end_ms = 0.0;
};

// Commit round then reveal round over each identity's reported rows.
// `reported` may differ from the truthful logs (liars commit to their
// lies); `tamper` identities reveal values differing from their
// commitment, `withhold` identities never reveal — both get their rows
// dropped.
Phase3Result run_phase3(const ObservationMatrix& reported,
                        const std::vector<IdentityId>& roster,
                        const std::vector<IdentityId>& tamper,
                        const std::vector<IdentityId>& withhold,
                        double start_ms, const ProtocolConfig& cfg,
                        TraceWriter& trace);

// Sample standard deviation (n-1) of the initiator's per-probe series;
// reject above the threshold or with fewer than two probes.
bool motion_filter_pass(const std::vector<double>& series, double threshold);

struct RoundOutcome {
  bool deferred = false;
  AbortReason abort = AbortReason::None;
  ClassificationResult classification;
  std::vector<IdentityId> rejected_motion;
  std::vector<IdentityId> rejected_late;
  std::vector<IdentityId> dropped_rows;
};

// Classification gate: defer unless the node has accumulated at least the
// acceleration gate since its previous round (first rounds always proceed),
// then motion-filter and classify.
RoundOutcome classify_round(double accel_since_last_mps2, bool first_round,
                            const ObservationMatrix& matrix,
                            const std::vector<std::vector<double>>& series,
                            const std::vector<IdentityId>& rejected_late,
                            const std::vector<IdentityId>& dropped_rows,
                            const SignalprintThresholds& t,
                            const GammaConfig& g, Policy policy,
                            const ProtocolConfig& cfg, std::uint64_t seed);

struct SessionResult {
  AbortReason abort = AbortReason::None;
  RoundOutcome outcome;
  std::vector<IdentityId> roster;
  ObservationMatrix truth;     // pre-lie logs
  ObservationMatrix admitted;  // post phase III
  double end_ms = 0.0;
};

// One full session: phases I-III plus classification, with optional
// falsified reporting by the attacker's identities.
SessionResult run_session(const World& world, const ProtocolConfig& cfg,
                          const SignalprintThresholds& t, const GammaConfig& g,
                          Policy policy, const AttackerStrategy* strategy,
                          const std::vector<IdentityId>& attacker_ids,
                          std::uint64_t trial_seed, std::ostream* trace_out);

// Trace replay: validates the line grammar and the phase ordering of the
// recorded message kinds. Returns an error description or nullopt.
std::optional<std::string> validate_trace(std::istream& in);

}  // namespace mason
