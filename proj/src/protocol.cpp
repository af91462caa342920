#include "mason/protocol.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <sstream>

namespace mason {

namespace {

constexpr const char* kKindNames[] = {"REQUEST",      "HELLO_I", "ACK",
                                      "RAND_CONTRIB", "TRANSMIT", "HELLO_II",
                                      "COMMIT",       "REVEAL"};

// phase rank per message kind; a valid trace never goes backwards
int phase_rank(MessageKind k) {
  switch (k) {
    case MessageKind::Request:
      return 0;
    case MessageKind::HelloI:
    case MessageKind::Ack:
      return 1;
    case MessageKind::RandContrib:
      return 2;
    case MessageKind::Transmit:
    case MessageKind::HelloII:
      return 3;
    case MessageKind::Commit:
      return 4;
    case MessageKind::Reveal:
      return 5;
  }
  return -1;
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void append_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  append_u32(out, static_cast<std::uint32_t>(v));
}

std::uint64_t digest_prefix(const Digest256& d) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
  return v;
}

Digest256 contribution_for(std::uint64_t trial_seed, IdentityId id) {
  std::uint8_t buf[12];
  const std::uint64_t s = trial_seed;
  std::memcpy(buf, &s, 8);
  std::memcpy(buf + 8, &id, 4);
  return sha256(buf, sizeof(buf));
}

}  // namespace

const char* message_kind_name(MessageKind k) {
  return kKindNames[static_cast<int>(k)];
}

std::optional<MessageKind> parse_message_kind(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kKindNames[i]) return static_cast<MessageKind>(i);
  return std::nullopt;
}

const char* abort_reason_name(AbortReason r) {
  switch (r) {
    case AbortReason::None:
      return "none";
    case AbortReason::JammingSuspected:
      return "jamming-suspected";
    case AbortReason::TooManyIdentities:
      return "too-many-identities";
  }
  return "?";
}

Digest256 sha256(const std::uint8_t* data, std::size_t len) {
  Digest256 d;
  unsigned int out_len = 0;
  EVP_Digest(data, len, d.bytes.data(), &out_len, EVP_sha256(), nullptr);
  return d;
}

Digest256 sha256(const std::vector<std::uint8_t>& data) {
  return sha256(data.data(), data.size());
}

std::string hex_digest(const Digest256& d, std::size_t truncate_bytes) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  const std::size_t n = std::min<std::size_t>(truncate_bytes, d.bytes.size());
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kHex[d.bytes[i] >> 4]);
    out.push_back(kHex[d.bytes[i] & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> canonical_serialization(const ObservationMatrix& m,
                                                  IdentityId observer) {
  // iteration order (transmitter, probe) ascending is already the sorted
  // tuple order for a fixed observer
  std::vector<std::uint8_t> out;
  for (IdentityId tx = 0; tx < m.identity_count(); ++tx) {
    for (std::size_t p = 0; p < m.probes(); ++p) {
      if (!m.has(observer, tx, p)) continue;
      append_u32(out, observer);
      append_u32(out, tx);
      append_u32(out, static_cast<std::uint32_t>(p));
      append_i32(out, static_cast<std::int32_t>(
                          std::lround(m.get(observer, tx, p) * 100.0)));
    }
  }
  return out;
}

std::size_t World::identity_count() const {
  std::size_t n = 0;
  for (const auto& wn : nodes) n += wn.identities.size();
  return n;
}

std::vector<std::size_t> World::identity_owner() const {
  std::vector<std::size_t> owner(identity_count(), 0);
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (IdentityId id : nodes[k].identities) owner[id] = k;
  return owner;
}

void TraceWriter::record(double t_ms, MessageKind kind, IdentityId sender,
                         const std::string& digest) {
  if (!out_) return;
  (*out_) << t_ms << ' ' << message_kind_name(kind) << ' ' << sender << ' '
          << (digest.empty() ? "-" : digest) << '\n';
}

ProbeSchedule build_schedule(const std::vector<Digest256>& contribs,
                             const std::vector<IdentityId>& roster,
                             std::size_t s, double response_deadline_ms) {
  if (contribs.size() != roster.size())
    throw DomainError("build_schedule: one contribution per identity required");

  std::vector<IdentityId> sorted = roster;
  std::sort(sorted.begin(), sorted.end());
  // contribs are positional with roster; concatenate in identity order
  std::vector<std::uint8_t> cat;
  cat.reserve(sorted.size() * 32);
  for (IdentityId id : sorted) {
    const auto it = std::find(roster.begin(), roster.end(), id);
    const auto& c = contribs[static_cast<std::size_t>(it - roster.begin())];
    cat.insert(cat.end(), c.bytes.begin(), c.bytes.end());
  }

  ProbeSchedule sch;
  sch.seed = sha256(cat);
  sch.response_deadline_ms = response_deadline_ms;
  const std::uint64_t seed64 = digest_prefix(sch.seed);
  sch.order.reserve(sorted.size() * s);
  for (std::size_t round = 0; round < s; ++round) {
    std::vector<IdentityId> perm = sorted;
    Rng rng = make_rng(mix_seed(seed64, round));
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(perm[i - 1], perm[pick(rng)]);
    }
    sch.order.insert(sch.order.end(), perm.begin(), perm.end());
  }
  return sch;
}

Phase1Result run_phase1(const World& world, const ProtocolConfig& cfg,
                        TraceWriter& trace) {
  Phase1Result res;
  double t = 0.0;
  trace.record(t, MessageKind::Request, kInitiator, "");

  struct Pending {
    IdentityId id;
    std::size_t node;
  };
  std::vector<Pending> pending;
  for (std::size_t k = 0; k < world.nodes.size(); ++k)
    for (IdentityId id : world.nodes[k].identities)
      if (id != kInitiator) pending.push_back({id, k});
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.id < b.id; });

  res.roster.push_back(kInitiator);
  std::size_t quiet = 0;
  std::size_t cursor = 0;
  while (t < cfg.phase1_timeout_ms) {
    if (pending.empty()) {
      ++quiet;
      t += cfg.slot_ms;
      if (quiet >= 3) {  // channel idle: all HELLO-Is ACKed
        res.end_ms = t;
        return res;
      }
      continue;
    }
    quiet = 0;
    const Pending p = pending[cursor % pending.size()];
    t += cfg.slot_ms;
    trace.record(t, MessageKind::HelloI, p.id, "");
    if (world.nodes[p.node].hello_suppressed) {
      // jammed: never ACKed, retransmits forever
      ++cursor;
      continue;
    }
    t += cfg.slot_ms;
    trace.record(t, MessageKind::Ack, kInitiator, "");
    if (res.roster.size() >= cfg.identity_cap) {
      res.abort = AbortReason::TooManyIdentities;
      res.end_ms = t;
      return res;
    }
    res.roster.push_back(p.id);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(
                                        cursor % pending.size()));
  }
  res.abort = AbortReason::JammingSuspected;
  res.end_ms = t;
  return res;
}

Phase2Result run_phase2(const ProbeSchedule& schedule, const World& world,
                        const ProtocolConfig& cfg, std::uint64_t trial_seed,
                        TraceWriter& trace, MobileAttacker* mobile,
                        double start_ms) {
  const std::size_t n = world.identity_count();
  const auto owner = world.identity_owner();
  Phase2Result res;
  res.logs = ObservationMatrix(n, cfg.probes);
  res.initiator_series.assign(n, {});
  AttenuationCache cache(trial_seed);
  std::vector<std::size_t> probe_idx(n, 0);
  std::vector<std::uint8_t> late(n, 0);

  double t = start_ms;
  for (IdentityId tx : schedule.order) {
    t += cfg.slot_ms;
    trace.record(t, MessageKind::Transmit, kInitiator, "");
    const std::size_t tx_node = owner[tx];
    const WorldNode& wn = world.nodes[tx_node];

    if (wn.response_latency_ms > schedule.response_deadline_ms && !late[tx]) {
      late[tx] = 1;
      res.rejected_late.push_back(tx);
    }

    NodeState tx_state;
    if (mobile && wn.node.role == NodeRole::SybilAttacker &&
        mobile->node.node_id == wn.node.node_id) {
      // slot = position index of this identity within the node's claims
      const auto& ids = wn.identities;
      const std::size_t slot = static_cast<std::size_t>(
          std::find(ids.begin(), ids.end(), tx) - ids.begin());
      tx_state = mobile_attacker_step(*mobile, slot, t);
    } else {
      tx_state.position = wn.node.position;
      if (!wn.identity_positions.empty()) {
        const auto& ids = wn.identities;
        const std::size_t slot = static_cast<std::size_t>(
            std::find(ids.begin(), ids.end(), tx) - ids.begin());
        if (slot < wn.identity_positions.size())
          tx_state.position = wn.identity_positions[slot];
      }
      tx_state.orientation_deg = wn.node.orientation_deg;
      tx_state.node_id = wn.node.node_id;
    }

    const std::size_t p = probe_idx[tx]++;
    trace.record(t + wn.response_latency_ms, MessageKind::HelloII, tx, "");

    for (std::size_t rxn = 0; rxn < world.nodes.size(); ++rxn) {
      if (rxn == tx_node) continue;
      const WorldNode& rw = world.nodes[rxn];
      NodeState rx_state;
      rx_state.position = rw.node.position;
      rx_state.orientation_deg = rw.node.orientation_deg;
      rx_state.node_id = rw.node.node_id;
      double rssi;
      try {
        rssi = true_rssi(tx_state, rx_state, wn.node.tx_power_dbm,
                         world.channel, cache, world.radio,
                         mix_seed(tx, p, rw.node.node_id));
      } catch (const DomainError&) {
        continue;  // coincident positions: no usable observation
      }
      if (!world.radio.audible(rssi)) continue;
      for (IdentityId rid : rw.identities) res.logs.set(rid, tx, p, rssi);
      if (rxn == 0) res.initiator_series[tx].push_back(rssi);
    }
    t += wn.response_latency_ms;
  }
  res.end_ms = t;
  return res;
}

Phase3Result run_phase3(const ObservationMatrix& reported,
                        const std::vector<IdentityId>& roster,
                        const std::vector<IdentityId>& tamper,
                        const std::vector<IdentityId>& withhold,
                        double start_ms, const ProtocolConfig& cfg,
                        TraceWriter& trace) {
  Phase3Result res;
  res.admitted = reported;
  double t = start_ms;

  std::vector<Digest256> commitments(reported.identity_count());
  for (IdentityId id : roster) {
    commitments[id] = sha256(canonical_serialization(reported, id));
    t += cfg.slot_ms;
    trace.record(t, MessageKind::Commit, id, hex_digest(commitments[id]));
  }

  auto in = [](const std::vector<IdentityId>& v, IdentityId id) {
    return std::find(v.begin(), v.end(), id) != v.end();
  };

  for (IdentityId id : roster) {
    if (in(withhold, id)) {
      res.admitted.drop_observer(id);
      res.dropped.push_back(id);
      continue;
    }
    auto revealed = canonical_serialization(reported, id);
    if (in(tamper, id) && !revealed.empty()) revealed[0] ^= 0x01;
    t += cfg.slot_ms;
    const Digest256 d = sha256(revealed);
    trace.record(t, MessageKind::Reveal, id, hex_digest(d));
    if (!(d == commitments[id])) {
      res.admitted.drop_observer(id);
      res.dropped.push_back(id);
    }
  }
  res.end_ms = t;
  return res;
}

bool motion_filter_pass(const std::vector<double>& series, double threshold) {
  if (series.size() < 2) return false;
  double sum = 0.0;
  for (double v : series) sum += v;
  const double mean = sum / static_cast<double>(series.size());
  double sq = 0.0;
  for (double v : series) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(series.size() - 1));
  return sd <= threshold;
}

RoundOutcome classify_round(double accel_since_last_mps2, bool first_round,
                            const ObservationMatrix& matrix,
                            const std::vector<std::vector<double>>& series,
                            const std::vector<IdentityId>& rejected_late,
                            const std::vector<IdentityId>& dropped_rows,
                            const SignalprintThresholds& t,
                            const GammaConfig& g, Policy policy,
                            const ProtocolConfig& cfg, std::uint64_t seed) {
  RoundOutcome out;
  out.rejected_late = rejected_late;
  out.dropped_rows = dropped_rows;
  if (!first_round && accel_since_last_mps2 < cfg.accel_gate_mps2) {
    out.deferred = true;
    return out;
  }

  const std::size_t n = matrix.identity_count();
  std::vector<std::uint8_t> rejected(n, 0);
  for (IdentityId id : rejected_late) rejected[id] = 1;
  for (IdentityId i = 1; i < n; ++i) {
    if (i >= series.size() || !motion_filter_pass(series[i], cfg.motion_std_dbm)) {
      if (!rejected[i]) out.rejected_motion.push_back(i);
      rejected[i] = 1;
    }
  }

  // rejected identities are untrusted observers too
  ObservationMatrix filtered = matrix;
  for (IdentityId i = 1; i < n; ++i)
    if (rejected[i]) filtered.drop_observer(i);

  CandidateSet cands(filtered, t, g, seed);
  out.classification = policy == Policy::MaxSybil
                           ? max_sybil_select(cands)
                           : find_consistent_subset(cands);
  for (IdentityId i = 1; i < n; ++i)
    if (rejected[i])
      out.classification.selected_view.set_label(i, View::Label::Rejected);
  return out;
}

SessionResult run_session(const World& world, const ProtocolConfig& cfg,
                          const SignalprintThresholds& t, const GammaConfig& g,
                          Policy policy, const AttackerStrategy* strategy,
                          const std::vector<IdentityId>& attacker_ids,
                          std::uint64_t trial_seed, std::ostream* trace_out) {
  SessionResult res;
  TraceWriter trace(trace_out);

  Phase1Result p1 = run_phase1(world, cfg, trace);
  if (p1.abort != AbortReason::None) {
    res.abort = p1.abort;
    res.outcome.abort = p1.abort;
    res.end_ms = p1.end_ms;
    return res;
  }
  res.roster = p1.roster;

  std::vector<Digest256> contribs;
  contribs.reserve(p1.roster.size());
  double t_ms = p1.end_ms;
  for (IdentityId id : p1.roster) {
    contribs.push_back(contribution_for(trial_seed, id));
    t_ms += cfg.slot_ms;
    trace.record(t_ms, MessageKind::RandContrib, id,
                 hex_digest(contribs.back()));
  }
  ProbeSchedule schedule =
      build_schedule(contribs, p1.roster, cfg.probes, cfg.response_deadline_ms);

  MobileAttacker mob;
  MobileAttacker* mobp = nullptr;
  if (strategy && strategy->kind == AttackKind::Mobile) {
    for (const auto& wn : world.nodes) {
      if (wn.node.role != NodeRole::SybilAttacker) continue;
      mob.node = wn.node;
      mob.switch_latency_ms = strategy->switch_latency_ms;
      mob.identity_targets = wn.identity_positions;
      mob.current = wn.node.position;
      mobp = &mob;
      break;
    }
  }

  Phase2Result p2 =
      run_phase2(schedule, world, cfg, trial_seed, trace, mobp, t_ms);
  res.truth = p2.logs;

  ObservationMatrix reported = p2.logs;
  if (strategy && strategy->kind != AttackKind::Mobile &&
      !attacker_ids.empty()) {
    std::vector<IdentityId> targets;
    std::vector<std::uint8_t> is_attacker(p2.logs.identity_count(), 0);
    for (IdentityId a : attacker_ids) is_attacker[a] = 1;
    for (IdentityId i = 1; i < p2.logs.identity_count(); ++i)
      if (!is_attacker[i]) targets.push_back(i);
    reported = fabricate_observations(*strategy, p2.logs, attacker_ids,
                                      targets, world.radio,
                                      mix_seed(trial_seed, 0x6c696573ULL));
  }

  Phase3Result p3 = run_phase3(reported, p1.roster, {}, {}, p2.end_ms, cfg,
                               trace);
  res.admitted = p3.admitted;

  res.outcome = classify_round(
      /*accel=*/cfg.accel_gate_mps2, /*first_round=*/true, p3.admitted,
      p2.initiator_series, p2.rejected_late, p3.dropped, t, g, policy, cfg,
      mix_seed(trial_seed, 0x636c7366ULL));
  res.end_ms = p3.end_ms;
  return res;
}

std::optional<std::string> validate_trace(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  int rank = -1;
  double last_t = -1.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t;
    std::string kind_s, sender_s, digest_s;
    if (!(ls >> t >> kind_s >> sender_s >> digest_s))
      return "line " + std::to_string(lineno) + ": malformed record";
    const auto kind = parse_message_kind(kind_s);
    if (!kind)
      return "line " + std::to_string(lineno) + ": unknown kind " + kind_s;
    if (t < last_t)
      return "line " + std::to_string(lineno) + ": time goes backwards";
    last_t = t;
    const int r = phase_rank(*kind);
    if (r < rank)
      return "line " + std::to_string(lineno) + ": " + kind_s +
             " after a later phase";
    rank = r;
  }
  return std::nullopt;
}

}  // namespace mason
