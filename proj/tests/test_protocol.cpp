#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mason/protocol.hpp"

using namespace mason;

TEST_CASE("sha256 known vector") {
  const char* msg = "abc";
  const Digest256 d =
      sha256(reinterpret_cast<const std::uint8_t*>(msg), 3);
  CHECK(hex_digest(d, 32) ==
        "ba7816bf8f01cfea414140de5dae2223"
        "b00361a396177a9cb410ff61f20015ad");
  CHECK(hex_digest(d) == "ba7816bf8f01cfea");
}

TEST_CASE("canonical serialization is the frozen tuple layout") {
  ObservationMatrix m(2, 1);
  m.set(1, 0, 0, -55.25);
  const auto bytes = canonical_serialization(m, 1);
  // (observer=1, tx=0, probe=0, -5525) little-endian
  const std::vector<std::uint8_t> expect{
      0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
      0x00, 0x00, 0x00, 0x00, 0x6b, 0xea, 0xff, 0xff};
  CHECK(bytes == expect);
  // missing entries are skipped entirely
  CHECK(canonical_serialization(m, 0).empty());
}

TEST_CASE("schedule contains every identity exactly s times") {
  const std::vector<IdentityId> roster{0, 3, 1, 2};
  std::vector<Digest256> contribs(4);
  for (std::size_t i = 0; i < 4; ++i) contribs[i].bytes[0] = std::uint8_t(i);
  const ProbeSchedule sch = build_schedule(contribs, roster, 5, 10.0);
  CHECK(sch.order.size() == 20);
  for (IdentityId id : roster)
    CHECK(std::count(sch.order.begin(), sch.order.end(), id) == 5);
  CHECK(sch.response_deadline_ms == 10.0);

  // positional pairing: permuting roster and contributions together does
  // not change the seed or the order
  const std::vector<IdentityId> roster2{2, 0, 3, 1};
  std::vector<Digest256> contribs2(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto pos = std::find(roster.begin(), roster.end(), roster2[i]);
    contribs2[i] = contribs[static_cast<std::size_t>(pos - roster.begin())];
  }
  const ProbeSchedule sch2 = build_schedule(contribs2, roster2, 5, 10.0);
  CHECK(sch2.seed == sch.seed);
  CHECK(sch2.order == sch.order);
}

TEST_CASE("schedule mismatch between roster and contributions throws") {
  CHECK_THROWS_AS(build_schedule(std::vector<Digest256>(3), {0, 1}, 2, 10.0),
                  DomainError);
}

TEST_CASE("one flipped contribution bit reshuffles the schedule") {
  const std::vector<IdentityId> roster{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<Digest256> contribs(8);
  for (std::size_t i = 0; i < 8; ++i) contribs[i].bytes[7] = std::uint8_t(i);
  const ProbeSchedule base = build_schedule(contribs, roster, 4, 10.0);

  std::size_t changed = 0;
  const std::size_t flips = 200;
  for (std::size_t f = 0; f < flips; ++f) {
    auto mut = contribs;
    mut[f % 8].bytes[f / 8 % 32] ^= std::uint8_t(1u << (f % 8));
    const ProbeSchedule sch = build_schedule(mut, roster, 4, 10.0);
    if (sch.order != base.order) ++changed;
  }
  // 8! = 40320 permutations per block; collisions are vanishingly rare
  CHECK(changed >= flips - 2);
}

namespace {

World conforming_world(std::size_t nodes) {
  World w;
  for (std::size_t k = 0; k < nodes; ++k) {
    WorldNode wn;
    wn.node.node_id = static_cast<std::uint32_t>(k);
    wn.node.position = {static_cast<double>(3 * k + 1),
                        static_cast<double>((7 * k) % 5)};
    wn.identities = {static_cast<IdentityId>(k)};
    w.nodes.push_back(wn);
  }
  return w;
}

}  // namespace

TEST_CASE("phase one admits every responsive identity") {
  const World w = conforming_world(10);
  ProtocolConfig cfg;
  TraceWriter trace(nullptr);
  const Phase1Result r = run_phase1(w, cfg, trace);
  CHECK(r.abort == AbortReason::None);
  CHECK(r.roster.size() == 10);
  CHECK(r.roster[0] == kInitiator);
  CHECK(r.end_ms > 0.0);
  CHECK(r.end_ms < cfg.phase1_timeout_ms);
}

TEST_CASE("phase one aborts above the identity cap") {
  World w = conforming_world(2);
  for (IdentityId id = 2; id < 402; ++id)
    w.nodes[1].identities.push_back(id);
  ProtocolConfig cfg;  // cap 400
  TraceWriter trace(nullptr);
  const Phase1Result r = run_phase1(w, cfg, trace);
  CHECK(r.abort == AbortReason::TooManyIdentities);
}

TEST_CASE("a suppressed responder keeps retransmitting until the timeout") {
  World w = conforming_world(4);
  w.nodes[2].hello_suppressed = true;
  ProtocolConfig cfg;
  TraceWriter trace(nullptr);
  const Phase1Result r = run_phase1(w, cfg, trace);
  CHECK(r.abort == AbortReason::JammingSuspected);
  CHECK(r.end_ms >= cfg.phase1_timeout_ms);
}

TEST_CASE("phase two rejects identities that respond too slowly") {
  World w = conforming_world(5);
  w.nodes[3].response_latency_ms = 25.0;  // deadline is 10
  ProtocolConfig cfg;
  cfg.probes = 3;
  TraceWriter trace(nullptr);
  const Phase1Result p1 = run_phase1(w, cfg, trace);
  std::vector<Digest256> contribs(p1.roster.size());
  const ProbeSchedule sch =
      build_schedule(contribs, p1.roster, cfg.probes, cfg.response_deadline_ms);
  const Phase2Result p2 = run_phase2(sch, w, cfg, 77, trace);
  CHECK(p2.rejected_late == std::vector<IdentityId>{3});
  // the initiator heard everyone else on every probe
  for (IdentityId tx = 1; tx < 5; ++tx)
    CHECK(p2.initiator_series[tx].size() == cfg.probes);
  double v = 0.0;
  CHECK(p2.logs.mean(1, 2, v));
}

TEST_CASE("phase three drops tampered and withheld reveals") {
  ObservationMatrix m(4, 2);
  for (IdentityId o = 0; o < 4; ++o)
    for (IdentityId tx = 0; tx < 4; ++tx)
      for (std::size_t p = 0; p < 2; ++p)
        if (o != tx) m.set(o, tx, p, -50.0 - double(o + tx));
  ProtocolConfig cfg;
  TraceWriter trace(nullptr);
  const Phase3Result r =
      run_phase3(m, {0, 1, 2, 3}, /*tamper=*/{2}, /*withhold=*/{3}, 0.0, cfg,
                 trace);
  std::vector<IdentityId> dropped = r.dropped;
  std::sort(dropped.begin(), dropped.end());
  CHECK(dropped == std::vector<IdentityId>{2, 3});
  double v = 0.0;
  CHECK(r.admitted.mean(1, 0, v));        // clean row survives
  CHECK_FALSE(r.admitted.mean(2, 0, v));  // tampered row gone
  CHECK_FALSE(r.admitted.mean(3, 0, v));  // withheld row gone
}

TEST_CASE("phase three admits everything when reveals match") {
  ObservationMatrix m(3, 1);
  m.set(1, 0, 0, -44.0);
  m.set(2, 0, 0, -48.0);
  ProtocolConfig cfg;
  TraceWriter trace(nullptr);
  const Phase3Result r = run_phase3(m, {0, 1, 2}, {}, {}, 0.0, cfg, trace);
  CHECK(r.dropped.empty());
  double a = 0.0;
  REQUIRE(r.admitted.mean(1, 0, a));
  CHECK(a == -44.0);
}

TEST_CASE("motion filter thresholds the sample deviation") {
  // constant series: zero deviation
  CHECK(motion_filter_pass(std::vector<double>(14, -60.0), 2.5));
  // alternating +-5 around the mean: sample sd = sqrt(14*25/13) = 5.19
  std::vector<double> moving;
  for (int i = 0; i < 14; ++i) moving.push_back(i % 2 ? -50.0 : -60.0);
  CHECK_FALSE(motion_filter_pass(moving, 2.5));
  CHECK(motion_filter_pass(moving, 5.2));
  // too short to assess
  CHECK_FALSE(motion_filter_pass({-60.0}, 2.5));
  CHECK_FALSE(motion_filter_pass({}, 2.5));
  // mild jitter passes
  CHECK(motion_filter_pass({-60.0, -61.0, -60.0, -59.0}, 2.5));
}

TEST_CASE("stationary rounds are deferred without fresh motion") {
  ObservationMatrix m(3, 2);
  ProtocolConfig cfg;
  SignalprintThresholds t;
  GammaConfig g;
  const RoundOutcome r =
      classify_round(/*accel=*/0.5, /*first_round=*/false, m, {}, {}, {}, t,
                     g, Policy::Consistency, cfg, 1);
  CHECK(r.deferred);
  const RoundOutcome first =
      classify_round(/*accel=*/0.0, /*first_round=*/true, m, {}, {}, {}, t,
                     g, Policy::Consistency, cfg, 1);
  CHECK_FALSE(first.deferred);
}

TEST_CASE("full session over a conforming world") {
  World w = conforming_world(8);
  ProtocolConfig cfg;
  cfg.probes = 4;
  SignalprintThresholds t;
  GammaConfig g;
  std::ostringstream trace;
  const SessionResult res = run_session(w, cfg, t, g, Policy::Consistency,
                                        nullptr, {}, 2718, &trace);
  CHECK(res.abort == AbortReason::None);
  CHECK(res.roster.size() == 8);
  CHECK_FALSE(res.outcome.deferred);
  CHECK(res.outcome.rejected_motion.empty());

  // the emitted trace replays cleanly
  std::istringstream replay(trace.str());
  CHECK_FALSE(validate_trace(replay).has_value());
  // and contains every message family
  const std::string s = trace.str();
  for (const char* kind : {"REQUEST", "HELLO_I", "ACK", "RAND_CONTRIB",
                           "TRANSMIT", "HELLO_II", "COMMIT", "REVEAL"})
    CHECK(s.find(kind) != std::string::npos);
}

TEST_CASE("sessions are deterministic in the trial seed") {
  World w = conforming_world(6);
  ProtocolConfig cfg;
  cfg.probes = 3;
  SignalprintThresholds t;
  GammaConfig g;
  const SessionResult a = run_session(w, cfg, t, g, Policy::Consistency,
                                      nullptr, {}, 99, nullptr);
  const SessionResult b = run_session(w, cfg, t, g, Policy::Consistency,
                                      nullptr, {}, 99, nullptr);
  for (IdentityId o = 0; o < 6; ++o)
    for (IdentityId tx = 0; tx < 6; ++tx) {
      if (o == tx) continue;
      double x = 0.0, y = 0.0;
      const bool hx = a.truth.mean(o, tx, x);
      const bool hy = b.truth.mean(o, tx, y);
      CHECK(hx == hy);
      if (hx) CHECK(x == y);
    }
}

TEST_CASE("trace validation flags bad grammar and ordering") {
  auto check_error = [](const std::string& text, const std::string& what) {
    std::istringstream in(text);
    const auto err = validate_trace(in);
    REQUIRE(err.has_value());
    CHECK(err->find(what) != std::string::npos);
  };

  check_error("0 REQUEST 0\n", "malformed");
  check_error("0 BANANA 0 -\n", "unknown kind");
  check_error("5 REQUEST 0 -\n2 HELLO_I 1 -\n", "time goes backwards");
  check_error("0 REQUEST 0 -\n1 COMMIT 1 ab\n2 TRANSMIT 0 -\n",
              "after a later phase");

  std::istringstream ok("0 REQUEST 0 -\n1 HELLO_I 1 -\n2 ACK 0 -\n");
  CHECK_FALSE(validate_trace(ok).has_value());
  std::istringstream empty("");
  CHECK_FALSE(validate_trace(empty).has_value());
}

TEST_CASE("a mobile attacker's identities fail the motion filter") {
  // stationary conforming nodes plus one device claiming three identities
  // at distinct pretended positions with a real relocation latency
  World w = conforming_world(5);
  WorldNode atk;
  atk.node.node_id = 5;
  atk.node.position = {20.0, 20.0};
  atk.node.role = NodeRole::SybilAttacker;
  atk.identities = {5, 6, 7};
  atk.identity_positions = {{20.0, 20.0}, {24.0, 20.0}, {20.0, 24.0}};
  w.nodes.push_back(atk);

  ProtocolConfig cfg;
  SignalprintThresholds t;
  GammaConfig g;
  AttackerStrategy strat;
  strat.kind = AttackKind::Mobile;
  strat.switch_latency_ms = 400.0;  // cannot keep up with 12 ms slots

  const SessionResult res =
      run_session(w, cfg, t, g, Policy::Consistency, &strat, {5, 6, 7}, 31337,
                  nullptr);
  REQUIRE(res.abort == AbortReason::None);
  std::size_t caught = 0;
  for (IdentityId id : {5u, 6u, 7u}) {
    const bool rejected =
        std::find(res.outcome.rejected_motion.begin(),
                  res.outcome.rejected_motion.end(),
                  id) != res.outcome.rejected_motion.end();
    if (rejected || res.outcome.classification.selected_view.is_sybil(id))
      ++caught;
  }
  CHECK(caught == 3);
}
