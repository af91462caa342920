#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mason/classification.hpp"
#include "mason/experiments.hpp"

using namespace mason;

TEST_CASE("candidate success probability, no liars") {
  GammaConfig g;
  g.gamma2 = g.gamma3 = g.gamma4 = 0.0;
  CHECK(conforming_probability(10, 0, 4, g) == 1.0);
  CHECK(conforming_probability(5, 0, 4, g) == 1.0);
}

TEST_CASE("candidate success probability, c=20 lns=5") {
  GammaConfig g;
  g.gamma2 = g.gamma3 = g.gamma4 = 0.0;
  // per-candidate success 19/24 * 18/23; failure of all 20 candidates
  // is (1 - 0.6196)^20 = 4.0e-9
  const double p = conforming_probability(20, 5, 4, g);
  CHECK(1.0 - p > 3e-9);
  CHECK(1.0 - p < 5e-9);
}

TEST_CASE("candidate success probability is monotone") {
  GammaConfig g;
  g.gamma2 = g.gamma3 = g.gamma4 = 0.0;
  for (std::size_t c = 5; c < 15; ++c)
    CHECK(conforming_probability(c + 1, 6, 4, g) >=
          conforming_probability(c, 6, 4, g));
  for (std::size_t lns = 0; lns < 8; ++lns)
    CHECK(conforming_probability(8, lns + 1, 4, g) <=
          conforming_probability(8, lns, 4, g));
}

TEST_CASE("candidate success probability domain errors") {
  GammaConfig g;
  CHECK_THROWS_AS(conforming_probability(2, 0, 4, g), DomainError);
  GammaConfig tight;
  tight.gamma3 = 0.4;  // (1-0.4)*3 - 2 < 0
  CHECK_THROWS_AS(conforming_probability(3, 0, 4, tight), DomainError);
}

namespace {

View labeled(std::size_t n, const std::vector<IdentityId>& sybil) {
  View v(n);
  for (IdentityId i : sybil) v.set_label(i, View::Label::Sybil);
  return v;
}

}  // namespace

TEST_CASE("gamma similarity thresholds") {
  // NS1 = {0..19}, NS2 = {0..17, 20, 21}: intersection 18, each side 2
  std::vector<IdentityId> sybil1, sybil2;
  for (IdentityId i = 20; i < 40; ++i) sybil1.push_back(i);
  sybil2 = {18, 19};
  for (IdentityId i = 22; i < 40; ++i) sybil2.push_back(i);
  const View v1 = labeled(40, sybil1);
  const View v2 = labeled(40, sybil2);

  CHECK_FALSE(gamma_similar(v1, v2, 0.05));  // 18/2 = 9 < 18
  CHECK(gamma_similar(v1, v2, 0.10));        // 9 > 8
  CHECK(gamma_similar(v1, v2, 0.10) == gamma_similar(v2, v1, 0.10));
}

TEST_CASE("gamma similarity: identical views always pass") {
  const View v = labeled(10, {3, 4});
  CHECK(gamma_similar(v, v, 0.0));
  CHECK(gamma_similar(v, v, 0.05));
}

TEST_CASE("gamma similarity is symmetric on random views") {
  Rng rng = make_rng(0x67616d73ULL);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    View a(12), b(12);
    for (IdentityId i = 0; i < 12; ++i) {
      if (coin(rng) == 0) a.set_label(i, View::Label::Sybil);
      if (coin(rng) == 0) b.set_label(i, View::Label::Sybil);
    }
    for (double g : {0.05, 0.2, 0.45})
      CHECK(gamma_similar(a, b, g) == gamma_similar(b, a, g));
  }
}

namespace {

ScenarioConfig noise_free_config(std::size_t conforming, std::size_t lns,
                                 std::size_t sybils) {
  ScenarioConfig cfg;
  cfg.conforming = conforming;
  cfg.lns = lns;
  cfg.attacker_nodes = sybils ? 1 : 0;
  cfg.sybils_per_node = sybils;
  cfg.channel.sigma_meas_db = 0.0;
  cfg.protocol.probes = 2;
  return cfg;
}

ObservationMatrix observed(const ScenarioConfig& cfg, std::uint64_t seed,
                           bool liars_lie) {
  const World world = build_world(cfg, seed);
  ObservationMatrix truth =
      synthesize_truth(world, cfg.protocol.probes, seed);
  if (!liars_lie) return truth;
  AttackerStrategy strat;
  strat.kind = AttackKind::RandomLies;
  std::vector<IdentityId> targets;
  for (IdentityId i = 1; i < cfg.conforming; ++i) targets.push_back(i);
  return fabricate_observations(strat, truth, attacker_identities(cfg),
                                targets, cfg.radio, mix_seed(seed, 77));
}

}  // namespace

TEST_CASE("candidate sets: one per identity, grown to size n") {
  const ScenarioConfig cfg = noise_free_config(8, 0, 0);
  const ObservationMatrix obs = observed(cfg, 5, false);
  CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
  CHECK(cands.size() == 7);
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const Candidate& c = cands.candidate(k);
    CHECK(c.set.members[0] == kInitiator);
    CHECK(c.set.members[1] == k + 1);
    CHECK(c.set.size() == cfg.gamma.n);
    CHECK_FALSE(c.insufficient);
    // no duplicate members
    auto m = c.set.members;
    std::sort(m.begin(), m.end());
    CHECK(std::adjacent_find(m.begin(), m.end()) == m.end());
  }
}

TEST_CASE("candidate sets are deterministic in the seed") {
  const ScenarioConfig cfg = noise_free_config(8, 0, 0);
  const ObservationMatrix obs = observed(cfg, 101, false);
  CandidateSet a(obs, cfg.thresholds, cfg.gamma, 42);
  CandidateSet b(obs, cfg.thresholds, cfg.gamma, 42);
  CHECK(a.receiver_sets().size() == b.receiver_sets().size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a.candidate(k).set.members == b.candidate(k).set.members);
}

TEST_CASE("candidate multiplier scales the pool") {
  ScenarioConfig cfg = noise_free_config(8, 0, 0);
  cfg.gamma.candidate_multiplier = 3;
  const ObservationMatrix obs = observed(cfg, 101, false);
  CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
  CHECK(cands.size() == 21);
}

TEST_CASE("max-claim selection picks the view claiming the most") {
  const ScenarioConfig cfg = noise_free_config(8, 0, 3);
  const ObservationMatrix obs = observed(cfg, 7, false);
  CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
  ClassificationResult res = max_sybil_select(cands);
  std::size_t best = 0;
  for (std::size_t k = 0; k < cands.size(); ++k)
    best = std::max(best, cands.candidate(k).view.claimed_sybil_count());
  CHECK(res.selected_view.claimed_sybil_count() == best);
  // the co-located triple is claimed
  CHECK(best >= 3);
}

TEST_CASE("no liars: first candidate is consistent, search exits early") {
  const ScenarioConfig cfg = noise_free_config(10, 0, 3);
  const ObservationMatrix obs = observed(cfg, 9001, false);
  CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
  ClassificationResult res = find_consistent_subset(cands);
  CHECK(res.exclusion_count == 0);
  CHECK(res.excluded.empty());
  CHECK(res.early_exit);
  CHECK(res.selected_index == 0);
  for (IdentityId s : {10u, 11u, 12u}) CHECK(res.selected_view.is_sybil(s));
}

TEST_CASE("random liars are excluded, exactly") {
  const ScenarioConfig cfg = noise_free_config(8, 2, 3);
  const ObservationMatrix obs = observed(cfg, 11, true);
  CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
  ClassificationResult res = find_consistent_subset(cands);
  std::vector<IdentityId> excluded = res.excluded;
  std::sort(excluded.begin(), excluded.end());
  CHECK(excluded == std::vector<IdentityId>{8, 9});
  CHECK(res.selected_view.is_sybil(8));
  CHECK(res.selected_view.is_sybil(9));
}

TEST_CASE("liars and fabricated identities never survive classification") {
  // across seeds the collateral varies, but the liars are always excluded
  // and the co-located triple is always labeled Sybil
  for (std::uint64_t seed : {7ULL, 9ULL, 202ULL, 303ULL, 515ULL, 909ULL}) {
    const ScenarioConfig cfg = noise_free_config(8, 2, 3);
    const ObservationMatrix obs = observed(cfg, seed, true);
    CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
    ClassificationResult res = find_consistent_subset(cands);
    std::vector<IdentityId> excluded = res.excluded;
    std::sort(excluded.begin(), excluded.end());
    const std::vector<IdentityId> liars{8, 9};
    CHECK(std::includes(excluded.begin(), excluded.end(), liars.begin(),
                        liars.end()));
    CHECK(excluded.size() <= 4);
    for (IdentityId s : {10u, 11u, 12u}) CHECK(res.selected_view.is_sybil(s));
  }
}

TEST_CASE("excluded identities are never left in the non-Sybil set") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const ScenarioConfig cfg = noise_free_config(7, 2, 3);
    const ObservationMatrix obs = observed(cfg, seed, true);
    CandidateSet cands(obs, cfg.thresholds, cfg.gamma, 42);
    ClassificationResult res = find_consistent_subset(cands);
    for (IdentityId i : res.excluded)
      CHECK_FALSE(res.selected_view.is_nonsybil(i));
  }
}
