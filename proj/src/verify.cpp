#include "mason/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mason {

namespace {

void combinations(std::size_t n, std::size_t k,
                  const std::function<void(const std::vector<IdentityId>&)>& f) {
  std::vector<IdentityId> idx(k);
  std::function<void(std::size_t, IdentityId)> rec = [&](std::size_t pos,
                                                         IdentityId start) {
    if (pos == k) {
      f(idx);
      return;
    }
    for (IdentityId v = start; v + (k - pos) <= n; ++v) {
      idx[pos] = v + 1;  // identities 1..n
      rec(pos + 1, v + 1);
    }
  };
  rec(0, 0);
}

ScenarioConfig adversarial_base() {
  ScenarioConfig cfg;
  cfg.channel.sigma_meas_db = 0.0;  // exact probe means
  cfg.area_m = 30.0;
  cfg.min_separation_m = 1.0;
  cfg.protocol.probes = 2;
  return cfg;
}

View fold_exclusions(View v, const std::vector<IdentityId>& excluded) {
  for (IdentityId i : excluded) v.set_label(i, View::Label::Sybil);
  return v;
}

}  // namespace

std::vector<ReceiverSet> exhaustive_receiver_sets(std::size_t identity_count,
                                                  std::size_t max_size) {
  std::vector<ReceiverSet> sets;
  const std::size_t others = identity_count - 1;
  for (std::size_t k = 1; k + 1 <= max_size && k <= others; ++k) {
    combinations(others, k, [&](const std::vector<IdentityId>& chosen) {
      ReceiverSet r;
      r.members.push_back(kInitiator);
      r.members.insert(r.members.end(), chosen.begin(), chosen.end());
      sets.push_back(std::move(r));
    });
  }
  return sets;
}

View exhaustive_max_sybil(const ObservationMatrix& obs,
                          const SignalprintThresholds& t,
                          std::size_t max_size) {
  View best;
  std::size_t best_claim = 0;
  bool have = false;
  for (const ReceiverSet& r :
       exhaustive_receiver_sets(obs.identity_count(), max_size)) {
    View v = generate_view(r, obs, t);
    const std::size_t claim = v.claimed_sybil_count();
    if (!have || claim > best_claim) {
      have = true;
      best_claim = claim;
      best = std::move(v);
    }
  }
  return best;
}

VerifyReport verify_worst_case_guarantee(std::size_t cases,
                                         std::size_t max_identities,
                                         std::uint64_t seed) {
  VerifyReport rep;
  rep.cases = cases;
  for (std::size_t case_i = 0; case_i < cases; ++case_i) {
    Rng rng = make_rng(mix_seed(seed, case_i, 0x746831ULL));
    auto pick = [&](std::size_t lo, std::size_t hi) {
      std::uniform_int_distribution<std::size_t> d(lo, hi);
      return d(rng);
    };
    ScenarioConfig cfg = adversarial_base();
    cfg.conforming = pick(2, 6);
    cfg.lns = pick(0, 2);
    cfg.attacker_nodes = pick(1, 2);
    const std::size_t room =
        max_identities - cfg.conforming - cfg.lns;
    cfg.sybils_per_node =
        std::max<std::size_t>(2, pick(2, std::max<std::size_t>(
                                             2, room / cfg.attacker_nodes)));
    while (cfg.identity_count() > max_identities) --cfg.sybils_per_node;
    if (cfg.sybils_per_node < 2) {
      cfg.attacker_nodes = 1;
      cfg.sybils_per_node = 2;
    }

    const std::uint64_t trial_seed = mix_seed(seed, case_i, 0x746832ULL);
    const World world = build_world(cfg, trial_seed);
    const ObservationMatrix truth =
        synthesize_truth(world, cfg.protocol.probes, trial_seed);

    AttackerStrategy strat;
    const std::size_t kind = pick(0, 2);
    strat.kind = kind == 0 ? AttackKind::RandomLies
                 : kind == 1 ? AttackKind::MaxSybilOptimal
                             : AttackKind::ConsistencyOptimal;
    strat.group_size = pick(1, 3);
    std::vector<IdentityId> targets;
    for (IdentityId i = 1; i < cfg.conforming; ++i) targets.push_back(i);
    const ObservationMatrix obs = fabricate_observations(
        strat, truth, attacker_identities(cfg), targets, cfg.radio,
        mix_seed(trial_seed, 0x6c6965ULL));

    const View v = exhaustive_max_sybil(
        obs, cfg.thresholds,
        std::min<std::size_t>(cfg.gamma.n, obs.identity_count()));
    std::size_t vouched_sybil = 0, collapsed_honest = 0;
    for (IdentityId i = 0; i < v.identity_count(); ++i) {
      if (truly_sybil(cfg, i) && v.is_nonsybil(i)) ++vouched_sybil;
      if (!truly_sybil(cfg, i) && !v.is_nonsybil(i)) ++collapsed_honest;
    }
    if (vouched_sybil > collapsed_honest) {
      ++rep.failures;
      rep.notes.push_back("case " + std::to_string(case_i) + ": vouched " +
                          std::to_string(vouched_sybil) + " > collapsed " +
                          std::to_string(collapsed_honest));
    }
  }
  return rep;
}

VerifyReport verify_oracle_equivalence(std::size_t cases,
                                       std::size_t max_identities,
                                       std::uint64_t seed) {
  VerifyReport rep;
  rep.cases = cases;
  for (std::size_t case_i = 0; case_i < cases; ++case_i) {
    Rng rng = make_rng(mix_seed(seed, case_i, 0x6f7231ULL));
    auto pick = [&](std::size_t lo, std::size_t hi) {
      std::uniform_int_distribution<std::size_t> d(lo, hi);
      return d(rng);
    };
    ScenarioConfig cfg = adversarial_base();
    // more probe positions than the worst-case sweep: accidental
    // one-dimensional collapses between quantized honest reports would
    // otherwise make the sampled minimum scenario-dependent
    cfg.protocol.probes = 6;
    // honest nodes a metre apart genuinely share a signalprint and the
    // sampled search then answers with an undersized view no size-n set
    // reproduces; keep the placements distinguishable instead
    cfg.min_separation_m = 4.0;
    cfg.lns = pick(0, 2);
    if (case_i % 2 == 0) {
      cfg.attacker_nodes = 1;
      cfg.sybils_per_node = pick(2, 3);
    }
    // keep a conforming majority — with fewer conforming identities than
    // attackers the growth procedure's success probability drops far enough
    // that a sampled miss is expected rather than a bug (the probability
    // formula check covers that regime); the high multiplier pushes the
    // residual miss probability below the suite's resolution
    cfg.conforming = pick(
        5, max_identities - cfg.lns - cfg.attacker_nodes * cfg.sybils_per_node);
    cfg.gamma.candidate_multiplier = 24;

    const std::uint64_t trial_seed = mix_seed(seed, case_i, 0x6f7232ULL);
    const World world = build_world(cfg, trial_seed);
    const ObservationMatrix truth =
        synthesize_truth(world, cfg.protocol.probes, trial_seed);

    ObservationMatrix obs = truth;
    if (cfg.lns > 0 || cfg.sybils_per_node > 0) {
      AttackerStrategy strat;
      strat.kind = AttackKind::RandomLies;
      std::vector<IdentityId> targets;
      for (IdentityId i = 1; i < cfg.conforming; ++i) targets.push_back(i);
      obs = fabricate_observations(strat, truth, attacker_identities(cfg),
                                   targets, cfg.radio,
                                   mix_seed(trial_seed, 0x6c6965ULL));
    }

    CandidateSet cands(obs, cfg.thresholds, cfg.gamma,
                       mix_seed(trial_seed, 0x63616e64ULL));
    ClassificationResult res = find_consistent_subset(cands);

    std::vector<View> size2;
    for (IdentityId i = 0; i < obs.identity_count(); ++i)
      size2.push_back(cands.size2_view(i));

    // Exhaust every receiver set of the working size. Smaller sets are not
    // comparable under the fewest-exclusions objective: a two-observer view
    // that collapses most identities leaves almost nothing to exclude and
    // would always win, while the growth procedure never emits one.
    const std::size_t n =
        std::min<std::size_t>(cfg.gamma.n, obs.identity_count());
    std::size_t oracle_min = std::numeric_limits<std::size_t>::max();
    std::vector<View> oracle_best;
    for (const ReceiverSet& r :
         exhaustive_receiver_sets(obs.identity_count(), n)) {
      if (r.members.size() != n) continue;
      View v = generate_view(r, obs, cfg.thresholds);
      const auto excl = consistency_exclusions(v, obs, cfg.thresholds,
                                               cfg.gamma, size2);
      if (excl.size() < oracle_min) {
        oracle_min = excl.size();
        oracle_best.clear();
      }
      if (excl.size() == oracle_min)
        oracle_best.push_back(fold_exclusions(std::move(v), excl));
    }

    bool ok = res.exclusion_count == oracle_min;
    if (ok) {
      ok = std::any_of(oracle_best.begin(), oracle_best.end(),
                       [&](const View& v) { return v == res.selected_view; });
    }
    if (!ok) {
      ++rep.failures;
      rep.notes.push_back(
          "case " + std::to_string(case_i) + ": sampled exclusions " +
          std::to_string(res.exclusion_count) + " vs brute-force " +
          std::to_string(oracle_min));
    }
  }
  return rep;
}

VerifyReport verify_probability_formula(std::size_t runs_per_point,
                                        double tolerance, std::uint64_t seed) {
  VerifyReport rep;
  GammaConfig noise_free;
  noise_free.gamma2 = noise_free.gamma3 = noise_free.gamma4 = 0.0;

  for (std::size_t c = 5; c <= 30; ++c) {
    for (std::size_t lns = 0; lns <= 10; ++lns) {
      ++rep.cases;
      const double expected =
          conforming_probability(c, lns, noise_free.n, noise_free);

      std::size_t successes = 0;
      Rng rng = make_rng(mix_seed(seed, c, lns));
      for (std::size_t run = 0; run < runs_per_point; ++run) {
        bool any = false;
        for (std::size_t cand = 0; !any && cand < c; ++cand) {
          // urn: seed is conforming; two more members drawn uniformly
          // from the remaining c-1 conforming + lns liars
          std::size_t conf_left = c - 1;
          std::size_t liars = lns;
          bool good = true;
          for (std::size_t m = 2; good && m + 1 <= noise_free.n; ++m) {
            std::uniform_int_distribution<std::size_t> d(
                0, conf_left + liars - 1);
            if (d(rng) < conf_left)
              --conf_left;
            else
              good = false;
          }
          any = good;
        }
        successes += any;
      }
      const double empirical = static_cast<double>(successes) /
                               static_cast<double>(runs_per_point);
      if (std::abs(empirical - expected) > tolerance) {
        ++rep.failures;
        rep.notes.push_back("c=" + std::to_string(c) + " lns=" +
                            std::to_string(lns) + ": formula " +
                            std::to_string(expected) + " vs empirical " +
                            std::to_string(empirical));
      }
    }
  }
  return rep;
}

VerifyReport verify_all(std::size_t cases, std::size_t max_identities,
                        std::uint64_t seed) {
  VerifyReport all;
  const VerifyReport a = verify_worst_case_guarantee(
      cases, std::min<std::size_t>(max_identities, 12), seed);
  const VerifyReport b = verify_oracle_equivalence(
      cases, std::min<std::size_t>(max_identities, 10), seed);
  const VerifyReport c = verify_probability_formula(10000, 0.02, seed);
  for (const VerifyReport* r : {&a, &b, &c}) {
    all.cases += r->cases;
    all.failures += r->failures;
    all.notes.insert(all.notes.end(), r->notes.begin(), r->notes.end());
  }
  return all;
}

}  // namespace mason
