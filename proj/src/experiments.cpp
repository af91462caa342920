#include "mason/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <thread>

namespace mason {

void ScenarioConfig::validate() const {
  if (conforming < 1) throw ConfigError("conforming must be >= 1");
  if (identity_count() < 2) throw ConfigError("need at least 2 identities");
  if (conforming + 1 < gamma.n)
    throw ConfigError("conforming must be >= receiver set size - 1");
  if (area_m <= 0 || min_separation_m < 0)
    throw ConfigError("invalid geometry");
  if (min_separation_m * min_separation_m *
          static_cast<double>(conforming + lns + attacker_nodes) * 4.0 >
      area_m * area_m)
    throw ConfigError("area too small for the separation constraint");
  if (!channel.valid()) throw ConfigError("invalid channel parameters");
  if (!thresholds.valid()) throw ConfigError("invalid thresholds");
  if (!gamma.valid()) throw ConfigError("invalid gamma configuration");
  if (!protocol.valid()) throw ConfigError("invalid protocol parameters");
  if (attacker_enabled && !strategy.valid())
    throw ConfigError("invalid attacker strategy");
}

std::vector<IdentityId> attacker_identities(const ScenarioConfig& cfg) {
  std::vector<IdentityId> ids;
  for (std::size_t i = cfg.conforming; i < cfg.identity_count(); ++i)
    ids.push_back(static_cast<IdentityId>(i));
  return ids;
}

bool truly_sybil(const ScenarioConfig& cfg, IdentityId id) {
  return id >= cfg.conforming + cfg.lns;
}

World build_world(const ScenarioConfig& cfg, std::uint64_t trial_seed) {
  World w;
  w.channel = cfg.channel;
  w.radio = cfg.radio;

  const std::size_t node_count = cfg.conforming + cfg.lns + cfg.attacker_nodes;
  Rng rng = make_rng(mix_seed(trial_seed, 0x776f726cULL));
  std::uniform_real_distribution<double> coord(0.0, cfg.area_m);
  std::uniform_real_distribution<double> orient(0.0, 360.0);

  std::vector<Position> placed;
  auto place = [&]() {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Position p{coord(rng), coord(rng)};
      bool ok = true;
      for (const Position& q : placed)
        if (distance_m(p, q) < cfg.min_separation_m) {
          ok = false;
          break;
        }
      if (ok) {
        placed.push_back(p);
        return p;
      }
    }
    throw ConfigError("placement failed: area too dense");
  };

  IdentityId next_id = 0;
  for (std::size_t k = 0; k < node_count; ++k) {
    WorldNode wn;
    wn.node.node_id = static_cast<std::uint32_t>(k);
    wn.node.position = place();
    wn.node.orientation_deg = orient(rng);
    wn.node.tx_power_dbm = cfg.tx_power_dbm;
    if (k < cfg.conforming) {
      wn.node.role = NodeRole::Conforming;
      wn.identities = {next_id++};
    } else if (k < cfg.conforming + cfg.lns) {
      wn.node.role = NodeRole::LyingNonSybil;
      wn.identities = {next_id++};
    } else {
      wn.node.role = NodeRole::SybilAttacker;
      for (std::size_t s = 0; s < cfg.sybils_per_node; ++s)
        wn.identities.push_back(next_id++);
      if (cfg.attacker_enabled && cfg.strategy.kind == AttackKind::Mobile) {
        // a mover pretends each identity lives at its own spot
        for (std::size_t s = 0; s < cfg.sybils_per_node; ++s)
          wn.identity_positions.push_back(
              Position{coord(rng), coord(rng)});
      }
    }
    w.nodes.push_back(std::move(wn));
  }
  return w;
}

ObservationMatrix synthesize_truth(const World& world, std::size_t probes,
                                   std::uint64_t trial_seed) {
  const std::size_t n = world.identity_count();
  const auto owner = world.identity_owner();
  ObservationMatrix m(n, probes);
  AttenuationCache cache(trial_seed);
  for (IdentityId tx = 0; tx < n; ++tx) {
    const WorldNode& wn = world.nodes[owner[tx]];
    NodeState tx_state;
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
    for (std::size_t p = 0; p < probes; ++p) {
      for (std::size_t rxn = 0; rxn < world.nodes.size(); ++rxn) {
        if (rxn == owner[tx]) continue;
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
          continue;
        }
        if (!world.radio.audible(rssi)) continue;
        for (IdentityId rid : rw.identities) m.set(rid, tx, p, rssi);
      }
    }
  }
  return m;
}

TrialResult run_trial(const ScenarioConfig& cfg, std::size_t trial_index,
                      std::ostream* trace) {
  const std::uint64_t trial_seed = mix_seed(cfg.master_seed, trial_index);
  const World world = build_world(cfg, trial_seed);
  const auto attackers = attacker_identities(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  SessionResult session = run_session(
      world, cfg.protocol, cfg.thresholds, cfg.gamma, cfg.policy,
      cfg.attacker_enabled ? &cfg.strategy : nullptr, attackers, trial_seed,
      trace);
  const auto t1 = std::chrono::steady_clock::now();

  TrialResult r;
  r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  if (session.abort != AbortReason::None) {
    r.aborted = true;
    return r;
  }
  if (session.outcome.deferred) {
    r.deferred = true;
    return r;
  }

  const View& v = session.outcome.classification.selected_view;
  std::size_t accepted = 0, accepted_sybil = 0;
  std::size_t collapsed_conforming = 0;
  for (IdentityId i = 0; i < v.identity_count(); ++i) {
    const bool truth = truly_sybil(cfg, i);
    const bool predicted = !v.is_nonsybil(i);  // rejected counts as Sybil
    if (truth && predicted)
      ++r.tp;
    else if (truth)
      ++r.fn;
    else if (predicted)
      ++r.fp;
    else
      ++r.tn;
    if (!predicted) {
      ++accepted;
      accepted_sybil += truth;
    }
    if (i != kInitiator && predicted && !truth && i < cfg.conforming)
      ++collapsed_conforming;
  }
  r.sybil_ratio = accepted
                      ? static_cast<double>(accepted_sybil) /
                            static_cast<double>(accepted)
                      : 0.0;

  // selected view misclassifies no more Sybils than it collapses
  std::size_t vns_s = 0, vs_ns = 0;
  for (IdentityId i = 0; i < v.identity_count(); ++i) {
    if (truly_sybil(cfg, i) && v.is_nonsybil(i)) ++vns_s;
    if (!truly_sybil(cfg, i) && !v.is_nonsybil(i)) ++vs_ns;
  }
  r.condition1_held = vns_s <= vs_ns;

  const std::size_t need =
      cfg.conforming > cfg.lns ? cfg.conforming - cfg.lns : 1;
  r.condition3_held = collapsed_conforming < need;
  return r;
}

double Proportion::value() const {
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

static double wilson_center(double p, double n, double z, int sign) {
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double spread =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return (center + sign * spread) / denom;
}

double Proportion::wilson_low(double z) const {
  if (total == 0) return 0.0;
  return wilson_center(value(), static_cast<double>(total), z, -1);
}

double Proportion::wilson_high(double z) const {
  if (total == 0) return 1.0;
  return wilson_center(value(), static_cast<double>(total), z, +1);
}

void write_trial_csv_header(std::ostream& out) {
  out << "trial,tp,fp,tn,fn,sybil_ratio,condition1,condition3,aborted,"
         "deferred\n";
}

void write_trial_csv_row(std::ostream& out, std::size_t index,
                         const TrialResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", r.sybil_ratio);
  out << index << ',' << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn
      << ',' << buf << ',' << (r.condition1_held ? 1 : 0) << ','
      << (r.condition3_held ? 1 : 0) << ',' << (r.aborted ? 1 : 0) << ','
      << (r.deferred ? 1 : 0) << '\n';
}

Aggregate run_trials(const ScenarioConfig& cfg, std::size_t threads,
                     std::ostream* csv) {
  cfg.validate();
  Aggregate agg;
  agg.trials.resize(cfg.trials);

  if (threads <= 1 || cfg.trials < 2) {
    for (std::size_t i = 0; i < cfg.trials; ++i)
      agg.trials[i] = run_trial(cfg, i);
  } else {
    const std::size_t k = std::min(threads, cfg.trials);
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (std::size_t w = 0; w < k; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < cfg.trials; i += k)
          agg.trials[i] = run_trial(cfg, i);
      });
    }
    for (auto& th : pool) th.join();
  }

  double ratio_sum = 0.0;
  std::size_t classified = 0;
  for (const TrialResult& r : agg.trials) {
    if (r.aborted) {
      ++agg.aborts;
      continue;
    }
    if (r.deferred) continue;
    agg.sensitivity.hits += r.tp;
    agg.sensitivity.total += r.tp + r.fn;
    agg.specificity.hits += r.tn;
    agg.specificity.total += r.tn + r.fp;
    ratio_sum += r.sybil_ratio;
    ++classified;
  }
  agg.mean_sybil_ratio =
      classified ? ratio_sum / static_cast<double>(classified) : 0.0;

  if (csv) {
    write_trial_csv_header(*csv);
    for (std::size_t i = 0; i < agg.trials.size(); ++i)
      write_trial_csv_row(*csv, i, agg.trials[i]);
  }
  return agg;
}

void sweep_grid(const ScenarioConfig& tmpl,
                const std::vector<std::size_t>& conforming_axis,
                const std::vector<std::size_t>& lns_axis, std::size_t threads,
                std::ostream& csv) {
  if (conforming_axis.empty() || lns_axis.empty())
    throw ConfigError("sweep axes must be non-empty");
  csv << "conforming,lns,sensitivity,specificity,mean_sybil_ratio,"
         "candidate_success_prob,collapse_bound\n";
  for (std::size_t c : conforming_axis) {
    for (std::size_t lns : lns_axis) {
      ScenarioConfig cfg = tmpl;
      cfg.conforming = c;
      cfg.lns = lns;
      Aggregate agg = run_trials(cfg, threads);
      double psucc = 0.0;
      try {
        psucc = conforming_probability(c, lns, cfg.gamma.n, cfg.gamma);
      } catch (const DomainError&) {
        psucc = 0.0;
      }
      const Condition3Result c3 = condition3_break_probability(
          c, lns, cfg.strategy.sigma_pred_dbm, cfg.thresholds, 0,
          cfg.master_seed);
      char a[64], b[64], r[64], p[64], q[64];
      std::snprintf(a, sizeof(a), "%.6f", agg.sensitivity.value());
      std::snprintf(b, sizeof(b), "%.6f", agg.specificity.value());
      std::snprintf(r, sizeof(r), "%.6f", agg.mean_sybil_ratio);
      std::snprintf(p, sizeof(p), "%.9f", psucc);
      std::snprintf(q, sizeof(q), "%.9g", c3.analytic_bound);
      csv << c << ',' << lns << ',' << a << ',' << b << ',' << r << ',' << p
          << ',' << q << '\n';
    }
  }
}

std::vector<RocPoint> roc_curve(const ScenarioConfig& cfg,
                                const std::vector<double>& thresholds) {
  cfg.validate();
  std::vector<RocPoint> points(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t)
    points[t].threshold = thresholds[t];
  std::vector<std::size_t> sybil_hits(thresholds.size(), 0);
  std::vector<std::size_t> conf_hits(thresholds.size(), 0);
  std::size_t sybil_total = 0, conf_total = 0;

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t trial_seed = mix_seed(cfg.master_seed, trial);
    const World world = build_world(cfg, trial_seed);
    SessionResult session =
        run_session(world, cfg.protocol, cfg.thresholds, cfg.gamma,
                    cfg.policy, nullptr, {}, trial_seed, nullptr);
    if (session.abort != AbortReason::None) continue;

    const ObservationMatrix& m = session.truth;
    const View& base = session.outcome.classification.selected_view;

    // motion-filter survivors only; a fixed conforming receiver set gives
    // the dimension under test
    std::vector<IdentityId> members{kInitiator};
    for (IdentityId i = 1; i < cfg.conforming && members.size() < cfg.gamma.n;
         ++i)
      if (!base.is_rejected(i)) members.push_back(i);
    if (members.size() < cfg.gamma.n) continue;
    ReceiverSet r{members};

    std::vector<IdentityId> pool;
    for (IdentityId i = 0; i < m.identity_count(); ++i) {
      if (r.contains(i) || base.is_rejected(i)) continue;
      pool.push_back(i);
    }
    std::vector<Signalprint> prints(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      prints[i] = build_signalprint(r, pool[i], m);

    struct Pair {
      double d;
      std::size_t a, b;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < pool.size(); ++a)
      for (std::size_t b = a + 1; b < pool.size(); ++b) {
        try {
          pairs.push_back({signalprint_distance(prints[a], prints[b]), a, b});
        } catch (const DomainError&) {
        }
      }

    for (IdentityId id : pool) {
      if (truly_sybil(cfg, id))
        ++sybil_total;
      else if (id != kInitiator)
        ++conf_total;
    }

    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::vector<std::size_t> parent(pool.size());
      std::iota(parent.begin(), parent.end(), 0);
      std::function<std::size_t(std::size_t)> find =
          [&](std::size_t x) -> std::size_t {
        while (parent[x] != x) {
          parent[x] = parent[parent[x]];
          x = parent[x];
        }
        return x;
      };
      for (const Pair& p : pairs)
        if (p.d <= thresholds[t]) {
          const std::size_t ra = find(p.a), rb = find(p.b);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      std::vector<std::size_t> csize(pool.size(), 0);
      for (std::size_t i = 0; i < pool.size(); ++i) ++csize[find(i)];
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const bool labeled_sybil = csize[find(i)] >= 2;
        if (!labeled_sybil) continue;
        if (truly_sybil(cfg, pool[i]))
          ++sybil_hits[t];
        else if (pool[i] != kInitiator)
          ++conf_hits[t];
      }
    }
  }

  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    points[t].tpr = sybil_total ? static_cast<double>(sybil_hits[t]) /
                                      static_cast<double>(sybil_total)
                                : 0.0;
    points[t].fpr = conf_total ? static_cast<double>(conf_hits[t]) /
                                     static_cast<double>(conf_total)
                               : 0.0;
  }
  return points;
}

}  // namespace mason
