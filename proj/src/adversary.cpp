#include "mason/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

namespace mason {

namespace {

std::uint64_t vector_key(const std::vector<int>& v) {
  std::uint64_t h = 0x5bd1e995u;
  for (int x : v)
    h = mix_seed(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x)) +
                        0x8000000000000000ULL);
  return h;
}

double log_binom_tail(std::size_t n, double p, std::size_t k) {
  // P(Bin(n, p) >= k), summed in log space
  if (k == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return k <= n ? 1.0 : 0.0;
  double total = 0.0;
  for (std::size_t j = k; j <= n; ++j) {
    double lg = std::lgamma(static_cast<double>(n) + 1.0) -
                std::lgamma(static_cast<double>(j) + 1.0) -
                std::lgamma(static_cast<double>(n - j) + 1.0) +
                static_cast<double>(j) * std::log(p) +
                static_cast<double>(n - j) * std::log1p(-p);
    total += std::exp(lg);
  }
  return std::min(total, 1.0);
}

}  // namespace

std::vector<GuessVector> optimal_guess_vectors(std::size_t c_count,
                                               double sigma_pred,
                                               std::size_t group_count) {
  std::vector<GuessVector> out;
  if (group_count == 0) return out;

  using Entry = std::pair<double, std::vector<int>>;
  auto cmp = [](const Entry& a, const Entry& b) { return a.first > b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  std::unordered_set<std::uint64_t> seen;

  std::vector<int> zero(c_count, 0);
  heap.emplace(0.0, zero);
  seen.insert(vector_key(zero));

  while (!heap.empty() && out.size() < group_count) {
    auto [ss, v] = heap.top();
    heap.pop();
    GuessVector gv;
    gv.offsets.assign(v.begin(), v.end());
    gv.sum_sq = ss;
    out.push_back(std::move(gv));

    // neighbors: push one coordinate a step further from zero, or flip a
    // zero coordinate negative
    for (std::size_t i = 0; i < c_count; ++i) {
      for (int dir : {+1, -1}) {
        if (v[i] != 0 && (v[i] > 0) != (dir > 0)) continue;
        std::vector<int> next = v;
        next[i] += dir;
        const std::uint64_t key = vector_key(next);
        if (!seen.insert(key).second) continue;
        const double nss = ss - static_cast<double>(v[i]) * v[i] +
                           static_cast<double>(next[i]) * next[i];
        heap.emplace(nss, std::move(next));
      }
    }
  }
  return out;
}

ObservationMatrix fabricate_observations(const AttackerStrategy& strategy,
                                         const ObservationMatrix& truth,
                                         const std::vector<IdentityId>& attacker_ids,
                                         const std::vector<IdentityId>& targets,
                                         const RadioConfig& radio,
                                         std::uint64_t seed) {
  ObservationMatrix out = truth;
  if (strategy.kind == AttackKind::Mobile) return out;  // lies are physical

  const std::size_t n = truth.identity_count();
  std::vector<std::uint8_t> is_attacker(n, 0);
  for (IdentityId a : attacker_ids) is_attacker[a] = 1;

  auto report_constant = [&](IdentityId obs, IdentityId tx, double dbm) {
    const double q = radio.quantize(dbm);
    for (std::size_t p = 0; p < truth.probes(); ++p) out.set(obs, tx, p, q);
  };

  if (strategy.kind == AttackKind::RandomLies) {
    for (IdentityId a : attacker_ids) {
      Rng rng = make_rng(mix_seed(seed, a, 0x726c6965ULL));
      std::uniform_real_distribution<double> pick(-90.0, -30.0);
      for (IdentityId tx = 0; tx < n; ++tx) {
        if (tx == a || tx == kInitiator) continue;
        report_constant(a, tx, pick(rng));
      }
    }
    return out;
  }

  // guess-group strategies
  const std::size_t gsz = std::max<std::size_t>(1, strategy.group_size);
  const std::size_t group_count = (attacker_ids.size() + gsz - 1) / gsz;
  std::vector<std::size_t> group_of(n, 0);
  for (std::size_t i = 0; i < attacker_ids.size(); ++i)
    group_of[attacker_ids[i]] = i / gsz;

  // shared channel characterization: prediction = truth + N(0, sigma_pred)
  std::vector<double> prediction(targets.size(), 0.0);
  std::vector<std::uint8_t> predicted(targets.size(), 0);
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    double tm = 0.0;
    if (!truth.mean(kInitiator, targets[ti], tm)) continue;
    prediction[ti] = tm + keyed_gaussian(mix_seed(seed, 0x70726564ULL),
                                         targets[ti], 0.0,
                                         strategy.sigma_pred_dbm);
    predicted[ti] = 1;
  }
  const auto guesses =
      optimal_guess_vectors(targets.size(), strategy.sigma_pred_dbm,
                            group_count);

  for (IdentityId a : attacker_ids) {
    const std::size_t g = group_of[a];
    Rng rng = make_rng(mix_seed(seed, a, 0x68696465ULL));
    std::uniform_real_distribution<double> pick(-90.0, -30.0);
    for (IdentityId tx = 0; tx < n; ++tx) {
      if (tx == a || tx == kInitiator) continue;
      if (is_attacker[tx]) {
        if (group_of[tx] == g) {
          // bait: echo what the initiator itself sees so the sibling joins
          // the collapsed cluster and its ratios check out
          double im = 0.0;
          report_constant(a, tx,
                          truth.mean(kInitiator, tx, im) ? im : -60.0);
        } else {
          // hide: decorrelate the other groups' Sybils
          report_constant(a, tx, pick(rng));
        }
        continue;
      }
      const auto it = std::find(targets.begin(), targets.end(), tx);
      if (it == targets.end()) continue;  // keep the true observation
      const std::size_t ti =
          static_cast<std::size_t>(it - targets.begin());
      if (!predicted[ti]) continue;
      report_constant(a, tx, prediction[ti] + guesses[g].offsets[ti]);
    }
  }
  return out;
}

double collapse_error_window(std::size_t group_size,
                             const SignalprintThresholds& t) {
  const double m = static_cast<double>(std::max<std::size_t>(1, group_size));
  return t.distance_threshold(group_size + 1) * std::sqrt((m + 1.0) / m);
}

double guess_hit_probability(double window, double sigma) {
  if (window < 0.0) return 0.0;
  if (sigma <= 0.0) return 1.0;
  return std::erf(window / (sigma * std::sqrt(2.0)));
}

Condition3Result condition3_break_probability(std::size_t c, std::size_t lns,
                                              double sigma_pred,
                                              const SignalprintThresholds& t,
                                              std::size_t trials,
                                              std::uint64_t seed,
                                              double window) {
  Condition3Result res;
  res.trials = trials;
  res.group_count = std::max<std::size_t>(1, lns);
  if (window < 0.0) window = t.dim2 / 2.0;
  const double p = guess_hit_probability(window, sigma_pred);
  res.per_target_hit_prob = p;
  const std::size_t need = c > lns ? c - lns : 0;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = make_rng(mix_seed(seed, trial, 0x63336272ULL));
    std::binomial_distribution<std::size_t> hits(c, p);
    bool broke = need == 0;
    for (std::size_t g = 0; !broke && g < res.group_count; ++g)
      broke = hits(rng) >= need;
    res.breaks += broke;
  }
  res.estimate =
      trials ? static_cast<double>(res.breaks) / static_cast<double>(trials)
             : 0.0;

  // union bound over the guess groups: a break requires some single group
  // to land `need` of its c coordinate guesses at once
  res.analytic_bound =
      need == 0 ? 1.0
                : std::min(1.0, static_cast<double>(res.group_count) *
                                    log_binom_tail(c, p, need));
  return res;
}

double expected_collapses(std::size_t c, std::size_t group_size,
                          std::size_t group_count, double sigma_pred,
                          const SignalprintThresholds& t, std::size_t trials,
                          std::uint64_t seed) {
  const double p =
      guess_hit_probability(collapse_error_window(group_size, t), sigma_pred);
  const double q =
      1.0 - std::pow(1.0 - p, static_cast<double>(group_count));
  std::size_t total = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = make_rng(mix_seed(seed, trial, 0x65636f6cULL));
    std::binomial_distribution<std::size_t> hits(c, q);
    total += hits(rng);
  }
  return trials ? static_cast<double>(total) / static_cast<double>(trials)
                : 0.0;
}

std::size_t best_group_size(std::size_t c, std::size_t identity_budget,
                            double sigma_pred, const SignalprintThresholds& t,
                            std::size_t trials, std::uint64_t seed) {
  std::size_t best = 1;
  double best_score = -1.0;
  const std::size_t cap = std::min<std::size_t>(6, identity_budget);
  for (std::size_t m = 1; m <= cap; ++m) {
    const std::size_t groups = identity_budget / m;
    if (groups == 0) break;
    const double score = expected_collapses(c, m, groups, sigma_pred, t,
                                            trials, mix_seed(seed, m));
    if (score > best_score) {
      best_score = score;
      best = m;
    }
  }
  return best;
}

NodeState mobile_attacker_step(MobileAttacker& m, std::size_t slot,
                               double t_ms) {
  NodeState s;
  s.node_id = m.node.node_id;
  s.orientation_deg = m.node.orientation_deg;
  if (m.identity_targets.empty()) {
    s.position = m.node.position;
    return s;
  }
  const Position target = m.identity_targets[slot % m.identity_targets.size()];
  const double gap = t_ms - m.last_transmit_ms;
  Position at = target;
  if (m.switch_latency_ms > 0.0 && gap < m.switch_latency_ms) {
    const double f = std::max(0.0, gap) / m.switch_latency_ms;
    at.x = m.current.x + f * (target.x - m.current.x);
    at.y = m.current.y + f * (target.y - m.current.y);
  }
  m.current = at;
  m.last_transmit_ms = t_ms;
  s.position = at;
  return s;
}

}  // namespace mason
