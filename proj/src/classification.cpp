#include "mason/classification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mason {

double conforming_probability(std::size_t c, std::size_t lns, std::size_t n,
                              const GammaConfig& g) {
  if (c + 1 < n) throw DomainError("conforming_probability: c < n - 1");
  const double cd = static_cast<double>(c);
  double p = 1.0;
  for (std::size_t m = 2; m + 1 <= n; ++m) {
    const double num =
        (1.0 - g.gamma(m)) * cd - static_cast<double>(m - 1);
    if (num <= 0.0)
      throw DomainError("conforming_probability: non-positive numerator");
    p *= num / (static_cast<double>(lns) + num);
  }
  const double result = 1.0 - std::pow(1.0 - p, cd);
  return std::clamp(result, 0.0, 1.0);
}

bool gamma_similar(const View& v1, const View& v2, double gamma) {
  const double bound = gamma > 0.0
                           ? (1.0 - 2.0 * gamma) / gamma
                           : std::numeric_limits<double>::infinity();
  std::size_t inter = 0, only1 = 0, only2 = 0;
  for (IdentityId i = 0; i < v1.identity_count(); ++i) {
    const bool a = v1.is_nonsybil(i);
    const bool b = v2.is_nonsybil(i);
    if (a && b)
      ++inter;
    else if (a)
      ++only1;
    else if (b)
      ++only2;
  }
  const double id = static_cast<double>(inter);
  const bool c1 = only1 == 0 || id / static_cast<double>(only1) > bound;
  const bool c2 = only2 == 0 || id / static_cast<double>(only2) > bound;
  return c1 && c2;
}

bool gamma_similar(const View& v1, const View& v2, const GammaConfig& g) {
  return gamma_similar(v1, v2, g.gamma(g.n));
}

CandidateSet::CandidateSet(const ObservationMatrix& obs,
                           const SignalprintThresholds& t,
                           const GammaConfig& g, std::uint64_t seed)
    : obs_(obs),
      thresholds_(t),
      loose_(t.scaled(g.growth_looseness)),
      gamma_(g),
      seed_(seed) {
  const std::size_t n = obs.identity_count();
  SignalprintThresholds pair = t;
  pair.dim2 = g.pair_threshold;
  size2_views_.resize(n);
  for (IdentityId i = 1; i < n; ++i) {
    ReceiverSet r{{kInitiator, i}};
    size2_views_[i] = generate_view(r, obs_, pair);
  }
  for (std::size_t rep = 0; rep < g.candidate_multiplier; ++rep)
    for (IdentityId i = 1; i < n; ++i) order_.push_back(i);
  built_.resize(order_.size());
}

void CandidateSet::build(std::size_t k) {
  Candidate cand;
  const IdentityId seed_id = order_[k];
  cand.set.members = {kInitiator, seed_id};
  Rng rng = make_rng(mix_seed(seed_, k, 0x616c6731ULL));

  const View* current = &size2_views_[seed_id];
  View grown;
  while (cand.set.size() < gamma_.n) {
    std::vector<IdentityId> pool;
    auto fill = [&](const View& v) {
      pool.clear();
      for (IdentityId i = 0; i < obs_.identity_count(); ++i)
        if (v.is_nonsybil(i) && !cand.set.contains(i)) pool.push_back(i);
    };
    fill(*current);
    if (pool.empty()) {
      // the loosened thresholds can collapse the whole remainder; retry at
      // the normal thresholds before declaring the pool exhausted
      fill(generate_view(cand.set, obs_, thresholds_));
    }
    if (pool.empty()) {
      cand.insufficient = true;
      break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    cand.set.members.push_back(pool[pick(rng)]);
    if (cand.set.size() < gamma_.n) {
      grown = generate_view(cand.set, obs_, loose_);
      current = &grown;
    }
  }
  cand.view = generate_view(cand.set, obs_, thresholds_);
  built_[k] = std::move(cand);
}

const Candidate& CandidateSet::candidate(std::size_t k) {
  if (!built_[k]) build(k);
  return *built_[k];
}

std::vector<ReceiverSet> CandidateSet::receiver_sets() {
  std::vector<ReceiverSet> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) out.push_back(candidate(k).set);
  return out;
}

CandidateSet build_receiver_sets(const ObservationMatrix& obs,
                                 const SignalprintThresholds& t,
                                 const GammaConfig& g, std::uint64_t seed) {
  return CandidateSet(obs, t, g, seed);
}

namespace {

// Undersized candidates (growth starved of non-Sybil members) are only
// considered when every candidate is undersized.
bool any_full_candidate(CandidateSet& candidates) {
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (!candidates.candidate(k).insufficient) return true;
  return false;
}

}  // namespace

ClassificationResult max_sybil_select(CandidateSet& candidates) {
  ClassificationResult res;
  res.policy = Policy::MaxSybil;
  const bool require_full = any_full_candidate(candidates);
  std::size_t best_claim = 0;
  bool have = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Candidate& c = candidates.candidate(k);
    if (require_full && c.insufficient) continue;
    const std::size_t claim = c.view.claimed_sybil_count();
    if (!have || claim > best_claim) {
      have = true;
      best_claim = claim;
      res.selected_view = c.view;
      res.selected_index = k;
    }
  }
  return res;
}

std::vector<IdentityId> consistency_exclusions(
    const View& view, const ObservationMatrix& obs,
    const SignalprintThresholds& t, const GammaConfig& g,
    const std::vector<View>& size2_views) {
  const std::size_t n = view.identity_count();
  const double tol = g.ratio_tolerance >= 0.0 ? g.ratio_tolerance : t.dim2;
  const double bound_n = g.similarity_bound(g.n);
  const double gamma2 = g.gamma(2);

  // RSSI ratio of each Sybil cluster member against the lowest-ordinal
  // sibling, anchored in the initiator's own (trusted) observations.
  struct RatioEntry {
    IdentityId id;
    IdentityId ref;
    double ratio;
  };
  std::vector<RatioEntry> entries;
  if (!view.cluster.empty()) {
    for (IdentityId a = 0; a < n; ++a) {
      if (!view.is_sybil(a)) continue;
      const IdentityId ref = view.cluster[a];
      if (ref == a) continue;  // cluster representative
      double va = 0.0, vr = 0.0;
      if (!obs.mean(kInitiator, a, va) || !obs.mean(kInitiator, ref, vr))
        continue;
      entries.push_back({a, ref, va - vr});
    }
  }

  const double ns_count = static_cast<double>(view.nonsybil_count());
  std::vector<IdentityId> excluded;
  for (IdentityId i = 0; i < n; ++i) {
    if (i == kInitiator || !view.is_nonsybil(i)) continue;
    std::size_t mismatch = 0;
    for (const RatioEntry& e : entries) {
      double va = 0.0, vr = 0.0;
      if (!obs.mean(i, e.id, va) || !obs.mean(i, e.ref, vr)) continue;
      if (std::abs((va - vr) - e.ratio) > tol) ++mismatch;
    }
    bool out = false;
    if (mismatch > 0 &&
        (ns_count + static_cast<double>(mismatch)) /
                static_cast<double>(mismatch) <
            bound_n)
      out = true;
    if (!out && i < size2_views.size() &&
        size2_views[i].identity_count() == n &&
        !gamma_similar(view, size2_views[i], gamma2))
      out = true;
    if (out) excluded.push_back(i);
  }
  return excluded;
}

ClassificationResult find_consistent_subset(CandidateSet& candidates) {
  ClassificationResult res;
  res.policy = Policy::Consistency;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<IdentityId> best_excluded;
  std::size_t best_idx = 0;
  bool early = false;

  std::vector<View> size2;
  size2.reserve(candidates.observations().identity_count());
  for (IdentityId i = 0; i < candidates.observations().identity_count(); ++i)
    size2.push_back(candidates.size2_view(i));

  bool have_full = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Candidate& c = candidates.candidate(k);
    // prefer fully grown candidates; undersized ones only count when no
    // candidate could be grown to size n
    if (c.insufficient && have_full) continue;
    if (!c.insufficient && !have_full) {
      have_full = true;
      best = std::numeric_limits<std::size_t>::max();
    }
    auto excluded = consistency_exclusions(
        c.view, candidates.observations(), candidates.thresholds(),
        candidates.gamma(), size2);
    if (excluded.size() < best) {
      best = excluded.size();
      best_excluded = std::move(excluded);
      best_idx = k;
      if (best == 0 && have_full) {
        early = true;
        break;
      }
    }
  }

  res.selected_view = candidates.candidate(best_idx).view;
  for (IdentityId i : best_excluded)
    res.selected_view.set_label(i, View::Label::Sybil);
  res.excluded = best_excluded;
  res.exclusion_count = best;
  res.selected_index = best_idx;
  res.early_exit = early;
  return res;
}

}  // namespace mason
