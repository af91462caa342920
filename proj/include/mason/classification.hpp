#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mason/observation.hpp"
#include "mason/rng.hpp"
#include "mason/signalprint.hpp"

namespace mason {

// Noise bound per receiver-set size: the maximum fraction of non-Sybil
// identities misclassified by a size-n receiver set. gamma2 is a balance
// point: its similarity bound (1-2g)/g = 3.4 must stay below the ratio a
// pair view shows against a view that denies a hidden co-located cluster
// (about |NS|/cluster size, e.g. 10/3) yet above the ratio left by one
// accidental one-dimensional collapse pair in an honest pair view (about
// (|NS|-2)/2, i.e. 3.5 at nine non-Sybil identities). Pair views are built
// with the tight pair_threshold rather than the clustering thresholds so
// accidental collapses stay rare; co-located transmitters still land
// within a fraction of a dB of each other.
struct GammaConfig {
  double gamma2 = 0.185;
  double gamma3 = 0.15;
  double gamma4 = 0.05;
  std::size_t n = 4;                  // receiver set size
  double growth_looseness = 2.0;      // threshold factor during set growth
  std::size_t candidate_multiplier = 1;  // build k*|I| candidate sets
  double ratio_tolerance = -1.0;      // <0: use the dimension-2 threshold
  double pair_threshold = 0.6;        // dim-2 threshold for size-2 views

  double gamma(std::size_t m) const {
    if (m <= 2) return gamma2;
    if (m == 3) return gamma3;
    return gamma4;
  }

  // (1-2g)/g; gamma == 0 degenerates to "exact match required".
  double similarity_bound(std::size_t m) const {
    const double g = gamma(m);
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 - 2.0 * g) / g;
  }

  bool valid() const {
    auto ok = [](double g) { return g >= 0.0 && g < 0.5; };
    return ok(gamma2) && ok(gamma3) && ok(gamma4) && n >= 2 &&
           growth_looseness >= 1.0 && candidate_multiplier >= 1;
  }
};

// Probability that at least one receiver set grown by the candidate
// selection procedure is still conforming, for c conforming and lns lying
// non-Sybil identities. Throws DomainError when a factor's numerator is
// non-positive.
double conforming_probability(std::size_t c, std::size_t lns, std::size_t n,
                              const GammaConfig& g);

// Two views over the same identity universe agree up to the gamma bound.
bool gamma_similar(const View& v1, const View& v2, double gamma);
bool gamma_similar(const View& v1, const View& v2, const GammaConfig& g);

struct Candidate {
  ReceiverSet set;
  View view;                    // generated with the normal thresholds
  bool insufficient = false;    // growth ran out of non-Sybil candidates
};

// The candidate receiver sets considered by both policies: one size-n set
// per identity, seeded from {initiator, i} and grown by repeatedly adding a
// random element of the current view's non-Sybil set. Candidates are built
// lazily so the no-liar early exit stays sub-cubic; size-2 views are built
// up front and retained for the consistency search.
class CandidateSet {
 public:
  CandidateSet(const ObservationMatrix& obs, const SignalprintThresholds& t,
               const GammaConfig& g, std::uint64_t seed);

  std::size_t size() const { return order_.size(); }
  const Candidate& candidate(std::size_t k);
  const View& size2_view(IdentityId i) const { return size2_views_[i]; }

  // Forces every candidate; used by tests and the max-Sybil policy.
  std::vector<ReceiverSet> receiver_sets();

  const ObservationMatrix& observations() const { return obs_; }
  const SignalprintThresholds& thresholds() const { return thresholds_; }
  const GammaConfig& gamma() const { return gamma_; }

 private:
  void build(std::size_t k);

  const ObservationMatrix& obs_;
  SignalprintThresholds thresholds_;
  SignalprintThresholds loose_;
  GammaConfig gamma_;
  std::uint64_t seed_;
  std::vector<IdentityId> order_;       // seed identity per candidate
  std::vector<View> size2_views_;       // V({initiator, i}), pair_threshold
  std::vector<std::optional<Candidate>> built_;
};

CandidateSet build_receiver_sets(const ObservationMatrix& obs,
                                 const SignalprintThresholds& t,
                                 const GammaConfig& g, std::uint64_t seed);

enum class Policy { MaxSybil, Consistency };

struct ClassificationResult {
  View selected_view;                  // exclusions already folded in
  std::vector<IdentityId> excluded;    // removed for inconsistency
  Policy policy = Policy::MaxSybil;
  bool early_exit = false;
  std::size_t selected_index = 0;
  std::size_t exclusion_count = 0;
};

// Maximum Sybil policy: the candidate view claiming the most Sybil
// identities (rejected-for-missing-data counts as claimed).
ClassificationResult max_sybil_select(CandidateSet& candidates);

// Identities that must be excluded from `view`'s non-Sybil set for it to be
// gamma_n-consistent. `size2_views` supplies V({i, initiator}) per identity.
std::vector<IdentityId> consistency_exclusions(
    const View& view, const ObservationMatrix& obs,
    const SignalprintThresholds& t, const GammaConfig& g,
    const std::vector<View>& size2_views);

// View consistency policy: the candidate permitting the largest
// gamma_n-consistent subset (fewest exclusions), early-exiting on a
// candidate with none.
ClassificationResult find_consistent_subset(CandidateSet& candidates);

}  // namespace mason
