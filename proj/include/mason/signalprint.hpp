#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mason/observation.hpp"
#include "mason/types.hpp"

namespace mason {

// A signalprint is a vector of RSSIs at multiple observers for one
// transmitter: the unit of transmitter-location evidence. Entries may be
// missing; comparisons use the shared observers only.
struct Signalprint {
  std::vector<IdentityId> observers;  // no duplicates
  std::vector<double> values;         // dBm, same length as observers
  std::vector<std::uint8_t> present;  // per-entry missing flag

  std::size_t dimension() const {
    std::size_t d = 0;
    for (auto p : present) d += p;
    return d;
  }
};

// Distance thresholds in dBm per signalprint dimension, plus the motion
// filter threshold on the per-probe RSSI standard deviation. Dimensions
// above 4 reuse the dimension-4 value.
struct SignalprintThresholds {
  double dim2 = 0.85;
  double dim3 = 3.6;
  double dim4 = 1.2;
  double motion_std = 2.5;

  double distance_threshold(std::size_t dim) const {
    if (dim <= 2) return dim2;
    if (dim == 3) return dim3;
    return dim4;
  }

  SignalprintThresholds scaled(double factor) const {
    SignalprintThresholds t = *this;
    t.dim2 *= factor;
    t.dim3 *= factor;
    t.dim4 *= factor;
    return t;
  }

  bool valid() const {
    return dim2 > 0 && dim3 > 0 && dim4 > 0 && motion_std > 0;
  }
};

// A Sybil / non-Sybil labeling of every identity, generated from a receiver
// set. Identities with too little data to form a signalprint are tracked as
// rejected-for-missing-data and treated as Sybil-equivalent downstream.
class View {
 public:
  enum class Label : std::uint8_t { NonSybil, Sybil, Rejected };

  View() = default;
  explicit View(std::size_t identity_count)
      : labels_(identity_count, Label::NonSybil) {}

  std::size_t identity_count() const { return labels_.size(); }

  Label label(IdentityId id) const { return labels_[id]; }
  void set_label(IdentityId id, Label l) { labels_[id] = l; }

  bool is_sybil(IdentityId id) const { return labels_[id] == Label::Sybil; }
  bool is_nonsybil(IdentityId id) const {
    return labels_[id] == Label::NonSybil;
  }
  bool is_rejected(IdentityId id) const {
    return labels_[id] == Label::Rejected;
  }

  std::size_t sybil_count() const { return count(Label::Sybil); }
  std::size_t nonsybil_count() const { return count(Label::NonSybil); }
  std::size_t rejected_count() const { return count(Label::Rejected); }

  // Sybil claim as seen downstream: rejected identities count as Sybil.
  std::size_t claimed_sybil_count() const {
    return sybil_count() + rejected_count();
  }

  std::vector<IdentityId> sybil() const { return collect(Label::Sybil); }
  std::vector<IdentityId> nonsybil() const { return collect(Label::NonSybil); }
  std::vector<IdentityId> rejected() const { return collect(Label::Rejected); }

  bool operator==(const View& other) const { return labels_ == other.labels_; }

  // Cluster representative (lowest member ordinal) per identity, filled in
  // by generate_view; equals the identity itself outside any Sybil cluster.
  // Not part of equality.
  std::vector<IdentityId> cluster;

 private:
  std::size_t count(Label l) const {
    std::size_t c = 0;
    for (auto x : labels_) c += (x == l);
    return c;
  }
  std::vector<IdentityId> collect(Label l) const {
    std::vector<IdentityId> out;
    for (IdentityId i = 0; i < labels_.size(); ++i)
      if (labels_[i] == l) out.push_back(i);
    return out;
  }

  std::vector<Label> labels_;
};

// An ordered subset of identities whose reported observations, together
// with the initiator's own, form signalprints. The initiator is always the
// first member.
struct ReceiverSet {
  std::vector<IdentityId> members;

  bool contains(IdentityId id) const {
    for (auto m : members)
      if (m == id) return true;
    return false;
  }
  std::size_t size() const { return members.size(); }
};

// Perpendicular distance between the slope-1 lines containing the two
// signalprints, over their shared observers.
// Throws DomainError when fewer than 2 observers are shared.
double signalprint_distance(const Signalprint& a, const Signalprint& b);

// Distance over pre-aligned raw vectors (no missing entries).
double signalprint_distance(const std::vector<double>& a,
                            const std::vector<double>& b);

// True when the pair's distance is at or below the threshold for their
// shared dimension.
bool is_sybil_pair(const Signalprint& a, const Signalprint& b,
                   const SignalprintThresholds& t);

// Builds probe-averaged signalprints for every identity from the receiver
// set's reported observations and clusters them: members of a cluster of
// size >= 2 are Sybil, singletons non-Sybil, receiver set members forced
// non-Sybil. Identities observed by fewer than two members are rejected.
View generate_view(const ReceiverSet& r, const ObservationMatrix& obs,
                   const SignalprintThresholds& t);

// The probe-averaged signalprint of one identity over the receiver set's
// observers (transmitter itself excluded from the observer list).
Signalprint build_signalprint(const ReceiverSet& r, IdentityId transmitter,
                              const ObservationMatrix& obs);

}  // namespace mason
