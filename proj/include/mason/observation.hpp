#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mason/types.hpp"

namespace mason {

// Reported RSSI observations indexed by (observer identity, transmitter
// identity, probe index). Entries may be missing (out of range, withheld,
// or dropped in the reveal round) and may be falsified by the observer.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(std::size_t identity_count, std::size_t probes)
      : n_(identity_count), probes_(probes),
        values_(identity_count * identity_count * probes, 0.0),
        present_(identity_count * identity_count * probes, 0) {}

  std::size_t identity_count() const { return n_; }
  std::size_t probes() const { return probes_; }

  void set(IdentityId observer, IdentityId transmitter, std::size_t probe,
           double dbm) {
    const std::size_t i = index(observer, transmitter, probe);
    values_[i] = dbm;
    present_[i] = 1;
  }

  void clear(IdentityId observer, IdentityId transmitter, std::size_t probe) {
    present_[index(observer, transmitter, probe)] = 0;
  }

  // Drops every report made by `observer` (commit-reveal rejection).
  void drop_observer(IdentityId observer) {
    for (IdentityId tx = 0; tx < n_; ++tx)
      for (std::size_t p = 0; p < probes_; ++p)
        present_[index(observer, tx, p)] = 0;
  }

  bool has(IdentityId observer, IdentityId transmitter,
           std::size_t probe) const {
    return present_[index(observer, transmitter, probe)] != 0;
  }

  double get(IdentityId observer, IdentityId transmitter,
             std::size_t probe) const {
    return values_[index(observer, transmitter, probe)];
  }

  // Mean over present probes; returns false when no probe is present.
  bool mean(IdentityId observer, IdentityId transmitter, double& out) const {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t p = 0; p < probes_; ++p) {
      const std::size_t i = index(observer, transmitter, p);
      if (present_[i]) {
        sum += values_[i];
        ++cnt;
      }
    }
    if (cnt == 0) return false;
    out = sum / static_cast<double>(cnt);
    return true;
  }

  std::size_t probe_count(IdentityId observer, IdentityId transmitter) const {
    std::size_t cnt = 0;
    for (std::size_t p = 0; p < probes_; ++p)
      if (present_[index(observer, transmitter, p)]) ++cnt;
    return cnt;
  }

 private:
  std::size_t index(IdentityId observer, IdentityId transmitter,
                    std::size_t probe) const {
    return (static_cast<std::size_t>(observer) * n_ + transmitter) * probes_ +
           probe;
  }

  std::size_t n_ = 0;
  std::size_t probes_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
};

}  // namespace mason
