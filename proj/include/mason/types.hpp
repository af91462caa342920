#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mason {

// Identities are small dense indices. Index 0 is reserved for the initiator
// of a classification session.
using IdentityId = std::uint32_t;
inline constexpr IdentityId kInitiator = 0;

// Radio representation of RSSI values in dBm. Commodity radios report
// integers, so the default quantization step is 1.0 dBm; a step of 0
// disables quantization entirely.
struct RadioConfig {
  double quantization_step = 1.0;  // dBm; 0 = continuous
  double floor_dbm = -100.0;       // below this an observation is missing
  double ceil_dbm = 0.0;

  double quantize(double dbm) const {
    if (quantization_step > 0.0) {
      dbm = std::round(dbm / quantization_step) * quantization_step;
    }
    if (dbm > ceil_dbm) dbm = ceil_dbm;
    return dbm;
  }

  bool audible(double dbm) const { return dbm >= floor_dbm; }
};

struct Rssi {
  double dbm = 0.0;
};

inline bool finite_rssi(double dbm) {
  return std::isfinite(dbm) && dbm >= -200.0 && dbm <= 50.0;
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mason
