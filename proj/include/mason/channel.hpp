#pragma once

#include <cstdint>
#include <unordered_map>

#include "mason/rng.hpp"
#include "mason/types.hpp"

namespace mason {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;
};

inline double distance_m(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

enum class NodeRole { Conforming, LyingNonSybil, SybilAttacker };

enum class MobilityKind { Stationary, Jitter, Trajectory };

struct Mobility {
  MobilityKind kind = MobilityKind::Stationary;
  double jitter_amplitude_m = 0.0;  // per-probe positional jitter
};

// Ground-truth physical device, distinct from the identities it claims.
struct PhysicalNode {
  std::uint32_t node_id = 0;
  Position position;
  double orientation_deg = 0.0;
  double tx_power_dbm = 15.0;  // per-packet settable, [0, 20]
  NodeRole role = NodeRole::Conforming;
  Mobility mobility;
};

// Log-distance path loss with log-normal shadowing, decorrelated on a grid
// of coherence-length cells (position) and coherence bins (orientation).
struct ChannelModel {
  double path_loss_exponent = 3.0;
  double reference_loss_db = 40.0;   // at 1 m
  double sigma_shadow_db = 7.3;      // spatial/temporal variation scale
  double sigma_meas_db = 1.0;        // per-probe measurement noise
  double coherence_length_m = 0.0625;
  double orientation_coherence_deg = 3.0;
  bool reciprocal = true;
  double rx_gain_offset_db = 0.0;    // optional per-receiver constant

  bool valid() const {
    return sigma_shadow_db >= 0 && sigma_meas_db >= 0 &&
           coherence_length_m > 0 && orientation_coherence_deg > 0;
  }
};

// Discretized transmitter/receiver state; two states in the same cell share
// one shadowing draw within a trial, states in different cells get
// independent draws.
struct CoherenceCell {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t io = 0;       // orientation bin
  std::uint32_t node = 0;    // receiver identity for rx cells

  bool operator==(const CoherenceCell&) const = default;
};

CoherenceCell coherence_cell(const Position& p, double orientation_deg,
                             std::uint32_t node, const ChannelModel& m);

// Per-trial shadowing cache. Draws are a pure function of (trial seed,
// unordered cell pair) so results do not depend on query order.
class AttenuationCache {
 public:
  explicit AttenuationCache(std::uint64_t trial_seed)
      : trial_seed_(trial_seed) {}

  double shadow_db(const CoherenceCell& tx, const CoherenceCell& rx,
                   const ChannelModel& m);

  std::uint64_t trial_seed() const { return trial_seed_; }

 private:
  std::uint64_t trial_seed_;
  std::unordered_map<std::uint64_t, double> cache_;
};

struct NodeState {
  Position position;
  double orientation_deg = 0.0;
  std::uint32_t node_id = 0;
};

// Attenuation in dB (negative gain) from transmitter state to receiver
// state: -(pathloss) + shadowing + receiver offset.
// Throws DomainError for coincident positions.
double attenuation(const NodeState& tx, const NodeState& rx,
                   const ChannelModel& m, AttenuationCache& cache);

// One probe's received power: tx_power + attenuation + measurement noise,
// quantized and clipped to the radio range. Noise is keyed by `noise_key`
// so synthesis order does not matter.
double true_rssi(const NodeState& tx, const NodeState& rx,
                 double tx_power_dbm, const ChannelModel& m,
                 AttenuationCache& cache, const RadioConfig& radio,
                 std::uint64_t noise_key);

}  // namespace mason
