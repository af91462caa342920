#include "mason/channel.hpp"

#include <cmath>

namespace mason {

namespace {

std::uint64_t cell_key(const CoherenceCell& c) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  h = mix_seed(h, static_cast<std::uint64_t>(c.ix));
  h = mix_seed(h, static_cast<std::uint64_t>(c.iy));
  h = mix_seed(h, static_cast<std::uint64_t>(c.io));
  h = mix_seed(h, c.node);
  return h;
}

}  // namespace

CoherenceCell coherence_cell(const Position& p, double orientation_deg,
                             std::uint32_t node, const ChannelModel& m) {
  CoherenceCell c;
  c.ix = static_cast<std::int64_t>(std::floor(p.x / m.coherence_length_m));
  c.iy = static_cast<std::int64_t>(std::floor(p.y / m.coherence_length_m));
  c.io = static_cast<std::int64_t>(
      std::floor(orientation_deg / m.orientation_coherence_deg));
  c.node = node;
  return c;
}

double AttenuationCache::shadow_db(const CoherenceCell& tx,
                                   const CoherenceCell& rx,
                                   const ChannelModel& m) {
  std::uint64_t ka = cell_key(tx);
  std::uint64_t kb = cell_key(rx);
  if (m.reciprocal && ka > kb) std::swap(ka, kb);
  const std::uint64_t key = mix_seed(ka, kb);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double draw =
      keyed_gaussian(trial_seed_, key, 0.0, m.sigma_shadow_db);
  cache_.emplace(key, draw);
  return draw;
}

double attenuation(const NodeState& tx, const NodeState& rx,
                   const ChannelModel& m, AttenuationCache& cache) {
  const double d = distance_m(tx.position, rx.position);
  if (d <= 0.0) throw DomainError("attenuation: coincident positions");
  const double pathloss =
      m.reference_loss_db + 10.0 * m.path_loss_exponent * std::log10(d);
  const CoherenceCell ct =
      coherence_cell(tx.position, tx.orientation_deg, tx.node_id, m);
  const CoherenceCell cr =
      coherence_cell(rx.position, rx.orientation_deg, rx.node_id, m);
  return -pathloss + cache.shadow_db(ct, cr, m) + m.rx_gain_offset_db;
}

double true_rssi(const NodeState& tx, const NodeState& rx,
                 double tx_power_dbm, const ChannelModel& m,
                 AttenuationCache& cache, const RadioConfig& radio,
                 std::uint64_t noise_key) {
  const double h = attenuation(tx, rx, m, cache);
  const double noise = keyed_gaussian(
      mix_seed(cache.trial_seed(), 0x6d656173ULL), noise_key, 0.0,
      m.sigma_meas_db);
  return radio.quantize(tx_power_dbm + h + noise);
}

}  // namespace mason
