#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mason/channel.hpp"

using namespace mason;

namespace {

NodeState state_at(double x, double y, double orient, std::uint32_t id) {
  NodeState s;
  s.position = {x, y};
  s.orientation_deg = orient;
  s.node_id = id;
  return s;
}

}  // namespace

TEST_CASE("path loss follows the log-distance law without shadowing") {
  ChannelModel m;
  m.sigma_shadow_db = 0.0;
  AttenuationCache cache(1);
  const NodeState tx = state_at(0, 0, 0, 0);
  // 40 dB at 1 m, +30 dB per decade at exponent 3
  CHECK(attenuation(tx, state_at(1, 0, 0, 1), m, cache) ==
        doctest::Approx(-40.0));
  CHECK(attenuation(tx, state_at(10, 0, 0, 1), m, cache) ==
        doctest::Approx(-70.0));
  CHECK(attenuation(tx, state_at(100, 0, 0, 1), m, cache) ==
        doctest::Approx(-100.0));
}

TEST_CASE("coincident positions are rejected") {
  ChannelModel m;
  AttenuationCache cache(1);
  CHECK_THROWS_AS(
      attenuation(state_at(2, 3, 0, 0), state_at(2, 3, 0, 1), m, cache),
      DomainError);
}

TEST_CASE("shadowing is reciprocal") {
  ChannelModel m;
  AttenuationCache cache(7);
  const NodeState a = state_at(0, 0, 10, 0);
  const NodeState b = state_at(5, 2, 200, 1);
  CHECK(attenuation(a, b, m, cache) ==
        doctest::Approx(attenuation(b, a, m, cache)));
}

TEST_CASE("same coherence cell, same shadowing draw") {
  ChannelModel m;
  m.sigma_meas_db = 0.0;
  AttenuationCache cache(7);
  const NodeState rx = state_at(10, 0, 0, 1);
  // displacement well inside the 6.25 cm cell
  const double h1 = attenuation(state_at(0.01, 0.01, 0, 0), rx, m, cache);
  const double h2 = attenuation(state_at(0.02, 0.02, 0, 0), rx, m, cache);
  const double pl1 = -(m.reference_loss_db +
                       30.0 * std::log10(distance_m({0.01, 0.01}, {10, 0})));
  const double pl2 = -(m.reference_loss_db +
                       30.0 * std::log10(distance_m({0.02, 0.02}, {10, 0})));
  CHECK(h1 - pl1 == doctest::Approx(h2 - pl2));
}

TEST_CASE("crossing a cell boundary decorrelates the channel") {
  ChannelModel m;
  AttenuationCache cache(7);
  const NodeState rx = state_at(10, 0, 0, 1);
  const double h1 = attenuation(state_at(0.01, 0.01, 0, 0), rx, m, cache);
  const double h2 = attenuation(state_at(0.40, 0.01, 0, 0), rx, m, cache);
  const double pl1 = -(m.reference_loss_db +
                       30.0 * std::log10(distance_m({0.01, 0.01}, {10, 0})));
  const double pl2 = -(m.reference_loss_db +
                       30.0 * std::log10(distance_m({0.40, 0.01}, {10, 0})));
  CHECK(std::abs((h1 - pl1) - (h2 - pl2)) > 1e-9);
}

TEST_CASE("orientation bins decorrelate too") {
  ChannelModel m;
  AttenuationCache cache(7);
  const NodeState rx = state_at(10, 0, 0, 1);
  const double h1 = attenuation(state_at(1, 1, 0.0, 0), rx, m, cache);
  const double h2 = attenuation(state_at(1, 1, 90.0, 0), rx, m, cache);
  CHECK(std::abs(h1 - h2) > 1e-9);
}

TEST_CASE("draws do not depend on query order") {
  ChannelModel m;
  const NodeState a = state_at(0, 0, 0, 0);
  const NodeState b = state_at(5, 0, 0, 1);
  const NodeState c = state_at(0, 5, 0, 2);

  AttenuationCache c1(42), c2(42);
  const double ab1 = attenuation(a, b, m, c1);
  const double ac1 = attenuation(a, c, m, c1);
  const double ac2 = attenuation(a, c, m, c2);
  const double ab2 = attenuation(a, b, m, c2);
  CHECK(ab1 == ab2);
  CHECK(ac1 == ac2);
}

TEST_CASE("different trials draw different shadowing") {
  ChannelModel m;
  const NodeState a = state_at(0, 0, 0, 0);
  const NodeState b = state_at(5, 0, 0, 1);
  AttenuationCache c1(42), c2(43);
  CHECK(attenuation(a, b, m, c1) != attenuation(a, b, m, c2));
}

TEST_CASE("received power is quantized and noise is keyed") {
  ChannelModel m;
  m.sigma_shadow_db = 0.0;
  m.sigma_meas_db = 1.0;
  RadioConfig radio;
  AttenuationCache cache(11);
  const NodeState tx = state_at(0, 0, 0, 0);
  const NodeState rx = state_at(10, 0, 0, 1);
  const double r1 = true_rssi(tx, rx, 15.0, m, cache, radio, 5);
  const double r2 = true_rssi(tx, rx, 15.0, m, cache, radio, 5);
  const double r3 = true_rssi(tx, rx, 15.0, m, cache, radio, 6);
  CHECK(r1 == r2);                          // same key, same draw
  CHECK(r1 == std::round(r1));              // integer dBm
  CHECK(std::abs(r1 - r3) <= 10.0);         // different probe noise
  // noiseless: exactly power + attenuation
  m.sigma_meas_db = 0.0;
  CHECK(true_rssi(tx, rx, 15.0, m, cache, radio, 5) ==
        doctest::Approx(-55.0));
}

TEST_CASE("quantization can be disabled") {
  RadioConfig radio;
  radio.quantization_step = 0.0;
  CHECK(radio.quantize(-54.37) == doctest::Approx(-54.37));
  radio.quantization_step = 1.0;
  CHECK(radio.quantize(-54.37) == -54.0);
  CHECK(radio.quantize(3.2) == 0.0);  // clipped to ceiling
  CHECK(radio.audible(-99.9));
  CHECK_FALSE(radio.audible(-100.1));
}
