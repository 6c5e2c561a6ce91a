#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "gearfd/error.hpp"
#include "gearfd/gearsim.hpp"

using namespace gearfd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double rms(const std::vector<float>& x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

TimeSeriesRecord record(char domain, HealthLevel level, std::uint64_t seed) {
  const GearGeometry g;
  const DomainSpec d = domain_spec(domain);
  const HealthState h = level == HealthLevel::normal ? HealthState::normal() : HealthState::faulty(level, 26);
  return simulate_record(g, d, h, duration_for_hunting_cycles(g, d, 10), seed);
}

}  // namespace

TEST(Geometry, DefaultsAndValidation) {
  const GearGeometry g;
  EXPECT_EQ(g.ring_teeth, 95);
  EXPECT_EQ(g.planet_teeth, 31);
  EXPECT_EQ(g.sun_teeth, 31);
  EXPECT_EQ(g.planet_count, 3);
  EXPECT_NO_THROW(g.validate());
  GearGeometry bad = g;
  bad.planet_teeth = 96;
  EXPECT_THROW(bad.validate(), PreconditionError);
  bad = g;
  bad.planet_count = 0;
  EXPECT_THROW(bad.validate(), PreconditionError);
}

TEST(Domains, SensorAndSpeedAxes) {
  const auto a = domain_spec('A'), b = domain_spec('B'), c = domain_spec('C'), d = domain_spec('D');
  EXPECT_EQ(a.sensor, SensorType::mems);
  EXPECT_EQ(a.speed, SpeedMode::stationary);
  EXPECT_EQ(b.sensor, SensorType::mems);
  EXPECT_EQ(b.speed, SpeedMode::non_stationary);
  EXPECT_EQ(c.sensor, SensorType::iepe);
  EXPECT_EQ(c.speed, SpeedMode::stationary);
  EXPECT_EQ(d.sensor, SensorType::iepe);
  EXPECT_EQ(d.speed, SpeedMode::non_stationary);
  for (const auto& s : {a, b, c, d}) EXPECT_NO_THROW(s.validate());
  EXPECT_GT(a.noise_floor, c.noise_floor);
  EXPECT_GT(b.noise_floor, d.noise_floor);
  // 10 dB SNR difference relative to the transmitted vibration.
  EXPECT_NEAR(20.0 * std::log10((a.noise_floor / a.path_gain) / (c.noise_floor / c.path_gain)), 10.0, 1e-9);
  EXPECT_NEAR(20.0 * std::log10((b.noise_floor / b.path_gain) / (d.noise_floor / d.path_gain)), 10.0, 1e-9);
  EXPECT_EQ(a.speed_modulation_depth, 0.0);
  EXPECT_EQ(c.speed_modulation_depth, 0.0);
  EXPECT_GT(b.speed_modulation_depth, 0.0);
  EXPECT_GT(d.speed_modulation_depth, 0.0);
  EXPECT_THROW(domain_spec('E'), PreconditionError);
}

TEST(Health, Fault2ImpactsExceedFault1) {
  EXPECT_EQ(impact_amplitude_factor(HealthLevel::normal), 0.0);
  EXPECT_EQ(impact_amplitude_factor(HealthLevel::fault1), 3.0);
  EXPECT_EQ(impact_amplitude_factor(HealthLevel::fault2), 6.0);
  EXPECT_EQ(parse_health("fault2"), HealthLevel::fault2);
  EXPECT_THROW(parse_health("fault3"), PreconditionError);
}

TEST(Drift, PiecewiseLinear) {
  const DriftProfile d;
  EXPECT_DOUBLE_EQ(d.gain(0.0), 1.0);
  EXPECT_DOUBLE_EQ(d.gain(900.0), 0.9);
  EXPECT_DOUBLE_EQ(d.gain(1800.0), 0.8);
  EXPECT_DOUBLE_EQ(d.gain(5000.0), 0.8);
}

TEST(SpeedProfile, StationaryIsConstantRate) {
  const DomainSpec a = domain_spec('A');
  const CarrierAngle angle = speed_profile(a, 2.0, 5);
  for (double n = 0.0; n < 2.0 * 25600; n += 137.25)
    EXPECT_NEAR(angle.at_sample(n), kTwoPi * a.nominal_carrier_hz * n / 25600.0, 1e-9) << n;
}

TEST(SpeedProfile, ModulatedRateStaysWithinDepth) {
  DomainSpec b = domain_spec('B');
  b.speed_modulation_depth = 0.2;
  double lo = 1e9, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CarrierAngle angle = speed_profile(b, 6.0, seed);
    const double dt = 1e-4;
    for (double t = dt; t < 6.0 - dt; t += 3e-3) {
      const double rate = (angle(t + dt) - angle(t - dt)) / (2 * dt) / kTwoPi;
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
    }
  }
  const double f0 = b.nominal_carrier_hz;
  // Anchors sit on whole samples, which perturbs the rate by well under a percent.
  EXPECT_GE(lo, 0.8 * f0 * 0.995);
  EXPECT_LE(hi, 1.2 * f0 * 1.005);
  EXPECT_LT(lo, 0.85 * f0);
  EXPECT_GT(hi, 1.15 * f0);
}

TEST(SpeedProfile, DeterministicAndValidated) {
  const DomainSpec b = domain_spec('B');
  EXPECT_EQ(speed_profile(b, 3.0, 11).anchors(), speed_profile(b, 3.0, 11).anchors());
  EXPECT_NE(speed_profile(b, 3.0, 11).anchors(), speed_profile(b, 3.0, 12).anchors());
  EXPECT_THROW(speed_profile(b, 0.0, 1), PreconditionError);
  EXPECT_THROW(speed_profile(b, -1.0, 1), PreconditionError);
}

TEST(CarrierAngle, InverseAndAnchors) {
  const CarrierAngle angle = speed_profile(domain_spec('D'), 2.0, 3);
  const auto& a = angle.anchors();
  for (std::size_t r = 0; r < a.size(); ++r) EXPECT_NEAR(angle.at_sample(a[r]), kTwoPi * r, 1e-9);
  for (double theta = 0.3; theta < 50.0; theta += 1.7) EXPECT_NEAR(angle.at_sample(angle.sample_at_angle(theta)), theta, 1e-9);
  EXPECT_THROW(CarrierAngle({1.0}, 25600.0), PreconditionError);
  EXPECT_THROW(CarrierAngle({1.0, 1.0}, 25600.0), PreconditionError);
}

TEST(Simulate, DeterministicRecords) {
  const auto a = record('B', HealthLevel::fault1, 42);
  const auto b = record('B', HealthLevel::fault1, 42);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.tacho_events, b.tacho_events);
  EXPECT_EQ(encode_record(a), encode_record(b));
  EXPECT_NE(record('B', HealthLevel::fault1, 43).samples, a.samples);
}

TEST(Simulate, TachoIsOnePulsePerRevolution) {
  for (char d : {'A', 'B', 'C', 'D'}) {
    const auto r = record(d, HealthLevel::normal, 3);
    ASSERT_GE(r.tacho_events.size(), 2u);
    for (std::size_t i = 1; i < r.tacho_events.size(); ++i) EXPECT_LT(r.tacho_events[i - 1], r.tacho_events[i]);
    std::vector<double> anchors(r.tacho_events.begin(), r.tacho_events.end());
    const CarrierAngle angle(anchors, r.sample_rate);
    for (std::size_t i = 1; i < anchors.size(); ++i)
      EXPECT_NEAR(angle.at_sample(anchors[i]) - angle.at_sample(anchors[i - 1]), kTwoPi, 1e-6);
    // Enough revolutions for ten hunting-tooth cycles.
    EXPECT_GE(static_cast<double>(r.tacho_events.size() - 1) * r.geometry.ring_teeth, 10.0 * 2945);
  }
}

TEST(Simulate, ImpactsOnlyWhenFaultyToothEngages) {
  // Equal seeds share noise and healthy transients, so the difference isolates the impacts.
  const auto normal = record('A', HealthLevel::normal, 8);
  const auto faulty = record('A', HealthLevel::fault1, 8);
  std::vector<double> anchors(normal.tacho_events.begin(), normal.tacho_events.end());
  const CarrierAngle angle(anchors, normal.sample_rate);
  const std::size_t n = normal.samples.size();
  const double support = 6.0 * normal.domain.resonance_decay_s * normal.sample_rate + 2.0;

  std::vector<std::uint8_t> covered(n, 0);
  int checked = 0;
  for (std::int64_t k = 1;; ++k) {
    const double start = angle.sample_at_angle(kTwoPi * static_cast<double>(k - 1) / 95.0);
    if (start >= static_cast<double>(n) - support) break;
    if ((k - 1) % 31 + 1 != 26) continue;
    const auto i0 = static_cast<std::size_t>(std::ceil(start));
    for (std::size_t j = i0; j < std::min(n, static_cast<std::size_t>(start + support)); ++j) covered[j] = 1;
    bool hit = false;
    for (std::size_t j = i0; j < i0 + 4; ++j) hit |= faulty.samples[j] != normal.samples[j];
    EXPECT_TRUE(hit) << "event " << k;
    ++checked;
  }
  EXPECT_GT(checked, 900);
  std::size_t stray = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (!covered[j] && faulty.samples[j] != normal.samples[j]) ++stray;
  EXPECT_EQ(stray, 0u);
}

TEST(Simulate, ImpactEventBookkeeping) {
  const GearGeometry g;
  const auto e1 = impact_events(g, HealthState::faulty(HealthLevel::fault1, 26), 2945 * 2);
  std::vector<std::int64_t> brute;
  for (std::int64_t k = 1; k <= 2945 * 2; ++k)
    if ((k - 1) % 31 == 25) brute.push_back(k);
  EXPECT_EQ(e1, brute);
  EXPECT_EQ(e1.size(), 190u);
  const auto e2 = impact_events(g, HealthState::faulty(HealthLevel::fault2, 26), 2945);
  std::set<int> teeth;
  for (auto k : e2) teeth.insert(static_cast<int>((k - 1) % 31) + 1);
  EXPECT_EQ(teeth, (std::set<int>{25, 26, 27}));
  EXPECT_TRUE(impact_events(g, HealthState::normal(), 2945).empty());
  EXPECT_THROW(impact_events(g, HealthState::faulty(HealthLevel::fault1, 32), 10), PreconditionError);
}

TEST(Simulate, EnergyOrderingOverSeeds) {
  for (char d : {'A', 'D'}) {
    int ordered = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const double r0 = rms(record(d, HealthLevel::normal, seed).samples);
      const double r1 = rms(record(d, HealthLevel::fault1, seed).samples);
      const double r2 = rms(record(d, HealthLevel::fault2, seed).samples);
      ordered += r2 >= r1 && r1 >= r0;
    }
    EXPECT_GE(ordered, 18) << d;
  }
}

TEST(Simulate, RejectsShortRecordsAndBadInputs) {
  const GearGeometry g;
  const DomainSpec a = domain_spec('A');
  const double ten = duration_for_hunting_cycles(g, a, 10, 0.0);
  EXPECT_THROW(simulate_record(g, a, HealthState::normal(), 0.9 * ten, 1), PreconditionError);
  DomainSpec e = a;
  e.id = 'E';
  EXPECT_THROW(simulate_record(g, e, HealthState::normal(), 2 * ten, 1), PreconditionError);
  EXPECT_THROW(simulate_record(g, a, HealthState::faulty(HealthLevel::fault1, 0), 2 * ten, 1), PreconditionError);
}

TEST(Gsr1, RoundTripIsByteIdentical) {
  auto r = record('C', HealthLevel::fault2, 4);
  r.session_time_s = 123.5;
  const auto bytes = encode_record(r);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GSR1");
  const auto back = decode_record(bytes);
  EXPECT_EQ(back.samples, r.samples);
  EXPECT_EQ(back.tacho_events, r.tacho_events);
  EXPECT_EQ(back.health.level, HealthLevel::fault2);
  EXPECT_EQ(back.health.faulty_planet_tooth, 26);
  EXPECT_EQ(back.domain.id, 'C');
  EXPECT_EQ(back.session_time_s, 123.5);
  EXPECT_EQ(encode_record(back), bytes);
}

TEST(Gsr1, MalformedInputRejected) {
  const auto bytes = encode_record(record('A', HealthLevel::normal, 1));
  auto truncated = bytes;
  truncated.resize(bytes.size() / 3);
  EXPECT_THROW(decode_record(truncated), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_record(magic), FormatError);
  auto meta = bytes;
  meta.back() = '#';
  EXPECT_THROW(decode_record(meta), FormatError);
  try {
    decode_record(truncated);
  } catch (const FormatError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}
