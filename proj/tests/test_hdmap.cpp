#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "gearfd/error.hpp"
#include "gearfd/hdmap.hpp"
#include "support/map_oracles.hpp"

using namespace gearfd;
using namespace gearfd::testing;

namespace {

DifferenceSignal random_difference(std::uint64_t seed, int spm = 8, int cycles = 1) {
  Rng rng(seed);
  DifferenceSignal d;
  d.samples_per_mesh = spm;
  d.values.resize(static_cast<std::size_t>(2945) * spm * cycles);
  for (double& v : d.values) v = rng.normal();
  return d;
}

}  // namespace

TEST(Hunting, Length) {
  EXPECT_EQ(hunting_length(95, 31), 2945);
  EXPECT_EQ(std::gcd(95, 31), 1);
  EXPECT_EQ(hunting_length(4, 2), 4);
  EXPECT_EQ(hunting_length(17, 17), 17);
  for (int a = 1; a <= 20; ++a)
    for (int b = 1; b <= a; ++b) {
      std::int64_t period = 1;
      while (!(period % a == 0 && period % b == 0)) ++period;
      EXPECT_EQ(hunting_length(a, b), period);
    }
  EXPECT_THROW(hunting_length(0, 3), PreconditionError);
}

TEST(Meshing, Sequence) {
  EXPECT_EQ(meshing_sequence(1, 95, 31), (MeshingIndex{1, 1, 1}));
  EXPECT_EQ(meshing_sequence(96, 95, 31), (MeshingIndex{96, 1, 3}));
  const auto a = meshing_sequence(2946, 95, 31), b = meshing_sequence(1, 95, 31);
  EXPECT_EQ(a.ring_tooth, b.ring_tooth);
  EXPECT_EQ(a.planet_tooth, b.planet_tooth);
  EXPECT_THROW(meshing_sequence(0, 95, 31), PreconditionError);
}

TEST(Meshing, BijectionOntoTheGrid) {
  EXPECT_EQ(cells_hit_once(95, 31), 2945);
  Rng rng(2);
  int tried = 0;
  while (tried < 25) {
    const int r = static_cast<int>(rng.uniform_int(2, 50));
    const int p = static_cast<int>(rng.uniform_int(1, r));
    if (std::gcd(r, p) != 1) continue;
    EXPECT_EQ(cells_hit_once(r, p), r * p) << r << "," << p;
    ++tried;
  }
}

TEST(Build, SpikePlacement) {
  const GearGeometry g;
  const std::int64_t k = event_of_pair(10, 26, 95, 31);
  EXPECT_EQ(meshing_sequence(k, 95, 31), (MeshingIndex{k, 10, 26}));
  DifferenceSignal d;
  d.samples_per_mesh = 32;
  d.values.assign(2945 * 32, 0.0);
  d.values[(k - 1) * 32 + 7] = 5.0;
  const HDMap m = build_hdmap(d, g);
  EXPECT_EQ(m.at(10, 26), 5.0);
  EXPECT_EQ(std::count(m.values.begin(), m.values.end(), 0.0), 2944);
  EXPECT_EQ(spike_placement_matches(100, 77), 100);
}

TEST(Build, ZeroScaleAndNonnegative) {
  const GearGeometry g;
  DifferenceSignal zero;
  zero.samples_per_mesh = 8;
  zero.values.assign(2945 * 8, 0.0);
  const HDMap z = build_hdmap(zero, g);
  EXPECT_TRUE(std::all_of(z.values.begin(), z.values.end(), [](double v) { return v == 0.0; }));

  DifferenceSignal d = random_difference(4);
  const HDMap m = build_hdmap(d, g);
  EXPECT_TRUE(std::all_of(m.values.begin(), m.values.end(), [](double v) { return v > 0.0; }));
  for (double& v : d.values) v *= 2.5;
  const HDMap scaled = build_hdmap(d, g);
  for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_DOUBLE_EQ(scaled.values[i], 2.5 * m.values[i]);
}

TEST(Build, ShiftByWholeCycleLeavesMapUnchanged) {
  const GearGeometry g;
  const DifferenceSignal two = random_difference(5, 8, 2);
  DifferenceSignal first, second;
  first.samples_per_mesh = second.samples_per_mesh = 8;
  const std::size_t L = 2945 * 8;
  first.values.assign(two.values.begin(), two.values.begin() + L);
  second.values = first.values;
  std::rotate(second.values.begin(), second.values.begin() + L, second.values.end());
  EXPECT_EQ(build_hdmap(first, g).values, build_hdmap(second, g).values);
}

TEST(Build, LengthMismatchRejected) {
  DifferenceSignal d = random_difference(6);
  d.values.pop_back();
  EXPECT_THROW(build_hdmap(d, GearGeometry{}), PreconditionError);
}

TEST(Pipeline, FaultyToothColumnDominates) {
  const GearGeometry g;
  for (char domain : {'A', 'C'}) {
    const DomainSpec spec = domain_spec(domain);
    const auto rec = simulate_record(g, spec, HealthState::faulty(HealthLevel::fault2, 26),
                                     duration_for_hunting_cycles(g, spec, 10), 12);
    const HDMap m = record_to_hdmap(rec);
    const auto it = std::max_element(m.values.begin(), m.values.end());
    const auto col = static_cast<int>((it - m.values.begin()) % g.planet_teeth) + 1;
    EXPECT_NEAR(col, 26, 1) << domain;
    EXPECT_EQ(m.provenance.health, HealthLevel::fault2);
    EXPECT_EQ(m.provenance.domain, domain);
  }
}

TEST(Pipeline, NormalMapsHaveNoDominantPlanetTooth) {
  const GearGeometry g;
  const DomainSpec spec = domain_spec('C');
  const auto rec = simulate_record(g, spec, HealthState::normal(), duration_for_hunting_cycles(g, spec, 10), 13);
  const HDMap m = record_to_hdmap(rec);
  std::vector<double> col_mean(g.planet_teeth, 0.0);
  for (int i = 1; i <= g.ring_teeth; ++i)
    for (int j = 1; j <= g.planet_teeth; ++j) col_mean[j - 1] += m.at(i, j) / g.ring_teeth;
  const double top = *std::max_element(col_mean.begin(), col_mean.end());
  const double avg = std::accumulate(col_mean.begin(), col_mean.end(), 0.0) / g.planet_teeth;
  EXPECT_LT(top, 1.5 * avg);
}

TEST(Hdm1, RoundTrip) {
  HdmapSet set;
  set.label = 1;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    HDMap m = build_hdmap(random_difference(s), set.geometry);
    for (double& v : m.values) v = static_cast<float>(v);
    set.maps.push_back(m);
  }
  const auto bytes = encode_hdmaps(set);
  EXPECT_EQ(bytes.size(), 4 + 4 * 3 + 1 + 3 * 2945 * 4u);
  const HdmapSet back = decode_hdmaps(bytes);
  EXPECT_EQ(back.label, 1);
  ASSERT_EQ(back.maps.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.maps[i].values, set.maps[i].values);
    EXPECT_EQ(back.maps[i].provenance.health, HealthLevel::fault1);
  }
  EXPECT_EQ(encode_hdmaps(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "gearfd_test_maps.hdm";
  write_hdmaps(path, back);
  EXPECT_EQ(encode_hdmaps(read_hdmaps(path)), bytes);
  std::filesystem::remove(path);
}

TEST(Hdm1, MalformedRejected) {
  HdmapSet set;
  set.maps.push_back(build_hdmap(random_difference(1), set.geometry));
  auto bytes = encode_hdmaps(set);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  EXPECT_THROW(decode_hdmaps(truncated), FormatError);
  auto magic = bytes;
  magic[3] = '2';
  EXPECT_THROW(decode_hdmaps(magic), FormatError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_hdmaps(longer), FormatError);
  EXPECT_THROW(read_hdmaps("/nonexistent/gearfd.hdm"), std::exception);
}
