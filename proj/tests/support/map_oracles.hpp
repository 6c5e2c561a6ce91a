#pragma once

#include <cstdint>
#include <vector>

#include "gearfd/hdmap.hpp"
#include "gearfd/rng.hpp"

namespace gearfd::testing {

/// Number of grid cells hit exactly once over one hunting cycle, by direct enumeration.
inline int cells_hit_once(int ring, int planet) {
  const std::int64_t hunting = hunting_length(ring, planet);
  std::vector<int> hits(static_cast<std::size_t>(ring) * planet, 0);
  for (std::int64_t k = 1; k <= hunting; ++k) {
    const auto m = meshing_sequence(k, ring, planet);
    ++hits[static_cast<std::size_t>(m.ring_tooth - 1) * planet + (m.planet_tooth - 1)];
  }
  int once = 0;
  for (int h : hits) once += h == 1;
  return once;
}

/// First event k >= 1 with k = r (mod ring) and k = p (mod planet), by scanning.
inline std::int64_t event_of_pair(int ring_tooth, int planet_tooth, int ring, int planet) {
  for (std::int64_t k = 1;; ++k)
    if ((k - 1) % ring + 1 == ring_tooth && (k - 1) % planet + 1 == planet_tooth) return k;
}

/// Places spikes of random amplitude at random cells; returns the number of trials whose map
/// holds exactly the spike and nothing else.
inline int spike_placement_matches(int trials, std::uint64_t seed) {
  const GearGeometry g;
  const int spm = 8;
  Rng rng(seed);
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    const int r = static_cast<int>(rng.uniform_int(1, g.ring_teeth));
    const int p = static_cast<int>(rng.uniform_int(1, g.planet_teeth));
    const double amp = rng.uniform(0.5, 10.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const std::int64_t k = event_of_pair(r, p, g.ring_teeth, g.planet_teeth);
    DifferenceSignal d;
    d.samples_per_mesh = spm;
    d.values.assign(static_cast<std::size_t>(hunting_length(g)) * spm, 0.0);
    d.values[static_cast<std::size_t>(k - 1) * spm + static_cast<std::size_t>(rng.uniform_int(0, spm - 1))] = amp;
    const HDMap m = build_hdmap(d, g);
    bool match = true;
    for (int i = 1; i <= g.ring_teeth; ++i)
      for (int j = 1; j <= g.planet_teeth; ++j)
        match &= m.at(i, j) == (i == r && j == p ? std::abs(amp) : 0.0);
    ok += match;
  }
  return ok;
}

}  // namespace gearfd::testing
