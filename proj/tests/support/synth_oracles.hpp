#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "gearfd/synth.hpp"

namespace gearfd::testing {

inline HDMap random_map(Rng& rng, const GearGeometry& g = {}) {
  HDMap m;
  m.geometry = g;
  m.values.resize(static_cast<std::size_t>(g.ring_teeth) * g.planet_teeth);
  for (double& v : m.values) v = rng.uniform(0.0, 2.0);
  return m;
}

inline bool bit_identical(const HDMap& a, const HDMap& b) {
  return a.values.size() == b.values.size() &&
         std::equal(a.values.begin(), a.values.end(), b.values.begin(),
                    [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); });
}

struct SynthIdentityCounts {
  int draws = 0;
  int zero_scale_failures = 0;  // a = 0 does not return the input bit for bit
  int locality_failures = 0;    // a change outside the paste rectangle, or a wrong value inside
  int linearity_failures = 0;   // increment at 2^k a differs from 2^k times the increment at a
};

/// Random maps, patches, signatures and scales; every identity is checked with exact equality.
inline SynthIdentityCounts check_synthesis_identities(int draws, std::uint64_t seed) {
  Rng rng(seed);
  const PatchRanges ranges;
  SynthIdentityCounts c;
  c.draws = draws;
  for (int t = 0; t < draws; ++t) {
    const HDMap x = random_map(rng);
    HDMap zero = x;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    const double a = rng.uniform(0.0, 30.0);
    const double k = std::ldexp(1.0, static_cast<int>(rng.uniform_int(-3, 3)));

    // Scaled CutPaste.
    const Patch p = sample_patch(x, ranges, rng);
    c.zero_scale_failures += !bit_identical(paste_patch(x, p, 0.0, true), x);
    const HDMap out = paste_patch(x, p, a, true);
    double peak = 0.0;
    for (double v : p.values) peak = std::max(peak, std::abs(v));
    bool local = true;
    for (int i = 1; i <= x.rows(); ++i)
      for (int j = 1; j <= x.cols(); ++j) {
        const int di = i - 1 - p.spec.paste_ring, dj = j - 1 - p.spec.paste_planet;
        const bool inside = di >= 0 && di < p.spec.width && dj >= 0 && dj < p.spec.height;
        const double expect =
            inside ? x.at(i, j) + a * (p.values[static_cast<std::size_t>(di) * p.spec.height + dj] / peak) : x.at(i, j);
        local &= std::bit_cast<std::uint64_t>(out.at(i, j)) == std::bit_cast<std::uint64_t>(expect);
      }
    c.locality_failures += !local;
    const HDMap inc = paste_patch(zero, p, a, true);
    const HDMap inc_k = paste_patch(zero, p, k * a, true);
    bool linear = true;
    for (std::size_t i = 0; i < inc.values.size(); ++i) linear &= inc_k.values[i] == k * inc.values[i];
    c.linearity_failures += !linear;

    // FaultPaste.
    FaultSignature sig = fault_signature(x, random_map(rng));
    c.zero_scale_failures += !bit_identical(add_signature(x, sig, 0.0), x);
    const HDMap fp = add_signature(x, sig, a);
    bool fp_exact = true;
    for (std::size_t i = 0; i < x.values.size(); ++i) fp_exact &= fp.values[i] == x.values[i] + a * sig.grid.values[i];
    c.locality_failures += !fp_exact;
    const HDMap fi = add_signature(zero, sig, a);
    const HDMap fk = add_signature(zero, sig, k * a);
    bool fp_linear = true;
    for (std::size_t i = 0; i < fi.values.size(); ++i) fp_linear &= fk.values[i] == k * fi.values[i];
    c.linearity_failures += !fp_linear;
  }
  return c;
}

}  // namespace gearfd::testing
