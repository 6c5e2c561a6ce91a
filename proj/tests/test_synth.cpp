#include <gtest/gtest.h>

#include <algorithm>

#include "gearfd/error.hpp"
#include "gearfd/synth.hpp"
#include "support/synth_oracles.hpp"

using namespace gearfd;
using namespace gearfd::testing;

namespace {

std::pair<int, int> argmax_cell(const std::vector<double>& v, int cols) {
  const auto i = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  return {i / cols, i % cols};
}

}  // namespace

TEST(Config, Defaults) {
  const SynthesisConfig c;
  EXPECT_EQ(c.max_cutpaste_scale, 30.0);
  EXPECT_EQ(c.max_faultpaste_scale, 30.0);
  EXPECT_EQ(c.patch.width_min, 16);
  EXPECT_EQ(c.patch.width_max, 48);
  EXPECT_EQ(c.patch.height_min, 1);
  EXPECT_EQ(c.patch.height_max, 3);
  SynthesisConfig bad = c;
  bad.max_faultpaste_scale = -1.0;
  EXPECT_THROW(bad.validate(), PreconditionError);
  EXPECT_EQ(parse_synthesis_method(to_string(SynthesisMethod::faultpaste)), SynthesisMethod::faultpaste);
  EXPECT_THROW(parse_synthesis_method("mixup"), PreconditionError);
}

TEST(Patch, AlwaysInsideTheGrid) {
  Rng rng(1);
  const HDMap x = random_map(rng);
  const PatchRanges r;
  for (int t = 0; t < 10000; ++t) {
    const Patch p = sample_patch(x, r, rng);
    const PatchSpec& s = p.spec;
    ASSERT_GE(s.width, 16);
    ASSERT_LE(s.width, 48);
    ASSERT_GE(s.height, 1);
    ASSERT_LE(s.height, 3);
    ASSERT_GE(s.source_ring, 0);
    ASSERT_GE(s.source_planet, 0);
    ASSERT_LE(s.source_ring + s.width, 95);
    ASSERT_LE(s.source_planet + s.height, 31);
    ASSERT_GE(s.paste_ring, 0);
    ASSERT_GE(s.paste_planet, 0);
    ASSERT_LE(s.paste_ring + s.width, 95);
    ASSERT_LE(s.paste_planet + s.height, 31);
    ASSERT_EQ(p.values.size(), static_cast<std::size_t>(s.width * s.height));
    ASSERT_EQ(p.values.front(), x.at(s.source_ring + 1, s.source_planet + 1));
  }
}

TEST(Patch, FullWidthAndSingleRowRanges) {
  Rng rng(2);
  const HDMap x = random_map(rng);
  PatchRanges full{95, 95, 1, 1};
  for (int t = 0; t < 200; ++t) {
    const Patch p = sample_patch(x, full, rng);
    EXPECT_EQ(p.spec.paste_ring, 0);
    EXPECT_EQ(p.spec.source_ring, 0);
    EXPECT_EQ(p.spec.height, 1);
  }
  PatchRanges too_wide{16, 96, 1, 3};
  EXPECT_THROW(sample_patch(x, too_wide, rng), PreconditionError);
}

TEST(CutPaste, ExactIdentitiesOverManyDraws) {
  const auto c = check_synthesis_identities(10000, 3);
  EXPECT_EQ(c.zero_scale_failures, 0);
  EXPECT_EQ(c.locality_failures, 0);
  EXPECT_EQ(c.linearity_failures, 0);
}

TEST(CutPaste, NormalizedPatchPeakEqualsScale) {
  Rng rng(4);
  const HDMap x = random_map(rng);
  Patch p = sample_patch(x, PatchRanges{}, rng);
  std::fill(p.values.begin(), p.values.end(), 1.0);
  p.values[3] = -4.0;
  const HDMap out = paste_patch(x, p, 10.0, true);
  double peak = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) peak = std::max(peak, std::abs(out.values[i] - x.values[i]));
  EXPECT_NEAR(peak, 10.0, 1e-12);
}

TEST(CutPaste, ScalesOneFiveTen) {
  Rng rng(5);
  const HDMap x = random_map(rng);
  const Patch p = sample_patch(x, PatchRanges{}, rng);
  const HDMap o1 = paste_patch(x, p, 1.0, true), o5 = paste_patch(x, p, 5.0, true), o10 = paste_patch(x, p, 10.0, true);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double d1 = o1.values[i] - x.values[i];
    EXPECT_NEAR(o5.values[i] - x.values[i], 5.0 * d1, 1e-12);
    EXPECT_NEAR(o10.values[i] - x.values[i], 10.0 * d1, 1e-12);
    EXPECT_EQ(d1 != 0.0, o10.values[i] != x.values[i]);
  }
}

TEST(CutPaste, ScaleDrawAndDeterminism) {
  Rng rng(6);
  const HDMap x = random_map(rng);
  SynthesisConfig cfg;
  cfg.max_cutpaste_scale = 7.0;
  Rng r1(9), r2(9);
  for (int t = 0; t < 500; ++t) {
    const auto a = scaled_cutpaste(x, cfg, r1);
    const auto b = scaled_cutpaste(x, cfg, r2);
    ASSERT_GE(a.scale, 0.0);
    ASSERT_LT(a.scale, 7.0);
    ASSERT_EQ(a.scale, b.scale);
    ASSERT_EQ(a.patch.paste_ring, b.patch.paste_ring);
    ASSERT_TRUE(bit_identical(a.map, b.map));
  }
  cfg.max_cutpaste_scale = 0.0;
  EXPECT_TRUE(bit_identical(scaled_cutpaste(x, cfg, r1).map, x));
}

TEST(CutPaste, ZeroMapExhaustsRetries) {
  Rng rng(7);
  HDMap x = random_map(rng);
  std::fill(x.values.begin(), x.values.end(), 0.0);
  EXPECT_THROW(scaled_cutpaste(x, SynthesisConfig{}, rng), DegenerateSignatureError);
}

TEST(CutPaste, UnscaledAddsRawPatch) {
  Rng rng(8);
  const HDMap x = random_map(rng);
  const auto s = cutpaste(x, SynthesisConfig{}, rng);
  EXPECT_EQ(s.scale, 1.0);
  const PatchSpec& p = s.patch;
  EXPECT_DOUBLE_EQ(s.map.at(p.paste_ring + 1, p.paste_planet + 1),
                   x.at(p.paste_ring + 1, p.paste_planet + 1) + x.at(p.source_ring + 1, p.source_planet + 1));
}

TEST(Signature, PropertiesAndDegenerateCase) {
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const HDMap x = random_map(rng), y = random_map(rng);
    const FaultSignature s = fault_signature(x, y);
    EXPECT_GE(*std::min_element(s.grid.values.begin(), s.grid.values.end()), 0.0);
    EXPECT_EQ(*std::max_element(s.grid.values.begin(), s.grid.values.end()), 1.0);
  }
  const HDMap x = random_map(rng);
  EXPECT_THROW(fault_signature(x, x), DegenerateSignatureError);
  HDMap small = x;
  small.geometry.ring_teeth = 31;
  small.values.resize(31 * 31);
  EXPECT_THROW(fault_signature(x, small), PreconditionError);
}

TEST(FaultPaste, PeakCellAndRowPreservation) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const HDMap x = random_map(rng);
    const FaultSignature sig = fault_signature(x, random_map(rng));
    const HDMap out = add_signature(x, sig, 10.0);
    const auto peak = argmax_cell(sig.grid.values, 31);
    EXPECT_DOUBLE_EQ(out.at(peak.first + 1, peak.second + 1), x.at(peak.first + 1, peak.second + 1) + 10.0);
    std::vector<double> diff(x.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out.values[i] - x.values[i];
    EXPECT_EQ(argmax_cell(diff, 31), peak);
  }
}

TEST(FaultPaste, GradedSeverityOnUnchangedBackground) {
  Rng rng(12);
  const HDMap x = random_map(rng);
  const FaultSignature sig = fault_signature(x, random_map(rng));
  for (double a : {1.0, 5.0, 10.0}) {
    const HDMap out = add_signature(x, sig, a);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      if (sig.grid.values[i] == 0.0) EXPECT_EQ(out.values[i], x.values[i]);
      EXPECT_NEAR(out.values[i] - x.values[i], a * sig.grid.values[i], 1e-12);
    }
  }
}

TEST(FaultPaste, PoolDrawAndErrors) {
  Rng rng(13);
  const HDMap x = random_map(rng);
  std::vector<FaultSignature> pool;
  for (int i = 0; i < 4; ++i) pool.push_back(fault_signature(x, random_map(rng)));
  SynthesisConfig cfg;
  cfg.method = SynthesisMethod::faultpaste;
  std::vector<int> seen(4, 0);
  for (int t = 0; t < 400; ++t) {
    const auto s = synthesize(x, cfg, pool, rng);
    ASSERT_GE(s.signature_index, 0);
    ASSERT_LT(s.signature_index, 4);
    ASSERT_LT(s.scale, 30.0);
    ++seen[s.signature_index];
  }
  for (int n : seen) EXPECT_GT(n, 50);
  EXPECT_THROW(synthesize(x, cfg, {}, rng), PreconditionError);
  HDMap other = x;
  other.geometry.ring_teeth = 31;
  other.values.resize(31 * 31);
  EXPECT_THROW(add_signature(other, pool.front(), 1.0), PreconditionError);
}
