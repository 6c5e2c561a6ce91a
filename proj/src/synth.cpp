#include "gearfd/synth.hpp"

#include <algorithm>
#include <cmath>

#include "gearfd/error.hpp"

namespace gearfd {

std::string to_string(SynthesisMethod m) {
  switch (m) {
    case SynthesisMethod::cutpaste:
      return "cutpaste";
    case SynthesisMethod::scaled_cutpaste:
      return "scaled_cutpaste";
    case SynthesisMethod::faultpaste:
      return "faultpaste";
  }
  return "unknown";
}

SynthesisMethod parse_synthesis_method(const std::string& s) {
  if (s == "cutpaste") return SynthesisMethod::cutpaste;
  if (s == "scaled_cutpaste") return SynthesisMethod::scaled_cutpaste;
  if (s == "faultpaste") return SynthesisMethod::faultpaste;
  throw PreconditionError("unknown synthesis method: " + s);
}

void SynthesisConfig::validate() const {
  if (max_cutpaste_scale < 0.0 || max_faultpaste_scale < 0.0)
    throw PreconditionError("maximum scales must be nonnegative");
  if (patch.width_min < 1 || patch.height_min < 1 || patch.width_max < patch.width_min ||
      patch.height_max < patch.height_min)
    throw PreconditionError("invalid patch ranges");
  if (max_patch_retries < 1) throw PreconditionError("patch retry cap must be positive");
}

Patch sample_patch(const HDMap& x, const PatchRanges& ranges, Rng& rng) {
  const int nr = x.rows();
  const int np = x.cols();
  if (ranges.width_min < 1 || ranges.height_min < 1 || ranges.width_max < ranges.width_min ||
      ranges.height_max < ranges.height_min)
    throw PreconditionError("invalid patch ranges");
  if (ranges.width_max > nr || ranges.height_max > np)
    throw PreconditionError("grid smaller than the largest patch");
  Patch p;
  PatchSpec& s = p.spec;
  s.width = static_cast<int>(rng.uniform_int(ranges.width_min, ranges.width_max));
  s.height = static_cast<int>(rng.uniform_int(ranges.height_min, ranges.height_max));
  s.source_ring = static_cast<int>(rng.uniform_int(0, nr - s.width));
  s.source_planet = static_cast<int>(rng.uniform_int(0, np - s.height));
  const double centre_ring = rng.uniform(0.0, nr - 0.5 * s.width);
  const double centre_planet = rng.uniform(0.0, np - 0.5 * s.height);
  s.paste_ring = std::clamp(static_cast<int>(std::lround(centre_ring - 0.5 * s.width)), 0, nr - s.width);
  s.paste_planet = std::clamp(static_cast<int>(std::lround(centre_planet - 0.5 * s.height)), 0, np - s.height);
  p.values.resize(static_cast<std::size_t>(s.width) * s.height);
  for (int i = 0; i < s.width; ++i)
    for (int j = 0; j < s.height; ++j)
      p.values[static_cast<std::size_t>(i) * s.height + j] = x.at(s.source_ring + i + 1, s.source_planet + j + 1);
  return p;
}

HDMap paste_patch(const HDMap& x, const Patch& patch, double scale, bool normalize) {
  const PatchSpec& s = patch.spec;
  if (s.paste_ring < 0 || s.paste_planet < 0 || s.paste_ring + s.width > x.rows() ||
      s.paste_planet + s.height > x.cols() || patch.values.size() != static_cast<std::size_t>(s.width) * s.height)
    throw PreconditionError("patch does not fit the map");
  double norm = 1.0;
  if (normalize) {
    double peak = 0.0;
    for (double v : patch.values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw DegenerateSignatureError("all-zero patch cannot be normalized");
    norm = peak;
  }
  HDMap out = x;
  for (int i = 0; i < s.width; ++i)
    for (int j = 0; j < s.height; ++j) {
      const double d = scale * (patch.values[static_cast<std::size_t>(i) * s.height + j] / norm);
      if (d != 0.0) out.at(s.paste_ring + i + 1, s.paste_planet + j + 1) += d;
    }
  return out;
}

namespace {

Patch nonzero_patch(const HDMap& x, const SynthesisConfig& config, Rng& rng) {
  for (int attempt = 0; attempt < config.max_patch_retries; ++attempt) {
    Patch p = sample_patch(x, config.patch, rng);
    for (double v : p.values)
      if (v != 0.0) return p;
  }
  throw DegenerateSignatureError("no nonzero patch found within the retry cap");
}

}  // namespace

Synthesized scaled_cutpaste(const HDMap& x, const SynthesisConfig& config, Rng& rng) {
  Patch p = nonzero_patch(x, config, rng);
  p.spec.scale = rng.uniform(0.0, config.max_cutpaste_scale);
  Synthesized out{paste_patch(x, p, p.spec.scale, true), p.spec.scale, p.spec, -1};
  return out;
}

Synthesized cutpaste(const HDMap& x, const SynthesisConfig& config, Rng& rng) {
  Patch p = sample_patch(x, config.patch, rng);
  p.spec.scale = 1.0;
  return {paste_patch(x, p, 1.0, false), 1.0, p.spec, -1};
}

FaultSignature fault_signature(const HDMap& x, const HDMap& reconstruction) {
  if (x.values.size() != reconstruction.values.size() || x.rows() != reconstruction.rows())
    throw PreconditionError("map and reconstruction shapes differ");
  FaultSignature sig;
  sig.grid = x;
  double peak = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double r = x.values[i] - reconstruction.values[i];
    sig.grid.values[i] = r * r;
    peak = std::max(peak, sig.grid.values[i]);
  }
  if (!(peak > 0.0) || !std::isfinite(peak)) throw DegenerateSignatureError("zero or non-finite residual");
  for (double& v : sig.grid.values) v /= peak;
  sig.source_domain = x.provenance.domain;
  sig.source_sample = x.provenance.record_seed;
  return sig;
}

HDMap add_signature(const HDMap& x, const FaultSignature& signature, double scale) {
  if (x.values.size() != signature.grid.values.size() || x.rows() != signature.grid.rows())
    throw PreconditionError("signature shape does not match the map");
  HDMap out = x;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double d = scale * signature.grid.values[i];
    if (d != 0.0) out.values[i] += d;
  }
  return out;
}

Synthesized faultpaste(const HDMap& x, const FaultSignature& signature, const SynthesisConfig& config, Rng& rng) {
  const double a = rng.uniform(0.0, config.max_faultpaste_scale);
  return {add_signature(x, signature, a), a, {}, 0};
}

Synthesized faultpaste(const HDMap& x, std::span<const FaultSignature> pool, const SynthesisConfig& config,
                       Rng& rng) {
  if (pool.empty()) throw PreconditionError("FaultPaste needs at least one signature");
  const auto idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
  Synthesized s = faultpaste(x, pool[idx], config, rng);
  s.signature_index = static_cast<int>(idx);
  return s;
}

Synthesized synthesize(const HDMap& x, const SynthesisConfig& config, std::span<const FaultSignature> pool,
                       Rng& rng) {
  switch (config.method) {
    case SynthesisMethod::cutpaste:
      return cutpaste(x, config, rng);
    case SynthesisMethod::scaled_cutpaste:
      return scaled_cutpaste(x, config, rng);
    case SynthesisMethod::faultpaste:
      return faultpaste(x, pool, config, rng);
  }
  throw PreconditionError("unknown synthesis method");
}

}  // namespace gearfd
