#pragma once

// Faulty-map synthesis from healthy maps: (scaled) CutPaste and FaultPaste.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gearfd/hdmap.hpp"
#include "gearfd/rng.hpp"

namespace gearfd {

enum class SynthesisMethod { cutpaste, scaled_cutpaste, faultpaste };

std::string to_string(SynthesisMethod m);
SynthesisMethod parse_synthesis_method(const std::string& s);

/// Patch extents. Width runs along the ring-tooth axis, height along the planet-tooth axis,
/// so the default ranges give horizontally long, thin patches.
struct PatchRanges {
  int width_min = 16;
  int width_max = 48;
  int height_min = 1;
  int height_max = 3;
};

struct SynthesisConfig {
  SynthesisMethod method = SynthesisMethod::scaled_cutpaste;
  double max_cutpaste_scale = 30.0;
  double max_faultpaste_scale = 30.0;
  PatchRanges patch;
  std::uint64_t seed = 0;
  int max_patch_retries = 32;

  void validate() const;
};

/// Corners are 0-based (ring index, planet index) of the top-left cell.
struct PatchSpec {
  int width = 0;
  int height = 0;
  int source_ring = 0;
  int source_planet = 0;
  int paste_ring = 0;
  int paste_planet = 0;
  double scale = 0.0;
};

struct Patch {
  PatchSpec spec;
  std::vector<double> values;  // width x height, ring-major
};

/// Draws extents and a uniformly random source rectangle, copies its values, and draws the
/// paste centre uniformly in [0, N_R - w/2] x [0, N_P - h/2], clamped so the rectangle fits.
/// The scale is left at 0.
Patch sample_patch(const HDMap& x, const PatchRanges& ranges, Rng& rng);

/// x + scale * patch / max|patch| on the paste rectangle (plain addition when normalize is false).
/// Cells receiving a zero increment are copied unchanged.
HDMap paste_patch(const HDMap& x, const Patch& patch, double scale, bool normalize);

struct Synthesized {
  HDMap map;
  double scale = 0.0;
  PatchSpec patch;  // CutPaste variants only
  int signature_index = -1;  // FaultPaste only
};

/// CutPaste with a normalized patch and scale a ~ U(0, max_cutpaste_scale). Resamples the source
/// rectangle when the patch is all zero; throws DegenerateSignatureError after the retry cap.
Synthesized scaled_cutpaste(const HDMap& x, const SynthesisConfig& config, Rng& rng);

/// Unscaled CutPaste: the raw patch is added once.
Synthesized cutpaste(const HDMap& x, const SynthesisConfig& config, Rng& rng);

struct FaultSignature {
  HDMap grid;  // nonnegative, peak 1
  char source_domain = '?';
  std::uint64_t source_sample = 0;
};

/// Squared residual (x - reconstruction)^2 normalized to peak 1. Throws
/// DegenerateSignatureError when the residual is identically zero.
FaultSignature fault_signature(const HDMap& x, const HDMap& reconstruction);

/// x + scale * signature elementwise; throws PreconditionError on shape mismatch.
HDMap add_signature(const HDMap& x, const FaultSignature& signature, double scale);

/// FaultPaste with a ~ U(0, max_faultpaste_scale).
Synthesized faultpaste(const HDMap& x, const FaultSignature& signature, const SynthesisConfig& config, Rng& rng);

/// FaultPaste with a signature drawn uniformly from the pool.
Synthesized faultpaste(const HDMap& x, std::span<const FaultSignature> pool, const SynthesisConfig& config,
                       Rng& rng);

/// Dispatches on config.method; the pool is only used by FaultPaste.
Synthesized synthesize(const HDMap& x, const SynthesisConfig& config, std::span<const FaultSignature> pool,
                       Rng& rng);

}  // namespace gearfd
