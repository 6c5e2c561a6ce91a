#pragma once

// Pipeline configuration as JSON. Missing keys keep their defaults; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "gearfd/eval.hpp"

namespace gearfd {

struct PipelineConfig {
  EvalConfig eval;
  StudyConfig study;
  std::string output_dir = "out";

  void validate() const;
};

/// Canonical JSON (sorted keys, no whitespace).
std::string config_to_json(const PipelineConfig& config);
/// Throws FormatError for malformed JSON, PreconditionError for bad keys or values.
PipelineConfig parse_config(std::string_view json);
PipelineConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

}  // namespace gearfd
