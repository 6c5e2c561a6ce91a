#pragma once

// Hunting-tooth distance maps: the per-(ring tooth, planet tooth) peak of the difference signal
// over one hunting-tooth cycle, laid out as a ring x planet image.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gearfd/gearsim.hpp"
#include "gearfd/preprocess.hpp"

namespace gearfd {

struct HdmapProvenance {
  char domain = '?';
  HealthLevel health = HealthLevel::normal;
  std::uint64_t record_seed = 0;
  double session_time_s = 0.0;
};

/// Row-major ring_teeth x planet_teeth image; element (i, j) belongs to ring tooth i+1 and
/// planet tooth j+1.
struct HDMap {
  GearGeometry geometry;
  std::vector<double> values;
  HdmapProvenance provenance;

  int rows() const { return geometry.ring_teeth; }
  int cols() const { return geometry.planet_teeth; }
  double& at(int ring_tooth, int planet_tooth) {
    return values[static_cast<std::size_t>(ring_tooth - 1) * cols() + (planet_tooth - 1)];
  }
  double at(int ring_tooth, int planet_tooth) const {
    return values[static_cast<std::size_t>(ring_tooth - 1) * cols() + (planet_tooth - 1)];
  }
  double max_abs() const;
};

/// Assigns each meshing event of one hunting cycle its window of samples_per_mesh samples and
/// stores the largest absolute value in that window at the engaged tooth pair.
HDMap build_hdmap(const DifferenceSignal& difference, const GearGeometry& geometry);

struct PreprocessOptions {
  int samples_per_mesh = 32;
  int harmonics = 8;
  int sideband_orders = 1;
  int max_cycles = 0;  // 0 keeps every whole hunting cycle in the record
};

/// Resampling, averaging, mesh removal and map construction for one record.
HDMap record_to_hdmap(const TimeSeriesRecord& record, const PreprocessOptions& options = {});

/// Label byte stored in HDM1 files for per-domain fault signatures.
inline constexpr std::uint8_t kSignatureLabel = 255;

struct HdmapSet {
  GearGeometry geometry;
  std::uint8_t label = 0;
  std::vector<HDMap> maps;
};

// "HDM1" files: magic, u32 rows, u32 cols, u32 count, u8 label, then count * rows * cols f32
// values, row-major per map. Labels 0-2 are health levels and set the decoded maps' health.
std::vector<std::uint8_t> encode_hdmaps(const HdmapSet& set);
HdmapSet decode_hdmaps(std::vector<std::uint8_t> bytes);
void write_hdmaps(const std::filesystem::path& path, const HdmapSet& set);
HdmapSet read_hdmaps(const std::filesystem::path& path);

}  // namespace gearfd
