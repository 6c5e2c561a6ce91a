#include "gearfd/hdmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gearfd/binary_io.hpp"
#include "gearfd/error.hpp"

namespace gearfd {

void GearGeometry::validate() const {
  if (planet_teeth < 1 || sun_teeth < 1 || planet_count < 1)
    throw PreconditionError("tooth and planet counts must be positive");
  if (ring_teeth < planet_teeth) throw PreconditionError("ring must have at least as many teeth as a planet");
}

std::int64_t hunting_length(std::int64_t ring_teeth, std::int64_t planet_teeth) {
  if (ring_teeth < 1 || planet_teeth < 1) throw PreconditionError("tooth counts must be positive");
  return ring_teeth / std::gcd(ring_teeth, planet_teeth) * planet_teeth;
}

MeshingIndex meshing_sequence(std::int64_t k, int ring_teeth, int planet_teeth) {
  if (k < 1) throw PreconditionError("meshing events are numbered from 1");
  if (ring_teeth < 1 || planet_teeth < 1) throw PreconditionError("tooth counts must be positive");
  MeshingIndex m;
  m.event = k;
  m.ring_tooth = static_cast<int>((k - 1) % ring_teeth) + 1;
  m.planet_tooth = static_cast<int>((k - 1) % planet_teeth) + 1;
  return m;
}

double HDMap::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

HDMap build_hdmap(const DifferenceSignal& difference, const GearGeometry& geometry) {
  geometry.validate();
  const int spm = difference.samples_per_mesh;
  const std::int64_t hunting = hunting_length(geometry);
  if (spm < 1 || difference.values.size() != static_cast<std::size_t>(hunting * spm))
    throw PreconditionError("difference signal does not span exactly one hunting cycle");
  HDMap map;
  map.geometry = geometry;
  map.values.assign(static_cast<std::size_t>(geometry.ring_teeth) * geometry.planet_teeth, 0.0);
  std::vector<std::uint8_t> seen(map.values.size(), 0);
  for (std::int64_t k = 1; k <= hunting; ++k) {
    const auto m = meshing_sequence(k, geometry.ring_teeth, geometry.planet_teeth);
    const double* w = difference.values.data() + (k - 1) * spm;
    double peak = 0.0;
    for (int i = 0; i < spm; ++i) peak = std::max(peak, std::abs(w[i]));
    const std::size_t idx = static_cast<std::size_t>(m.ring_tooth - 1) * geometry.planet_teeth + (m.planet_tooth - 1);
    // Pairs that recur within a cycle (common tooth factors) keep their largest peak.
    map.values[idx] = seen[idx] ? std::max(map.values[idx], peak) : peak;
    seen[idx] = 1;
  }
  return map;
}

HDMap record_to_hdmap(const TimeSeriesRecord& record, const PreprocessOptions& options) {
  const GearGeometry& g = record.geometry;
  const AngularSeries series = angular_resample(record, g, options.samples_per_mesh, options.max_cycles);
  const AngularSeries averaged = tsa(series);
  const RemovalSpec removal = mesh_removal_spec(g, options.samples_per_mesh, options.harmonics, options.sideband_orders);
  HDMap map = build_hdmap(difference_signal(averaged, removal), g);
  map.provenance.domain = record.domain.id;
  map.provenance.health = record.health.level;
  map.provenance.record_seed = record.seed;
  map.provenance.session_time_s = record.session_time_s;
  return map;
}

std::vector<std::uint8_t> encode_hdmaps(const HdmapSet& set) {
  const auto cells = static_cast<std::size_t>(set.geometry.ring_teeth) * set.geometry.planet_teeth;
  ByteWriter w;
  w.magic("HDM1");
  w.u32(static_cast<std::uint32_t>(set.geometry.ring_teeth));
  w.u32(static_cast<std::uint32_t>(set.geometry.planet_teeth));
  w.u32(static_cast<std::uint32_t>(set.maps.size()));
  w.u8(set.label);
  for (const HDMap& m : set.maps) {
    if (m.values.size() != cells) throw PreconditionError("map size does not match the set geometry");
    for (double v : m.values) w.f32(static_cast<float>(v));
  }
  return w.buffer();
}

HdmapSet decode_hdmaps(std::vector<std::uint8_t> bytes) {
  ByteReader rd(std::move(bytes));
  rd.expect_magic("HDM1");
  HdmapSet set;
  const std::size_t dims_offset = rd.offset();
  const std::uint32_t rows = rd.u32();
  const std::uint32_t cols = rd.u32();
  const std::uint32_t count = rd.u32();
  set.label = rd.u8();
  if (rows == 0 || cols == 0 || cols > rows || rows > 100000)
    throw FormatError("implausible map dimensions", dims_offset);
  set.geometry.ring_teeth = static_cast<int>(rows);
  set.geometry.planet_teeth = static_cast<int>(cols);
  const std::uint64_t cells = static_cast<std::uint64_t>(rows) * cols;
  if (cells * count * 4 != rd.remaining())
    throw FormatError("payload size does not match rows * cols * count", rd.offset());
  set.maps.resize(count);
  for (HDMap& m : set.maps) {
    m.geometry = set.geometry;
    if (set.label <= static_cast<std::uint8_t>(HealthLevel::fault2)) m.provenance.health = static_cast<HealthLevel>(set.label);
    m.values.resize(cells);
    for (double& v : m.values) v = rd.f32();
  }
  rd.expect_end();
  return set;
}

void write_hdmaps(const std::filesystem::path& path, const HdmapSet& set) {
  ByteWriter w;
  w.bytes(encode_hdmaps(set));
  w.save(path);
}

HdmapSet read_hdmaps(const std::filesystem::path& path) { return decode_hdmaps(read_file_bytes(path)); }

}  // namespace gearfd
