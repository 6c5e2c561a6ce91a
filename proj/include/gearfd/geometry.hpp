#pragma once

#include <cstdint>

namespace gearfd {

/// Tooth counts of a planetary stage with fixed ring, rotating carrier and sun input.
struct GearGeometry {
  int ring_teeth = 95;
  int planet_teeth = 31;
  int sun_teeth = 31;
  int planet_count = 3;

  /// Throws PreconditionError unless ring >= planet >= 1, sun >= 1 and planet_count >= 1.
  void validate() const;

  bool operator==(const GearGeometry&) const = default;
};

/// Number of ring-planet meshing events before the tooth-pair sequence repeats:
/// N_R * N_P / gcd(N_R, N_P).
std::int64_t hunting_length(std::int64_t ring_teeth, std::int64_t planet_teeth);

inline std::int64_t hunting_length(const GearGeometry& g) {
  return hunting_length(g.ring_teeth, g.planet_teeth);
}

/// Teeth in contact at one meshing event. All indices are 1-based.
struct MeshingIndex {
  std::int64_t event = 1;
  int ring_tooth = 1;
  int planet_tooth = 1;

  bool operator==(const MeshingIndex&) const = default;
};

/// Ring and planet tooth engaged at meshing event k >= 1.
MeshingIndex meshing_sequence(std::int64_t k, int ring_teeth, int planet_teeth);

}  // namespace gearfd
