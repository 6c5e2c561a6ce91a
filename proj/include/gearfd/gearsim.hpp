#pragma once

// Phenomenological planetary-gearbox vibration generator.
//
// The signal is built in the carrier-angle domain and sampled in time: a gear-mesh tone with
// first/second-order transmission-path modulation, one short resonance transient per ring-planet
// meshing event of the monitored planet (healthy irregularity pattern plus, for damaged
// states, an impact whenever a damaged planet tooth engages), white sensor noise, and a slow
// warm-up gain drift. The carrier angle is anchored at whole revolutions that fall on integer
// samples, which is also where the tachometer fires.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gearfd/geometry.hpp"

namespace gearfd {

enum class SensorType { mems, iepe };
enum class SpeedMode { stationary, non_stationary };
enum class HealthLevel : std::uint8_t { normal = 0, fault1 = 1, fault2 = 2 };
/// Layout of the healthy meshing-irregularity pattern on the (ring, planet) tooth grid.
enum class PatternKind { diagonal, vertical };

std::string to_string(SensorType s);
std::string to_string(SpeedMode s);
std::string to_string(HealthLevel h);
std::string to_string(PatternKind p);
HealthLevel parse_health(const std::string& s);

/// Amplitude multiplier over the recording session, emulating lubricant warm-up.
/// Linear from start_gain at t=0 to end_gain at t=session_length_s, constant afterwards.
struct DriftProfile {
  double session_length_s = 1800.0;
  double start_gain = 1.0;
  double end_gain = 0.8;

  double gain(double session_time_s) const;
};

struct DomainSpec {
  char id = 'A';
  SensorType sensor = SensorType::mems;
  SpeedMode speed = SpeedMode::stationary;
  double nominal_carrier_hz = 64.0;
  double speed_modulation_depth = 0.0;  // fraction of nominal
  double speed_modulation_hz = 0.5;
  double noise_floor = 6.0;  // g RMS
  DriftProfile drift;

  // Phenomenology beyond the sensor/speed axes.
  double mesh_amplitude = 6.0;        // g, healthy mesh-tone amplitude
  double path_gain = 1.0;             // gear-to-sensor transmission gain applied to all vibration
  double am_first_order = 0.5;        // transmission-path modulation depth, 1x carrier
  double am_second_order = 0.15;      // 2x carrier
  double sensor_angle_teeth = 19.5;   // sensor position, in ring-tooth units from the tacho
  double path_concentration = 4.0;    // sharpness of the transmission window
  double resonance_hz = 3000.0;       // structural/sensor resonance excited by transients
  double resonance_decay_s = 1.5e-4;
  PatternKind pattern = PatternKind::diagonal;
  double pattern_amplitude = 5.0;     // g, healthy per-event transient scale
  double pattern_floor = 0.2;         // fraction of pattern_amplitude present everywhere

  /// Throws PreconditionError if the id is not one of A-D or a field is out of range.
  void validate() const;
};

/// The four testbed domains: A MEMS/stationary, B MEMS/non-stationary,
/// C IEPE/stationary, D IEPE/non-stationary. Throws PreconditionError for other ids.
DomainSpec domain_spec(char id);

struct HealthState {
  HealthLevel level = HealthLevel::normal;
  int faulty_planet_tooth = 0;  // 1-based; 0 when normal

  static HealthState normal() { return {}; }
  static HealthState faulty(HealthLevel level, int tooth) { return {level, tooth}; }
};

/// Impact peak amplitude relative to the healthy mesh-tone amplitude.
double impact_amplitude_factor(HealthLevel level);

struct TimeSeriesRecord {
  std::vector<float> samples;  // g
  double sample_rate = 25600.0;
  std::vector<std::uint64_t> tacho_events;  // sample index of each carrier revolution
  GearGeometry geometry;
  DomainSpec domain;
  HealthState health;
  std::uint64_t seed = 0;
  double session_time_s = 0.0;  // start of the record within the recording session
};

/// Carrier angle as a function of time. The angle is 2*pi*r at anchor r; between anchors it
/// is the cubic Hermite interpolant with centred-difference slopes (one-sided at the ends),
/// and it is extended linearly outside the anchored span.
class CarrierAngle {
 public:
  CarrierAngle(std::vector<double> anchor_samples, double sample_rate);

  /// Angle in radians at a (fractional) sample position.
  double at_sample(double n) const;
  double operator()(double t_s) const { return at_sample(t_s * sample_rate_); }
  /// Derivative of the angle in revolutions per second.
  double rate_hz(double t_s) const;
  /// Inverse: the (fractional) sample position where the angle equals theta.
  double sample_at_angle(double theta) const;
  /// Inverse on the uniform angle grid theta0 + j * dtheta, j < count (dtheta > 0).
  std::vector<double> samples_at_angles(double theta0, double dtheta, std::size_t count) const;

  const std::vector<double>& anchors() const { return anchors_; }
  double sample_rate() const { return sample_rate_; }

 private:
  std::size_t segment(double n) const;

  std::vector<double> anchors_;
  std::vector<double> slopes_;  // rad per sample at each anchor
  double sample_rate_;
};

/// Carrier angle law for a domain. Stationary domains rotate at exactly the nominal rate;
/// non-stationary domains follow f0 * (1 + depth * sin(2*pi*fm*(t + session_time) + phase)),
/// with the phase drawn from the seed. Anchors are rounded to whole samples.
CarrierAngle speed_profile(const DomainSpec& domain, double duration_s, std::uint64_t seed,
                           double session_time_s = 0.0, double sample_rate = 25600.0);

struct SimulationOptions {
  double sample_rate = 25600.0;
  double session_time_s = 0.0;
  /// Seed for the speed law; defaults to one derived from the record seed. Slices of one
  /// recording session share it so that they see a consistent speed history.
  std::optional<std::uint64_t> speed_seed;
};

/// Record duration (s) that spans `cycles` hunting-tooth cycles at nominal speed, plus a
/// fractional margin.
double duration_for_hunting_cycles(const GearGeometry& geometry, const DomainSpec& domain,
                                   int cycles, double margin = 0.05);

/// Generates one record. Requires the duration to cover at least 10 hunting-tooth cycles at
/// nominal speed. Output is a pure function of the arguments.
TimeSeriesRecord simulate_record(const GearGeometry& geometry, const DomainSpec& domain,
                                 const HealthState& health, double duration_s, std::uint64_t seed,
                                 const SimulationOptions& options = {});

/// Meshing events (1-based) of the monitored planet that received a fault impact; exposed so
/// that tests can check impact bookkeeping against the meshing sequence.
std::vector<std::int64_t> impact_events(const GearGeometry& geometry, const HealthState& health,
                                        std::int64_t event_count);

// "GSR1" record files: magic, u32 sample count, f64 sample rate, u32 tacho count, f32 samples,
// u64 tacho indices, then u32 length + JSON metadata block.
std::vector<std::uint8_t> encode_record(const TimeSeriesRecord& record);
TimeSeriesRecord decode_record(std::vector<std::uint8_t> bytes);
void write_record(const std::filesystem::path& path, const TimeSeriesRecord& record);
TimeSeriesRecord read_record(const std::filesystem::path& path);

}  // namespace gearfd
