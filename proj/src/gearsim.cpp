#include "gearfd/gearsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <json.hpp>

#include "gearfd/binary_io.hpp"
#include "gearfd/error.hpp"
#include "gearfd/rng.hpp"

namespace gearfd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMinHuntingCycles = 10;

}  // namespace

std::string to_string(SensorType s) { return s == SensorType::mems ? "MEMS" : "IEPE"; }

std::string to_string(SpeedMode s) {
  return s == SpeedMode::stationary ? "stationary" : "non-stationary";
}

std::string to_string(HealthLevel h) {
  switch (h) {
    case HealthLevel::normal:
      return "normal";
    case HealthLevel::fault1:
      return "fault1";
    case HealthLevel::fault2:
      return "fault2";
  }
  return "unknown";
}

std::string to_string(PatternKind p) { return p == PatternKind::diagonal ? "diagonal" : "vertical"; }

HealthLevel parse_health(const std::string& s) {
  if (s == "normal") return HealthLevel::normal;
  if (s == "fault1") return HealthLevel::fault1;
  if (s == "fault2") return HealthLevel::fault2;
  throw PreconditionError("unknown health level: " + s);
}

double DriftProfile::gain(double session_time_s) const {
  if (session_length_s <= 0.0) return end_gain;
  const double u = std::clamp(session_time_s / session_length_s, 0.0, 1.0);
  return start_gain + (end_gain - start_gain) * u;
}

void DomainSpec::validate() const {
  if (id < 'A' || id > 'D') throw PreconditionError(std::string("unknown domain id: ") + id);
  if (!(nominal_carrier_hz > 0.0)) throw PreconditionError("nominal carrier speed must be positive");
  if (speed_modulation_depth < 0.0 || speed_modulation_depth >= 1.0)
    throw PreconditionError("speed modulation depth must lie in [0, 1)");
  if (speed == SpeedMode::stationary && speed_modulation_depth != 0.0)
    throw PreconditionError("stationary domain with non-zero speed modulation");
  if (speed == SpeedMode::non_stationary && !(speed_modulation_depth > 0.0))
    throw PreconditionError("non-stationary domain needs a positive speed modulation depth");
  if (noise_floor < 0.0) throw PreconditionError("negative noise floor");
  if (!(path_gain > 0.0)) throw PreconditionError("path gain must be positive");
  if (!(resonance_decay_s > 0.0) || !(resonance_hz > 0.0))
    throw PreconditionError("resonance parameters must be positive");
}

DomainSpec domain_spec(char id) {
  DomainSpec d;
  d.id = id;
  // Noise relative to the transmitted vibration is sqrt(10) larger for MEMS: 10 dB lower SNR.
  constexpr double kMemsGain = 1.0;
  constexpr double kIepeGain = 1.4;
  constexpr double kIepeNoise = 1.9 * kIepeGain;
  constexpr double kMemsNoise = 1.9 * kMemsGain * 3.1622776601683795;
  switch (id) {
    case 'A':
      d.sensor = SensorType::mems;
      d.speed = SpeedMode::stationary;
      break;
    case 'B':
      d.sensor = SensorType::mems;
      d.speed = SpeedMode::non_stationary;
      break;
    case 'C':
      d.sensor = SensorType::iepe;
      d.speed = SpeedMode::stationary;
      break;
    case 'D':
      d.sensor = SensorType::iepe;
      d.speed = SpeedMode::non_stationary;
      break;
    default:
      throw PreconditionError(std::string("unknown domain id: ") + id);
  }
  const bool mems = d.sensor == SensorType::mems;
  const bool moving = d.speed == SpeedMode::non_stationary;
  d.noise_floor = mems ? kMemsNoise : kIepeNoise;
  d.speed_modulation_depth = moving ? 0.2 : 0.0;
  d.resonance_hz = mems ? 2800.0 : 4200.0;
  d.resonance_decay_s = mems ? 1.8e-4 : 1.2e-4;
  d.pattern = moving ? PatternKind::vertical : PatternKind::diagonal;
  d.pattern_amplitude = mems ? 7.0 : 9.0;
  d.am_second_order = mems ? 0.15 : 0.25;
  // Both sensors share one housing position.
  d.path_gain = (mems ? kMemsGain : kIepeGain) * (moving ? 1.4 : 1.0);
  return d;
}

double impact_amplitude_factor(HealthLevel level) {
  switch (level) {
    case HealthLevel::normal:
      return 0.0;
    case HealthLevel::fault1:
      return 3.0;
    case HealthLevel::fault2:
      return 6.0;
  }
  return 0.0;
}

// --- carrier angle -------------------------------------------------------------------------

CarrierAngle::CarrierAngle(std::vector<double> anchor_samples, double sample_rate)
    : anchors_(std::move(anchor_samples)), sample_rate_(sample_rate) {
  if (anchors_.size() < 2) throw PreconditionError("carrier angle needs at least two anchors");
  if (!(sample_rate_ > 0.0)) throw PreconditionError("sample rate must be positive");
  for (std::size_t i = 1; i < anchors_.size(); ++i)
    if (!(anchors_[i] > anchors_[i - 1]))
      throw PreconditionError("carrier angle anchors must be strictly increasing");
  const std::size_t n = anchors_.size();
  slopes_.resize(n);
  slopes_[0] = kTwoPi / (anchors_[1] - anchors_[0]);
  slopes_[n - 1] = kTwoPi / (anchors_[n - 1] - anchors_[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) slopes_[i] = 2.0 * kTwoPi / (anchors_[i + 1] - anchors_[i - 1]);
}

std::size_t CarrierAngle::segment(double n) const {
  auto it = std::upper_bound(anchors_.begin(), anchors_.end(), n);
  std::size_t idx = it == anchors_.begin() ? 0 : static_cast<std::size_t>(it - anchors_.begin()) - 1;
  return std::min(idx, anchors_.size() - 2);
}

double CarrierAngle::at_sample(double n) const {
  if (n <= anchors_.front()) return slopes_.front() * (n - anchors_.front());
  if (n >= anchors_.back())
    return kTwoPi * static_cast<double>(anchors_.size() - 1) + slopes_.back() * (n - anchors_.back());
  const std::size_t r = segment(n);
  const double h = anchors_[r + 1] - anchors_[r];
  const double s = (n - anchors_[r]) / h;
  const double y0 = kTwoPi * static_cast<double>(r);
  const double m0 = slopes_[r] * h;
  const double m1 = slopes_[r + 1] * h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return y0 + (-2.0 * s3 + 3.0 * s2) * kTwoPi + (s3 - 2.0 * s2 + s) * m0 + (s3 - s2) * m1;
}

double CarrierAngle::rate_hz(double t_s) const {
  const double n = t_s * sample_rate_;
  double dtheta_dn;
  if (n <= anchors_.front()) {
    dtheta_dn = slopes_.front();
  } else if (n >= anchors_.back()) {
    dtheta_dn = slopes_.back();
  } else {
    const std::size_t r = segment(n);
    const double h = anchors_[r + 1] - anchors_[r];
    const double s = (n - anchors_[r]) / h;
    const double m0 = slopes_[r] * h;
    const double m1 = slopes_[r + 1] * h;
    dtheta_dn = ((-6.0 * s * s + 6.0 * s) * kTwoPi + (3.0 * s * s - 4.0 * s + 1.0) * m0 +
                 (3.0 * s * s - 2.0 * s) * m1) /
                h;
  }
  return dtheta_dn * sample_rate_ / kTwoPi;
}

double CarrierAngle::sample_at_angle(double theta) const {
  const double last = kTwoPi * static_cast<double>(anchors_.size() - 1);
  if (theta <= 0.0) return anchors_.front() + theta / slopes_.front();
  if (theta >= last) return anchors_.back() + (theta - last) / slopes_.back();
  const auto r = std::min(static_cast<std::size_t>(theta / kTwoPi), anchors_.size() - 2);
  const double lo = anchors_[r];
  const double hi = anchors_[r + 1];
  double n = lo + (theta - kTwoPi * static_cast<double>(r)) / kTwoPi * (hi - lo);
  for (int it = 0; it < 20; ++it) {
    const double f = at_sample(n) - theta;
    const double d = rate_hz(n / sample_rate_) * kTwoPi / sample_rate_;
    const double step = f / d;
    n = std::clamp(n - step, lo, hi);
    if (std::abs(step) < 1e-11) break;
  }
  return n;
}

std::vector<double> CarrierAngle::samples_at_angles(double theta0, double dtheta,
                                                    std::size_t count) const {
  if (!(dtheta > 0.0)) throw PreconditionError("samples_at_angles: step must be positive");
  std::vector<double> out(count);
  const double last = kTwoPi * static_cast<double>(anchors_.size() - 1);
  for (std::size_t j = 0; j < count; ++j) {
    const double theta = theta0 + static_cast<double>(j) * dtheta;
    if (theta <= 0.0 || theta >= last) {
      out[j] = sample_at_angle(theta);
      continue;
    }
    const auto r = std::min(static_cast<std::size_t>(theta / kTwoPi), anchors_.size() - 2);
    const double h = anchors_[r + 1] - anchors_[r];
    const double m0 = slopes_[r] * h;
    const double m1 = slopes_[r + 1] * h;
    // theta(s) - y0 = m0 s + a2 s^2 + a3 s^3 on s in [0, 1]
    const double a2 = 3.0 * kTwoPi - 2.0 * m0 - m1;
    const double a3 = -2.0 * kTwoPi + m0 + m1;
    const double target = theta - kTwoPi * static_cast<double>(r);
    double s = target / kTwoPi;
    for (int it = 0; it < 20; ++it) {
      const double f = ((a3 * s + a2) * s + m0) * s - target;
      const double d = (3.0 * a3 * s + 2.0 * a2) * s + m0;
      const double step = f / d;
      s = std::clamp(s - step, 0.0, 1.0);
      if (std::abs(step) < 1e-15) break;
    }
    out[j] = anchors_[r] + s * h;
  }
  return out;
}

CarrierAngle speed_profile(const DomainSpec& domain, double duration_s, std::uint64_t seed,
                           double session_time_s, double sample_rate) {
  if (!(duration_s > 0.0)) throw PreconditionError("speed_profile: duration must be positive");
  domain.validate();
  const double f0 = domain.nominal_carrier_hz;
  const double total = duration_s * sample_rate;
  std::vector<double> anchors{0.0};

  if (domain.speed == SpeedMode::stationary) {
    const double period = sample_rate / f0;
    for (int r = 1;; ++r) {
      const double a = std::round(period * r);
      anchors.push_back(a);
      if (a >= total) break;
    }
    return CarrierAngle(std::move(anchors), sample_rate);
  }

  Rng rng(seed);
  const double phase = rng.uniform(0.0, kTwoPi);
  const double depth = domain.speed_modulation_depth;
  const double wm = kTwoPi * domain.speed_modulation_hz;
  const double c0 = std::cos(wm * session_time_s + phase);
  // Revolutions completed after t seconds under the ideal law.
  auto revs = [&](double t) {
    return f0 * (t - depth / wm * (std::cos(wm * (t + session_time_s) + phase) - c0));
  };
  auto rate = [&](double t) { return f0 * (1.0 + depth * std::sin(wm * (t + session_time_s) + phase)); };
  double t = 0.0;
  for (int r = 1;; ++r) {
    t += 1.0 / rate(t);
    for (int it = 0; it < 50; ++it) {
      const double step = (revs(t) - r) / rate(t);
      t -= step;
      if (std::abs(step) < 1e-13) break;
    }
    const double a = std::max(std::round(t * sample_rate), anchors.back() + 1.0);
    anchors.push_back(a);
    if (a >= total) break;
  }
  return CarrierAngle(std::move(anchors), sample_rate);
}

double duration_for_hunting_cycles(const GearGeometry& geometry, const DomainSpec& domain, int cycles,
                                   double margin) {
  const double meshes = static_cast<double>(hunting_length(geometry)) * cycles;
  return meshes / (geometry.ring_teeth * domain.nominal_carrier_hz) * (1.0 + margin);
}

// --- simulation ----------------------------------------------------------------------------

namespace {

double pattern_value(PatternKind kind, const MeshingIndex& m, const GearGeometry& g) {
  const double r = static_cast<double>(m.ring_tooth - 1) / g.ring_teeth;
  const double p = static_cast<double>(m.planet_tooth - 1) / g.planet_teeth;
  if (kind == PatternKind::diagonal) return 0.5 * (1.0 + std::cos(kTwoPi * (2.0 * r - p)));
  return 0.5 * (1.0 + std::cos(kTwoPi * 3.0 * r));
}

double fault_factor(const HealthState& health, int planet_tooth, int planet_teeth) {
  if (health.level == HealthLevel::normal) return 0.0;
  const int d = std::abs(planet_tooth - health.faulty_planet_tooth);
  const int dist = std::min(d, planet_teeth - d);
  const double peak = impact_amplitude_factor(health.level);
  if (dist == 0) return peak;
  // Level 2 damage also spreads onto the two neighbouring teeth.
  if (health.level == HealthLevel::fault2 && dist == 1) return 0.5 * peak;
  return 0.0;
}

void validate_health(const HealthState& health, const GearGeometry& g) {
  if (health.level == HealthLevel::normal) return;
  if (health.faulty_planet_tooth < 1 || health.faulty_planet_tooth > g.planet_teeth)
    throw PreconditionError("faulty planet tooth out of range");
}

}  // namespace

std::vector<std::int64_t> impact_events(const GearGeometry& geometry, const HealthState& health,
                                        std::int64_t event_count) {
  validate_health(health, geometry);
  std::vector<std::int64_t> out;
  for (std::int64_t k = 1; k <= event_count; ++k) {
    const auto m = meshing_sequence(k, geometry.ring_teeth, geometry.planet_teeth);
    if (fault_factor(health, m.planet_tooth, geometry.planet_teeth) > 0.0) out.push_back(k);
  }
  return out;
}

TimeSeriesRecord simulate_record(const GearGeometry& geometry, const DomainSpec& domain,
                                 const HealthState& health, double duration_s, std::uint64_t seed,
                                 const SimulationOptions& options) {
  geometry.validate();
  domain.validate();
  validate_health(health, geometry);
  const double fs = options.sample_rate;
  const double nominal_meshes = duration_s * domain.nominal_carrier_hz * geometry.ring_teeth;
  if (!(nominal_meshes >= static_cast<double>(kMinHuntingCycles * hunting_length(geometry))))
    throw PreconditionError("simulate_record: duration shorter than 10 hunting-tooth cycles");

  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  const std::uint64_t speed_seed = options.speed_seed.value_or(derive_seed(seed, {1}));
  const CarrierAngle full = speed_profile(domain, duration_s, speed_seed, options.session_time_s, fs);

  // Keep only the revolutions that the tachometer actually reports, so that the angle law used
  // here is the one an encoder-based resampler reconstructs from the record.
  std::vector<double> in_record;
  for (double a : full.anchors())
    if (a < static_cast<double>(n)) in_record.push_back(a);
  const CarrierAngle angle(in_record, fs);

  TimeSeriesRecord rec;
  rec.sample_rate = fs;
  rec.geometry = geometry;
  rec.domain = domain;
  rec.health = health;
  rec.seed = seed;
  rec.session_time_s = options.session_time_s;
  rec.tacho_events.reserve(in_record.size());
  for (double a : in_record) rec.tacho_events.push_back(static_cast<std::uint64_t>(a));

  const double nr = geometry.ring_teeth;
  const double f0 = domain.nominal_carrier_hz;
  const double sensor = kTwoPi * domain.sensor_angle_teeth / nr;
  const double max_mesh_hz = nr * f0 * (1.0 + domain.speed_modulation_depth);
  auto window = [&](double theta) {
    return std::exp(domain.path_concentration * (std::cos(theta - sensor) - 1.0));
  };

  std::vector<double> x(n, 0.0);
  std::vector<double> mesh_phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = angle.at_sample(static_cast<double>(i));
    const double p = nr * theta / kTwoPi;
    mesh_phase[i] = p;
    const double rel = angle.rate_hz(static_cast<double>(i) / fs) / f0;
    const double am = 1.0 + domain.am_first_order * std::cos(theta - sensor) +
                      domain.am_second_order * std::cos(2.0 * (theta - sensor));
    double tone = 0.0;
    double amp = 1.0;
    for (int h = 1; h <= 4 && h * max_mesh_hz < 0.45 * fs; ++h, amp *= 0.5)
      tone += amp * std::cos(kTwoPi * h * p);
    x[i] = domain.mesh_amplitude * rel * am * tone;
  }

  // One resonance transient per meshing event of the monitored planet.
  Rng jitter_rng(derive_seed(seed, {3}));
  const std::complex<double> lambda(-1.0 / domain.resonance_decay_s, kTwoPi * domain.resonance_hz);
  const std::complex<double> step = std::exp(lambda / fs);
  const double wd = kTwoPi * domain.resonance_hz;
  const double t_peak = std::atan(wd * domain.resonance_decay_s) / wd;
  const double burst_norm = std::exp(-t_peak / domain.resonance_decay_s) * std::sin(wd * t_peak);
  const double support = 6.0 * domain.resonance_decay_s;

  double prev = -1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = mesh_phase[i];
    for (double e = std::floor(prev) + 1.0; e <= p; e += 1.0) {
      const double frac = i == 0 ? 0.0 : (e - prev) / (p - prev);
      const double start = i == 0 ? 0.0 : static_cast<double>(i - 1) + frac;  // samples
      const auto k = static_cast<std::int64_t>(e) + 1;
      const auto m = meshing_sequence(k, geometry.ring_teeth, geometry.planet_teeth);
      const double theta_k = kTwoPi * e / nr;
      const double rel = angle.rate_hz(start / fs) / f0;
      double amp = domain.pattern_amplitude *
                   (domain.pattern_floor + (1.0 - domain.pattern_floor) * pattern_value(domain.pattern, m, geometry));
      const double ff = fault_factor(health, m.planet_tooth, geometry.planet_teeth);
      if (ff > 0.0) amp += ff * domain.mesh_amplitude * jitter_rng.uniform(0.7, 1.3) * window(theta_k);
      amp *= rel * rel / burst_norm;
      if (amp == 0.0) continue;
      auto j = static_cast<std::size_t>(std::ceil(start));
      const auto end = std::min(n, static_cast<std::size_t>(start + support * fs) + 1);
      std::complex<double> z = std::exp(lambda * ((static_cast<double>(j) - start) / fs));
      for (; j < end; ++j, z *= step) x[j] += amp * z.imag();
    }
    prev = p;
  }

  Rng noise_rng(derive_seed(seed, {2}));
  rec.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = domain.path_gain * domain.drift.gain(options.session_time_s + static_cast<double>(i) / fs);
    rec.samples[i] = static_cast<float>(g * x[i] + domain.noise_floor * noise_rng.normal());
  }
  return rec;
}

// --- GSR1 ----------------------------------------------------------------------------------

namespace {

nlohmann::json domain_to_json(const DomainSpec& d) {
  return {{"id", std::string(1, d.id)},
          {"sensor", to_string(d.sensor)},
          {"speed", to_string(d.speed)},
          {"nominal_carrier_hz", d.nominal_carrier_hz},
          {"speed_modulation_depth", d.speed_modulation_depth},
          {"speed_modulation_hz", d.speed_modulation_hz},
          {"noise_floor", d.noise_floor},
          {"drift", {{"session_length_s", d.drift.session_length_s},
                     {"start_gain", d.drift.start_gain},
                     {"end_gain", d.drift.end_gain}}},
          {"mesh_amplitude", d.mesh_amplitude},
          {"path_gain", d.path_gain},
          {"am_first_order", d.am_first_order},
          {"am_second_order", d.am_second_order},
          {"sensor_angle_teeth", d.sensor_angle_teeth},
          {"path_concentration", d.path_concentration},
          {"resonance_hz", d.resonance_hz},
          {"resonance_decay_s", d.resonance_decay_s},
          {"pattern", to_string(d.pattern)},
          {"pattern_amplitude", d.pattern_amplitude},
          {"pattern_floor", d.pattern_floor}};
}

DomainSpec domain_from_json(const nlohmann::json& j) {
  DomainSpec d;
  const std::string id = j.at("id");
  if (id.size() != 1) throw PreconditionError("bad domain id");
  d.id = id[0];
  d.sensor = j.at("sensor") == "MEMS" ? SensorType::mems : SensorType::iepe;
  d.speed = j.at("speed") == "stationary" ? SpeedMode::stationary : SpeedMode::non_stationary;
  d.nominal_carrier_hz = j.at("nominal_carrier_hz");
  d.speed_modulation_depth = j.at("speed_modulation_depth");
  d.speed_modulation_hz = j.at("speed_modulation_hz");
  d.noise_floor = j.at("noise_floor");
  d.drift.session_length_s = j.at("drift").at("session_length_s");
  d.drift.start_gain = j.at("drift").at("start_gain");
  d.drift.end_gain = j.at("drift").at("end_gain");
  d.mesh_amplitude = j.at("mesh_amplitude");
  d.path_gain = j.at("path_gain");
  d.am_first_order = j.at("am_first_order");
  d.am_second_order = j.at("am_second_order");
  d.sensor_angle_teeth = j.at("sensor_angle_teeth");
  d.path_concentration = j.at("path_concentration");
  d.resonance_hz = j.at("resonance_hz");
  d.resonance_decay_s = j.at("resonance_decay_s");
  d.pattern = j.at("pattern") == "diagonal" ? PatternKind::diagonal : PatternKind::vertical;
  d.pattern_amplitude = j.at("pattern_amplitude");
  d.pattern_floor = j.at("pattern_floor");
  return d;
}

}  // namespace

std::vector<std::uint8_t> encode_record(const TimeSeriesRecord& r) {
  ByteWriter w;
  w.magic("GSR1");
  w.u32(static_cast<std::uint32_t>(r.samples.size()));
  w.f64(r.sample_rate);
  w.u32(static_cast<std::uint32_t>(r.tacho_events.size()));
  for (float s : r.samples) w.f32(s);
  for (std::uint64_t t : r.tacho_events) w.u64(t);
  const nlohmann::json meta = {
      {"geometry", {{"ring_teeth", r.geometry.ring_teeth},
                    {"planet_teeth", r.geometry.planet_teeth},
                    {"sun_teeth", r.geometry.sun_teeth},
                    {"planet_count", r.geometry.planet_count}}},
      {"domain", domain_to_json(r.domain)},
      {"health", to_string(r.health.level)},
      {"faulty_planet_tooth", r.health.faulty_planet_tooth},
      {"seed", r.seed},
      {"session_time_s", r.session_time_s}};
  const std::string text = meta.dump();
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.text(text);
  return w.buffer();
}

TimeSeriesRecord decode_record(std::vector<std::uint8_t> bytes) {
  ByteReader rd(std::move(bytes));
  rd.expect_magic("GSR1");
  TimeSeriesRecord r;
  const std::uint32_t n = rd.u32();
  r.sample_rate = rd.f64();
  const std::uint32_t m = rd.u32();
  if (static_cast<std::uint64_t>(n) * 4 + static_cast<std::uint64_t>(m) * 8 > rd.remaining())
    throw FormatError("payload shorter than declared sample/tacho counts", rd.offset());
  r.samples.resize(n);
  for (auto& s : r.samples) s = rd.f32();
  r.tacho_events.resize(m);
  for (auto& t : r.tacho_events) t = rd.u64();
  const std::uint32_t len = rd.u32();
  const std::size_t meta_offset = rd.offset();
  const std::string text = rd.text(len);
  rd.expect_end();
  try {
    const auto meta = nlohmann::json::parse(text);
    const auto& g = meta.at("geometry");
    r.geometry = {g.at("ring_teeth"), g.at("planet_teeth"), g.at("sun_teeth"), g.at("planet_count")};
    r.domain = domain_from_json(meta.at("domain"));
    r.health.level = parse_health(meta.at("health"));
    r.health.faulty_planet_tooth = meta.at("faulty_planet_tooth");
    r.seed = meta.at("seed");
    r.session_time_s = meta.at("session_time_s");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad record metadata: ") + e.what(), meta_offset);
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("bad record metadata: ") + e.what(), meta_offset);
  }
  return r;
}

void write_record(const std::filesystem::path& path, const TimeSeriesRecord& record) {
  ByteWriter w;
  const auto bytes = encode_record(record);
  w.bytes(bytes);
  w.save(path);
}

TimeSeriesRecord read_record(const std::filesystem::path& path) {
  return decode_record(read_file_bytes(path));
}

}  // namespace gearfd
