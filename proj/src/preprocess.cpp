#include "gearfd/preprocess.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "gearfd/error.hpp"

namespace gearfd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with new-array functions is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    auto re = alloc_real(n);
    auto cx = alloc_complex(n / 2 + 1);
    const int len = static_cast<int>(n);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(len, re.get(), cx.get(), FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_1d(len, cx.get(), re.get(), FFTW_ESTIMATE);
    if (!p.forward || !p.backward) throw NumericError("FFT planning failed");
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

double interpolate(const std::vector<float>& x, double pos) {
  const auto n = static_cast<std::int64_t>(x.size());
  const auto i = static_cast<std::int64_t>(std::floor(pos));
  const double t = pos - static_cast<double>(i);
  if (i < 1 || i + 2 >= n) {
    const std::int64_t a = std::clamp<std::int64_t>(i, 0, n - 1);
    const std::int64_t b = std::clamp<std::int64_t>(i + 1, 0, n - 1);
    return (1.0 - t) * x[a] + t * x[b];
  }
  const double p0 = x[i - 1];
  const double p1 = x[i];
  const double p2 = x[i + 1];
  const double p3 = x[i + 2];
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

AngularSeries angular_resample(const TimeSeriesRecord& record, const GearGeometry& geometry,
                               int samples_per_mesh, int max_cycles) {
  geometry.validate();
  if (samples_per_mesh < 4) throw PreconditionError("samples per mesh must be at least 4");
  if (record.tacho_events.size() < 2) throw PreconditionError("record has fewer than two tacho pulses");
  if (record.samples.empty()) throw PreconditionError("record has no samples");

  std::vector<double> anchors(record.tacho_events.begin(), record.tacho_events.end());
  if (anchors.back() > static_cast<double>(record.samples.size() - 1))
    throw PreconditionError("tacho pulse beyond the end of the record");
  const CarrierAngle angle(std::move(anchors), record.sample_rate);

  const std::int64_t hunting = hunting_length(geometry);
  const auto revolutions = static_cast<std::int64_t>(record.tacho_events.size() - 1);
  int cycles = static_cast<int>(revolutions * geometry.ring_teeth / hunting);
  if (cycles < 1) throw PreconditionError("record is shorter than one hunting-tooth cycle");
  if (max_cycles > 0) cycles = std::min(cycles, max_cycles);

  AngularSeries out;
  out.samples_per_mesh = samples_per_mesh;
  out.meshes_per_hunting_cycle = hunting;
  out.cycles = cycles;
  const std::size_t count = out.cycle_length() * static_cast<std::size_t>(cycles);
  const double dtheta = kTwoPi / (static_cast<double>(geometry.ring_teeth) * samples_per_mesh);
  const std::vector<double> positions = angle.samples_at_angles(0.0, dtheta, count);
  out.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) out.values[j] = interpolate(record.samples, positions[j]);
  return out;
}

AngularSeries tsa(const AngularSeries& series) {
  const std::size_t len = series.cycle_length();
  if (series.cycles < 1 || len == 0 || series.values.size() != len * static_cast<std::size_t>(series.cycles))
    throw PreconditionError("tsa: series is not a whole number of hunting cycles");
  AngularSeries out = series;
  out.cycles = 1;
  out.values.assign(len, 0.0);
  for (int c = 0; c < series.cycles; ++c) {
    const double* seg = series.values.data() + static_cast<std::size_t>(c) * len;
    for (std::size_t i = 0; i < len; ++i) out.values[i] += seg[i];
  }
  const double inv = 1.0 / series.cycles;
  for (double& v : out.values) v *= inv;
  return out;
}

RemovalSpec mesh_removal_spec(const GearGeometry& geometry, int samples_per_mesh, int harmonics,
                              int sideband_orders) {
  geometry.validate();
  if (samples_per_mesh < 2) throw PreconditionError("samples per mesh must be at least 2");
  if (harmonics < 0 || sideband_orders < 0) throw PreconditionError("negative removal order");
  const std::int64_t hunting = hunting_length(geometry);
  const std::int64_t half = hunting * samples_per_mesh / 2;
  // Carrier revolutions per hunting cycle.
  const std::int64_t carrier = hunting / geometry.ring_teeth;
  RemovalSpec spec;
  for (int h = 1; h <= harmonics; ++h) {
    const std::int64_t centre = h * hunting;
    for (int s = -sideband_orders; s <= sideband_orders; ++s) {
      const std::int64_t bin = centre + s * carrier;
      if (bin < 0 || bin > half)
        throw PreconditionError("removal bin above Nyquist; raise samples per mesh");
      spec.bins.push_back(static_cast<std::size_t>(bin));
    }
  }
  std::sort(spec.bins.begin(), spec.bins.end());
  spec.bins.erase(std::unique(spec.bins.begin(), spec.bins.end()), spec.bins.end());
  return spec;
}

std::vector<double> remove_bins(std::span<const double> signal, const RemovalSpec& removal) {
  const std::size_t n = signal.size();
  if (n < 2) throw PreconditionError("remove_bins: signal too short");
  const std::size_t nc = n / 2 + 1;
  for (std::size_t b : removal.bins)
    if (b >= nc) throw PreconditionError("remove_bins: bin index beyond Nyquist");
  const PlanPair plan = plan_cache().get(n);
  auto re = alloc_real(n);
  auto cx = alloc_complex(nc);
  std::copy(signal.begin(), signal.end(), re.get());
  fftw_execute_dft_r2c(plan.forward, re.get(), cx.get());
  for (std::size_t b : removal.bins) {
    cx.get()[b][0] = 0.0;
    cx.get()[b][1] = 0.0;
  }
  fftw_execute_dft_c2r(plan.backward, cx.get(), re.get());
  std::vector<double> out(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = re.get()[i] * inv;
  return out;
}

DifferenceSignal difference_signal(const AngularSeries& averaged, const RemovalSpec& removal) {
  if (removal.bins.empty()) throw PreconditionError("difference_signal: empty removal set");
  if (averaged.cycles != 1 || averaged.values.size() != averaged.cycle_length())
    throw PreconditionError("difference_signal expects a single averaged hunting cycle");
  DifferenceSignal out;
  out.values = remove_bins(averaged.values, removal);
  out.samples_per_mesh = averaged.samples_per_mesh;
  out.removal = removal;
  return out;
}

std::vector<double> power_spectrum(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 2) throw PreconditionError("power_spectrum: signal too short");
  const std::size_t nc = n / 2 + 1;
  const PlanPair plan = plan_cache().get(n);
  auto re = alloc_real(n);
  auto cx = alloc_complex(nc);
  std::copy(signal.begin(), signal.end(), re.get());
  fftw_execute_dft_r2c(plan.forward, re.get(), cx.get());
  std::vector<double> out(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    const double a = cx.get()[k][0];
    const double b = cx.get()[k][1];
    out[k] = a * a + b * b;
  }
  return out;
}

}  // namespace gearfd
