#pragma once

// Encoder-based angular resampling, time synchronous averaging and removal of the regular
// meshing components: the three steps that turn a raw record into a difference signal.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gearfd/gearsim.hpp"

namespace gearfd {

/// Signal on a uniform ring-planet meshing-angle grid, cut to whole hunting-tooth cycles.
struct AngularSeries {
  std::vector<double> values;
  int samples_per_mesh = 0;
  std::int64_t meshes_per_hunting_cycle = 0;
  int cycles = 0;

  std::size_t cycle_length() const {
    return static_cast<std::size_t>(meshes_per_hunting_cycle) * static_cast<std::size_t>(samples_per_mesh);
  }
};

/// One-sided spectral bins (0..L/2) of a one-hunting-cycle signal of length L to be zeroed.
struct RemovalSpec {
  std::vector<std::size_t> bins;
};

struct DifferenceSignal {
  std::vector<double> values;
  int samples_per_mesh = 0;
  RemovalSpec removal;
};

/// Resamples a record onto `samples_per_mesh` points per meshing event using the tachometer
/// as the angle reference (cubic between revolution anchors, linear at the ends), and keeps
/// the largest whole number of hunting-tooth cycles after the first tacho pulse.
/// `max_cycles` > 0 caps the number of cycles kept.
AngularSeries angular_resample(const TimeSeriesRecord& record, const GearGeometry& geometry,
                               int samples_per_mesh, int max_cycles = 0);

/// Elementwise mean of the hunting-cycle segments; the result has cycles == 1.
AngularSeries tsa(const AngularSeries& series);

/// Mesh harmonics 1..harmonics and their +-1..sideband_orders carrier-order sidebands for a
/// one-hunting-cycle signal.
RemovalSpec mesh_removal_spec(const GearGeometry& geometry, int samples_per_mesh, int harmonics = 8,
                              int sideband_orders = 1);

/// Zeroes the listed bins of the real spectrum of `signal` and transforms back.
std::vector<double> remove_bins(std::span<const double> signal, const RemovalSpec& removal);

/// Difference signal of a time-synchronous average (cycles must be 1).
DifferenceSignal difference_signal(const AngularSeries& averaged, const RemovalSpec& removal);

/// Squared magnitude of the one-sided real DFT, |X_k|^2 for k = 0..L/2.
std::vector<double> power_spectrum(std::span<const double> signal);

}  // namespace gearfd
