#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gearfd/nn/layers.hpp"

namespace gearfd::nn {

struct AdamConfig {
  double lr = 1e-3;
  double lr_after_drop = 1e-4;
  std::int64_t drop_at = 2000;  // steps 1..drop_at use lr, later steps lr_after_drop
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  double lr_at(std::int64_t step) const { return step <= drop_at ? lr : lr_after_drop; }
};

template <typename T>
struct AdamState {
  Buffer<T> m;
  Buffer<T> v;
};

/// One bias-corrected Adam update of a single parameter array; `step` is 1-based.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, std::int64_t step,
               const AdamConfig& config);

/// Adam over every parameter of a model; the step counter advances once per call.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamConfig config);

  void step();
  std::int64_t steps() const { return steps_; }
  double current_lr() const { return config_.lr_at(steps_); }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Param<T>*> params_;
  std::vector<AdamState<T>> state_;
  AdamConfig config_;
  std::int64_t steps_ = 0;
};

}  // namespace gearfd::nn
