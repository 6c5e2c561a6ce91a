#include "gearfd/nn/adam.hpp"

#include <cmath>

#include "gearfd/error.hpp"

namespace gearfd::nn {

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, std::int64_t step,
               const AdamConfig& config) {
  if (params.size() != grads.size()) throw PreconditionError("adam: parameter and gradient sizes differ");
  if (step < 1) throw PreconditionError("adam: steps are numbered from 1");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw PreconditionError("adam: moment sizes differ from the parameters");
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  const double lr = config.lr_at(step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = b1 * state.m[i] + (1.0 - b1) * g;
    const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    params[i] = static_cast<T>(params[i] - lr * (m / c1) / (std::sqrt(v / c2) + config.eps));
  }
}

template <typename T>
Adam<T>::Adam(std::vector<Param<T>*> params, AdamConfig config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param<T>& p = *params_[i];
    adam_step<T>(p.value, p.grad, state_[i], steps_, config_);
  }
}

template void adam_step(std::span<float>, std::span<const float>, AdamState<float>&, std::int64_t,
                        const AdamConfig&);
template void adam_step(std::span<double>, std::span<const double>, AdamState<double>&, std::int64_t,
                        const AdamConfig&);
template class Adam<float>;
template class Adam<double>;

}  // namespace gearfd::nn
