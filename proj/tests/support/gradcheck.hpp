#pragma once

// Central finite-difference gradient checks for layers and losses in double precision.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gearfd/nn/layers.hpp"
#include "gearfd/rng.hpp"

namespace gearfd::testing {

using nn::Tensor;

inline Tensor<double> random_tensor(int n, int c, int h, int w, Rng& rng, double min_abs = 0.0) {
  Tensor<double> t(n, c, h, w);
  for (double& v : t.data) {
    do v = rng.uniform(-1.0, 1.0);
    while (std::abs(v) < min_abs);
  }
  return t;
}

/// ||a - b|| / max(||a|| + ||b||, tiny).
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += a[i] * a[i] + b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

struct GradCheck {
  double input = 0.0;  // relative error of the input gradient
  double params = 0.0;  // worst relative error over parameter arrays
  double worst() const { return std::max(input, params); }
};

/// Checks L = sum(r * layer(x)) for a random weighting r.
inline GradCheck check_layer(nn::Layer<double>& layer, Tensor<double> x, Rng& rng, double h = 1e-6) {
  const Tensor<double> y0 = layer.forward(x, true);
  Tensor<double> r = random_tensor(y0.n, y0.c, y0.h, y0.w, rng);
  auto loss = [&](const Tensor<double>& in) {
    const Tensor<double> y = layer.forward(in, true);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r.data[i] * y.data[i];
    return s;
  };
  for (auto* p : layer.params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  layer.forward(x, true);
  const Tensor<double> dx = layer.backward(r);
  std::vector<nn::Buffer<double>> analytic;
  for (auto* p : layer.params()) analytic.push_back(p->grad);

  GradCheck out;
  std::vector<double> numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data[i];
    x.data[i] = v + h;
    const double lp = loss(x);
    x.data[i] = v - h;
    const double lm = loss(x);
    x.data[i] = v;
    numeric[i] = (lp - lm) / (2 * h);
  }
  out.input = relative_error(dx.data, numeric);
  auto params = layer.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Buffer<double>& value = params[k]->value;
    std::vector<double> num(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double v = value[i];
      value[i] = v + h;
      const double lp = loss(x);
      value[i] = v - h;
      const double lm = loss(x);
      value[i] = v;
      num[i] = (lp - lm) / (2 * h);
    }
    out.params = std::max(out.params, relative_error(analytic[k], num));
  }
  return out;
}

/// Checks a loss function's gradient with respect to its first argument.
inline double check_loss(const std::function<nn::LossResult<double>(const Tensor<double>&)>& f, Tensor<double> x,
                         double h = 1e-6) {
  const auto res = f(x);
  std::vector<double> numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data[i];
    x.data[i] = v + h;
    const double lp = f(x).loss;
    x.data[i] = v - h;
    const double lm = f(x).loss;
    x.data[i] = v;
    numeric[i] = (lp - lm) / (2 * h);
  }
  return relative_error(res.grad.data, numeric);
}

struct LayerCase {
  std::string name;
  /// Builds a layer and its input for one seed.
  std::function<void(Rng&, std::unique_ptr<nn::Layer<double>>&, Tensor<double>&)> make;
};

inline std::vector<LayerCase> layer_cases() {
  using namespace nn;
  std::vector<LayerCase> cases;
  cases.push_back({"conv", [](Rng& rng, auto& layer, auto& x) {
                     const int k = 1 + 2 * static_cast<int>(rng.uniform_int(0, 2));
                     const int s = static_cast<int>(rng.uniform_int(1, 2));
                     const int p = static_cast<int>(rng.uniform_int(0, 2));
                     auto l = std::make_unique<Conv2d<double>>(2, 3, k, s, p);
                     l->init(rng);
                     for (double& b : l->bias().value) b = rng.uniform(-0.5, 0.5);
                     x = random_tensor(2, 2, 7, 6, rng);
                     layer = std::move(l);
                   }});
  cases.push_back({"transposed_conv", [](Rng& rng, auto& layer, auto& x) {
                     const int k = static_cast<int>(rng.uniform_int(2, 5));
                     const int s = static_cast<int>(rng.uniform_int(1, 2));
                     const int p = static_cast<int>(rng.uniform_int(0, 1));
                     auto l = std::make_unique<ConvTranspose2d<double>>(3, 2, k, s, p);
                     l->init(rng);
                     for (double& b : l->bias().value) b = rng.uniform(-0.5, 0.5);
                     x = random_tensor(2, 3, 4, 5, rng);
                     layer = std::move(l);
                   }});
  cases.push_back({"batchnorm", [](Rng& rng, auto& layer, auto& x) {
                     auto l = std::make_unique<BatchNorm<double>>(3);
                     for (double& g : l->params()[0]->value) g = rng.uniform(0.5, 1.5);
                     for (double& b : l->params()[1]->value) b = rng.uniform(-0.5, 0.5);
                     x = random_tensor(3, 3, 3, 4, rng);
                     layer = std::move(l);
                   }});
  cases.push_back({"maxpool", [](Rng& rng, auto& layer, auto& x) {
                     const int k = static_cast<int>(rng.uniform_int(2, 3));
                     const int s = static_cast<int>(rng.uniform_int(1, 2));
                     const int p = static_cast<int>(rng.uniform_int(0, k / 2));
                     layer = std::make_unique<MaxPool2d<double>>(k, s, p);
                     x = random_tensor(2, 2, 7, 6, rng);
                   }});
  cases.push_back({"relu", [](Rng& rng, auto& layer, auto& x) {
                     layer = std::make_unique<ReLU<double>>();
                     x = random_tensor(2, 3, 4, 5, rng, 1e-3);
                   }});
  cases.push_back({"elu", [](Rng& rng, auto& layer, auto& x) {
                     layer = std::make_unique<ELU<double>>();
                     x = random_tensor(2, 3, 4, 5, rng, 1e-3);
                   }});
  cases.push_back({"linear", [](Rng& rng, auto& layer, auto& x) {
                     auto l = std::make_unique<Linear<double>>(12, 5);
                     l->init(rng);
                     for (double& b : l->bias().value) b = rng.uniform(-0.5, 0.5);
                     x = random_tensor(3, 3, 2, 2, rng);
                     layer = std::move(l);
                   }});
  return cases;
}

}  // namespace gearfd::testing
