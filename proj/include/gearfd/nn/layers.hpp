#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gearfd/nn/tensor.hpp"
#include "gearfd/rng.hpp"

namespace gearfd::nn {

enum class LayerKind : std::uint8_t {
  conv = 1,
  transposed_conv = 2,
  batchnorm = 3,
  relu = 4,
  elu = 5,
  maxpool = 6,
  linear = 7,
  reshape = 8,
  crop = 9,
  scale = 10,
};

std::string to_string(LayerKind k);

template <typename T>
struct Param {
  Buffer<T> value;
  Buffer<T> grad;

  explicit Param(std::size_t n = 0) : value(n, T(0)), grad(n, T(0)) {}
};

/// (channels, height, width) of one sample.
using Shape3 = std::array<int, 3>;

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  /// Caches whatever the next backward call needs.
  virtual Tensor<T> forward(const Tensor<T>& x, bool training) = 0;
  /// Gradient with respect to the input of the last forward call. Parameter gradients are
  /// accumulated. Returns an empty tensor when input gradients are disabled.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual Shape3 output_shape(Shape3 in) const = 0;
  /// Architecture integers recorded in weight files.
  virtual std::vector<std::uint32_t> config() const = 0;

  virtual std::vector<Param<T>*> params() { return {}; }
  /// Non-trainable state saved with the weights (batchnorm running statistics, fixed factors).
  virtual std::vector<Buffer<T>*> buffers() { return {}; }
  virtual void init(Rng&) {}

  void set_input_grad(bool on) { input_grad_ = on; }
  bool input_grad() const { return input_grad_; }

 protected:
  bool input_grad_ = true;
};

template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);
  LayerKind kind() const override { return LayerKind::conv; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override;
  std::vector<std::uint32_t> config() const override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  void init(Rng& rng) override;

  Param<T>& weight() { return weight_; }  // out x (in * k * k)
  Param<T>& bias() { return bias_; }

 private:
  int cin_, cout_, k_, s_, p_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
  Buffer<T> col_, buf_;
};

/// Weight layout in x (out * k * k). Output size (in - 1) * stride - 2 * padding + kernel.
template <typename T>
class ConvTranspose2d : public Layer<T> {
 public:
  ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int padding);
  LayerKind kind() const override { return LayerKind::transposed_conv; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override;
  std::vector<std::uint32_t> config() const override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  void init(Rng& rng) override;

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  int cin_, cout_, k_, s_, p_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
  Buffer<T> col_, buf_;
};

/// Per-channel normalization over batch and spatial positions; running statistics are used
/// outside training. Training mode requires a batch of at least 2.
template <typename T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(int channels, double eps = 1e-5, double momentum = 0.1);
  LayerKind kind() const override { return LayerKind::batchnorm; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override { return in; }
  std::vector<std::uint32_t> config() const override { return {static_cast<std::uint32_t>(channels_)}; }
  std::vector<Param<T>*> params() override { return {&gamma_, &beta_}; }
  std::vector<Buffer<T>*> buffers() override { return {&running_mean_, &running_var_}; }

 private:
  int channels_;
  double eps_, momentum_;
  Param<T> gamma_, beta_;
  Buffer<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  Buffer<T> invstd_;
  bool trained_pass_ = false;
};

template <typename T>
class ReLU : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::relu; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override { return in; }
  std::vector<std::uint32_t> config() const override { return {}; }

 private:
  Tensor<T> output_;
};

template <typename T>
class ELU : public Layer<T> {
 public:
  explicit ELU(double alpha = 1.0) : alpha_{static_cast<T>(alpha)} {}
  LayerKind kind() const override { return LayerKind::elu; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override { return in; }
  std::vector<std::uint32_t> config() const override { return {}; }
  std::vector<Buffer<T>*> buffers() override { return {&alpha_}; }
  double alpha() const { return alpha_[0]; }

 private:
  Buffer<T> alpha_;
  Tensor<T> output_;
};

/// Max pooling; padded positions never win.
template <typename T>
class MaxPool2d : public Layer<T> {
 public:
  MaxPool2d(int kernel, int stride, int padding);
  LayerKind kind() const override { return LayerKind::maxpool; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override;
  std::vector<std::uint32_t> config() const override;

 private:
  int k_, s_, p_;
  Tensor<T> input_shape_;  // dimensions only
  std::vector<std::uint32_t> argmax_;
};

/// Flattens each sample and applies y = W x + b; output is N x out x 1 x 1.
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(int in_features, int out_features);
  LayerKind kind() const override { return LayerKind::linear; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override;
  std::vector<std::uint32_t> config() const override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  void init(Rng& rng) override;

  Param<T>& weight() { return weight_; }  // out x in
  Param<T>& bias() { return bias_; }

 private:
  int in_, out_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

/// Reinterprets each sample as channels x height x width.
template <typename T>
class Reshape : public Layer<T> {
 public:
  Reshape(int channels, int height, int width) : c_(channels), h_(height), w_(width) {}
  LayerKind kind() const override { return LayerKind::reshape; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override;
  std::vector<std::uint32_t> config() const override;

 private:
  int c_, h_, w_;
  Shape3 in_shape_{};
};

/// Output (y, x) takes input (y + offset_y, x + offset_x), zero where that falls outside:
/// a crop for nonnegative offsets and smaller outputs, zero padding otherwise.
template <typename T>
class Crop : public Layer<T> {
 public:
  Crop(int height, int width, int offset_y, int offset_x) : h_(height), w_(width), oy_(offset_y), ox_(offset_x) {}
  LayerKind kind() const override { return LayerKind::crop; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override { return {in[0], h_, w_}; }
  std::vector<std::uint32_t> config() const override;

 private:
  int h_, w_, oy_, ox_;
  Shape3 in_shape_{};
};

/// Multiplies by a fixed factor.
template <typename T>
class Scale : public Layer<T> {
 public:
  explicit Scale(double factor) : factor_{static_cast<T>(factor)} {}
  LayerKind kind() const override { return LayerKind::scale; }
  Tensor<T> forward(const Tensor<T>& x, bool training) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  Shape3 output_shape(Shape3 in) const override { return in; }
  std::vector<std::uint32_t> config() const override { return {}; }
  std::vector<Buffer<T>*> buffers() override { return {&factor_}; }
  double factor() const { return factor_[0]; }

 private:
  Buffer<T> factor_;
};

template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<T> forward(const Tensor<T>& x, bool training);
  Tensor<T> backward(const Tensor<T>& grad_out);
  Shape3 output_shape(Shape3 in) const;

  std::vector<Param<T>*> params();
  std::vector<Buffer<T>*> buffers();
  void zero_grad();
  /// Draws initial weights in layer order.
  void init(std::uint64_t seed);

  std::size_t size() const { return layers_.size(); }
  Layer<T>& operator[](std::size_t i) { return *layers_[i]; }
  const Layer<T>& operator[](std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;
};

/// Row-wise softmax of N x K x 1 x 1 logits.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Mean cross-entropy of softmax(logits) against integer labels, with its gradient.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

/// Mean squared error over all elements, with its gradient with respect to pred.
template <typename T>
LossResult<T> mse(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace gearfd::nn
