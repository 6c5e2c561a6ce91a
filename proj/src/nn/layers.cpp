#include "gearfd/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gearfd/error.hpp"

namespace gearfd::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// Row-major patch matrix of one sample: row (c, ki, kj) holds, for every output position, the
// input value under that kernel tap.
template <typename T>
void im2col(const T* img, int C, int H, int W, int k, int s, int p, int Ho, int Wo, T* col) {
  const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
  for (int c = 0; c < C; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        T* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * P;
        const int lo = s == 1 ? std::clamp(p - kj, 0, Wo) : 0;
        const int hi = s == 1 ? std::clamp(W + p - kj, lo, Wo) : 0;
        for (int oi = 0; oi < Ho; ++oi) {
          T* d = row + static_cast<std::size_t>(oi) * Wo;
          const int y = oi * s - p + ki;
          if (y < 0 || y >= H) {
            std::fill(d, d + Wo, T(0));
            continue;
          }
          const T* src = img + (static_cast<std::size_t>(c) * H + y) * W;
          if (s == 1) {
            std::fill(d, d + lo, T(0));
            std::copy(src + lo - p + kj, src + hi - p + kj, d + lo);
            std::fill(d + hi, d + Wo, T(0));
          } else {
            for (int oj = 0; oj < Wo; ++oj) {
              const int x = oj * s - p + kj;
              d[oj] = (x >= 0 && x < W) ? src[x] : T(0);
            }
          }
        }
      }
}

template <typename T>
void col2im(const T* col, int C, int H, int W, int k, int s, int p, int Ho, int Wo, T* img) {
  const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
  for (int c = 0; c < C; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        const T* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * P;
        const int lo = s == 1 ? std::clamp(p - kj, 0, Wo) : 0;
        const int hi = s == 1 ? std::clamp(W + p - kj, lo, Wo) : 0;
        for (int oi = 0; oi < Ho; ++oi) {
          const int y = oi * s - p + ki;
          if (y < 0 || y >= H) continue;
          const T* src = row + static_cast<std::size_t>(oi) * Wo;
          T* d = img + (static_cast<std::size_t>(c) * H + y) * W;
          if (s == 1) {
            for (int oj = lo; oj < hi; ++oj) d[oj - p + kj] += src[oj];
          } else {
            for (int oj = 0; oj < Wo; ++oj) {
              const int x = oj * s - p + kj;
              if (x >= 0 && x < W) d[x] += src[oj];
            }
          }
        }
      }
}

template <typename T>
void add_bias(T* dst, const Buffer<T>& bias, std::size_t P) {
  for (std::size_t co = 0; co < bias.size(); ++co) {
    const T b = bias[co];
    for (std::size_t q = 0; q < P; ++q) dst[co * P + q] += b;
  }
}

template <typename T>
void accumulate_bias_grad(const Tensor<T>& g, Buffer<T>& grad) {
  const std::size_t P = static_cast<std::size_t>(g.h) * g.w;
  for (int co = 0; co < g.c; ++co) {
    double acc = 0;
    for (int i = 0; i < g.n; ++i) {
      const T* src = g.sample(i) + co * P;
      for (std::size_t q = 0; q < P; ++q) acc += src[q];
    }
    grad[co] += static_cast<T>(acc);
  }
}

template <typename T>
void kaiming(Buffer<T>& w, double fan_in, Rng& rng) {
  const double sd = std::sqrt(2.0 / fan_in);
  for (T& v : w) v = static_cast<T>(sd * rng.normal());
}

void check_geometry(int cin, int cout, int k, int s, int p) {
  if (cin < 1 || cout < 1 || k < 1) throw PreconditionError("channels and kernel must be positive");
  if (s < 1) throw PreconditionError("stride must be positive");
  if (p < 0) throw PreconditionError("padding must be nonnegative");
}

}  // namespace

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv:
      return "conv";
    case LayerKind::transposed_conv:
      return "transposed_conv";
    case LayerKind::batchnorm:
      return "batchnorm";
    case LayerKind::relu:
      return "relu";
    case LayerKind::elu:
      return "elu";
    case LayerKind::maxpool:
      return "maxpool";
    case LayerKind::linear:
      return "linear";
    case LayerKind::reshape:
      return "reshape";
    case LayerKind::crop:
      return "crop";
    case LayerKind::scale:
      return "scale";
  }
  return "unknown";
}

// --- Conv2d --------------------------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : cin_(in_channels), cout_(out_channels), k_(kernel), s_(stride), p_(padding) {
  check_geometry(cin_, cout_, k_, s_, p_);
  weight_ = Param<T>(static_cast<std::size_t>(cout_) * cin_ * k_ * k_);
  bias_ = Param<T>(static_cast<std::size_t>(cout_));
}

template <typename T>
Shape3 Conv2d<T>::output_shape(Shape3 in) const {
  if (in[0] != cin_) throw PreconditionError("conv: input channel mismatch");
  const int ho = conv_out(in[1], k_, s_, p_);
  const int wo = conv_out(in[2], k_, s_, p_);
  if (in[1] + 2 * p_ < k_ || in[2] + 2 * p_ < k_ || ho < 1 || wo < 1)
    throw PreconditionError("conv: input smaller than kernel");
  return {cout_, ho, wo};
}

template <typename T>
std::vector<std::uint32_t> Conv2d<T>::config() const {
  return {static_cast<std::uint32_t>(cin_), static_cast<std::uint32_t>(cout_), static_cast<std::uint32_t>(k_),
          static_cast<std::uint32_t>(s_), static_cast<std::uint32_t>(p_)};
}

template <typename T>
void Conv2d<T>::init(Rng& rng) {
  kaiming(weight_.value, static_cast<double>(cin_) * k_ * k_, rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, bool) {
  const Shape3 os = output_shape({x.c, x.h, x.w});
  const int ho = os[1], wo = os[2];
  const auto P = static_cast<Eigen::Index>(ho) * wo;
  const auto K = static_cast<Eigen::Index>(cin_) * k_ * k_;
  input_ = x;
  Tensor<T> out(x.n, cout_, ho, wo);
  col_.resize(K * P);
  const ConstMapMat<T> w(weight_.value.data(), cout_, K);
  const ConstMapMat<T> col(col_.data(), K, P);
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), cin_, x.h, x.w, k_, s_, p_, ho, wo, col_.data());
    MapMat<T> res(out.sample(i), cout_, P);
    res.noalias() = w * col;
    add_bias(out.sample(i), bias_.value, P);
  }
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& g) {
  const Tensor<T>& x = input_;
  const Shape3 os = output_shape({x.c, x.h, x.w});
  require_shape(g, x.n, os[0], os[1], os[2], "conv backward");
  const int ho = os[1], wo = os[2];
  const auto P = static_cast<Eigen::Index>(ho) * wo;
  const auto K = static_cast<Eigen::Index>(cin_) * k_ * k_;
  Tensor<T> dx;
  if (this->input_grad_) {
    dx = Tensor<T>(x.n, x.c, x.h, x.w);
    buf_.resize(K * P);
  }
  col_.resize(K * P);
  const ConstMapMat<T> w(weight_.value.data(), cout_, K);
  MapMat<T> dw(weight_.grad.data(), cout_, K);
  const ConstMapMat<T> col(col_.data(), K, P);
  MapMat<T> dcol(buf_.data(), K, P);
  accumulate_bias_grad(g, bias_.grad);
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), cin_, x.h, x.w, k_, s_, p_, ho, wo, col_.data());
    const ConstMapMat<T> dout(g.sample(i), cout_, P);
    dw.noalias() += dout * col.transpose();
    if (this->input_grad_) {
      dcol.noalias() = w.transpose() * dout;
      col2im(buf_.data(), cin_, x.h, x.w, k_, s_, p_, ho, wo, dx.sample(i));
    }
  }
  return dx;
}

// --- ConvTranspose2d -----------------------------------------------------------------------

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : cin_(in_channels), cout_(out_channels), k_(kernel), s_(stride), p_(padding) {
  check_geometry(cin_, cout_, k_, s_, p_);
  weight_ = Param<T>(static_cast<std::size_t>(cin_) * cout_ * k_ * k_);
  bias_ = Param<T>(static_cast<std::size_t>(cout_));
}

template <typename T>
Shape3 ConvTranspose2d<T>::output_shape(Shape3 in) const {
  if (in[0] != cin_) throw PreconditionError("transposed conv: input channel mismatch");
  const int ho = (in[1] - 1) * s_ - 2 * p_ + k_;
  const int wo = (in[2] - 1) * s_ - 2 * p_ + k_;
  if (in[1] < 1 || in[2] < 1 || ho < 1 || wo < 1) throw PreconditionError("transposed conv: empty output");
  return {cout_, ho, wo};
}

template <typename T>
std::vector<std::uint32_t> ConvTranspose2d<T>::config() const {
  return {static_cast<std::uint32_t>(cin_), static_cast<std::uint32_t>(cout_), static_cast<std::uint32_t>(k_),
          static_cast<std::uint32_t>(s_), static_cast<std::uint32_t>(p_)};
}

template <typename T>
void ConvTranspose2d<T>::init(Rng& rng) {
  kaiming(weight_.value, std::max(1.0, static_cast<double>(cin_) * k_ * k_ / (s_ * s_)), rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x, bool) {
  const Shape3 os = output_shape({x.c, x.h, x.w});
  const int ho = os[1], wo = os[2];
  const auto Pi = static_cast<Eigen::Index>(x.h) * x.w;
  const auto K = static_cast<Eigen::Index>(cout_) * k_ * k_;
  input_ = x;
  Tensor<T> out(x.n, cout_, ho, wo);
  col_.resize(K * Pi);
  const ConstMapMat<T> w(weight_.value.data(), cin_, K);
  MapMat<T> col(col_.data(), K, Pi);
  for (int i = 0; i < x.n; ++i) {
    const ConstMapMat<T> xin(x.sample(i), cin_, Pi);
    col.noalias() = w.transpose() * xin;
    col2im(col_.data(), cout_, ho, wo, k_, s_, p_, x.h, x.w, out.sample(i));
    add_bias(out.sample(i), bias_.value, static_cast<std::size_t>(ho) * wo);
  }
  return out;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& g) {
  const Tensor<T>& x = input_;
  const Shape3 os = output_shape({x.c, x.h, x.w});
  require_shape(g, x.n, os[0], os[1], os[2], "transposed conv backward");
  const int ho = os[1], wo = os[2];
  const auto Pi = static_cast<Eigen::Index>(x.h) * x.w;
  const auto K = static_cast<Eigen::Index>(cout_) * k_ * k_;
  Tensor<T> dx;
  if (this->input_grad_) dx = Tensor<T>(x.n, x.c, x.h, x.w);
  col_.resize(K * Pi);
  const ConstMapMat<T> w(weight_.value.data(), cin_, K);
  MapMat<T> dw(weight_.grad.data(), cin_, K);
  const ConstMapMat<T> dcol(col_.data(), K, Pi);
  accumulate_bias_grad(g, bias_.grad);
  for (int i = 0; i < x.n; ++i) {
    im2col(g.sample(i), cout_, ho, wo, k_, s_, p_, x.h, x.w, col_.data());
    const ConstMapMat<T> xin(x.sample(i), cin_, Pi);
    dw.noalias() += xin * dcol.transpose();
    if (this->input_grad_) {
      MapMat<T> d(dx.sample(i), cin_, Pi);
      d.noalias() = w * dcol;
    }
  }
  return dx;
}

// --- BatchNorm -----------------------------------------------------------------------------

template <typename T>
BatchNorm<T>::BatchNorm(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
  if (channels < 1) throw PreconditionError("batchnorm: channels must be positive");
  gamma_ = Param<T>(channels);
  beta_ = Param<T>(channels);
  std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
  running_mean_.assign(channels, T(0));
  running_var_.assign(channels, T(1));
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, bool training) {
  if (x.c != channels_) throw PreconditionError("batchnorm: channel mismatch");
  const std::size_t hw = static_cast<std::size_t>(x.h) * x.w;
  const std::size_t m = hw * x.n;
  Tensor<T> out(x.n, x.c, x.h, x.w);
  trained_pass_ = training;
  if (training) {
    if (x.n < 2) throw PreconditionError("batchnorm: training mode needs a batch of at least 2");
    xhat_ = Tensor<T>(x.n, x.c, x.h, x.w);
    invstd_.assign(channels_, T(0));
    for (int c = 0; c < channels_; ++c) {
      double sum = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const T* p = x.sample(i) + c * hw;
        for (std::size_t q = 0; q < hw; ++q) sum += p[q];
      }
      const double mean = sum / static_cast<double>(m);
      double sq = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const T* p = x.sample(i) + c * hw;
        for (std::size_t q = 0; q < hw; ++q) sq += (p[q] - mean) * (p[q] - mean);
      }
      const double var = sq / static_cast<double>(m);
      const double inv = 1.0 / std::sqrt(var + eps_);
      invstd_[c] = static_cast<T>(inv);
      for (int i = 0; i < x.n; ++i) {
        const T* p = x.sample(i) + c * hw;
        T* xh = xhat_.sample(i) + c * hw;
        T* o = out.sample(i) + c * hw;
        for (std::size_t q = 0; q < hw; ++q) {
          xh[q] = static_cast<T>((p[q] - mean) * inv);
          o[q] = gamma_.value[c] * xh[q] + beta_.value[c];
        }
      }
      const double unbiased = m > 1 ? sq / static_cast<double>(m - 1) : var;
      running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
      running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    }
  } else {
    for (int c = 0; c < channels_; ++c) {
      const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
      const T a = static_cast<T>(gamma_.value[c] * inv);
      const T b = static_cast<T>(beta_.value[c] - gamma_.value[c] * running_mean_[c] * inv);
      for (int i = 0; i < x.n; ++i) {
        const T* p = x.sample(i) + c * hw;
        T* o = out.sample(i) + c * hw;
        for (std::size_t q = 0; q < hw; ++q) o[q] = a * p[q] + b;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& g) {
  if (!trained_pass_) throw PreconditionError("batchnorm: backward requires a training-mode forward pass");
  require_shape(g, xhat_.n, xhat_.c, xhat_.h, xhat_.w, "batchnorm backward");
  const std::size_t hw = static_cast<std::size_t>(g.h) * g.w;
  const double m = static_cast<double>(hw * g.n);
  Tensor<T> dx;
  if (this->input_grad_) dx = Tensor<T>(g.n, g.c, g.h, g.w);
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int i = 0; i < g.n; ++i) {
      const T* gp = g.sample(i) + c * hw;
      const T* xh = xhat_.sample(i) + c * hw;
      for (std::size_t q = 0; q < hw; ++q) {
        sum_g += gp[q];
        sum_gx += gp[q] * xh[q];
      }
    }
    gamma_.grad[c] += static_cast<T>(sum_gx);
    beta_.grad[c] += static_cast<T>(sum_g);
    if (!this->input_grad_) continue;
    const double k = gamma_.value[c] * invstd_[c] / m;
    for (int i = 0; i < g.n; ++i) {
      const T* gp = g.sample(i) + c * hw;
      const T* xh = xhat_.sample(i) + c * hw;
      T* d = dx.sample(i) + c * hw;
      for (std::size_t q = 0; q < hw; ++q) d[q] = static_cast<T>(k * (m * gp[q] - sum_g - xh[q] * sum_gx));
    }
  }
  return dx;
}

// --- activations ---------------------------------------------------------------------------

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, bool) {
  Tensor<T> out = x;
  for (T& v : out.data) v = v > T(0) ? v : T(0);
  output_ = out;
  return out;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& g) {
  if (!g.same_shape(output_)) throw PreconditionError("relu backward: shape mismatch");
  if (!this->input_grad_) return {};
  Tensor<T> dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(output_.data[i] > T(0))) dx.data[i] = T(0);
  return dx;
}

template <typename T>
Tensor<T> ELU<T>::forward(const Tensor<T>& x, bool) {
  Tensor<T> out = x;
  const T a = alpha_[0];
  for (T& v : out.data) v = v > T(0) ? v : a * std::expm1(v);
  output_ = out;
  return out;
}

template <typename T>
Tensor<T> ELU<T>::backward(const Tensor<T>& g) {
  if (!g.same_shape(output_)) throw PreconditionError("elu backward: shape mismatch");
  if (!this->input_grad_) return {};
  Tensor<T> dx = g;
  const T a = alpha_[0];
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(output_.data[i] > T(0))) dx.data[i] *= output_.data[i] + a;
  return dx;
}

// --- MaxPool2d -----------------------------------------------------------------------------

template <typename T>
MaxPool2d<T>::MaxPool2d(int kernel, int stride, int padding) : k_(kernel), s_(stride), p_(padding) {
  if (k_ < 1 || s_ < 1 || p_ < 0) throw PreconditionError("maxpool: invalid geometry");
  if (2 * p_ > k_) throw PreconditionError("maxpool: padding larger than half the kernel");
}

template <typename T>
Shape3 MaxPool2d<T>::output_shape(Shape3 in) const {
  const int ho = conv_out(in[1], k_, s_, p_);
  const int wo = conv_out(in[2], k_, s_, p_);
  if (in[1] + 2 * p_ < k_ || in[2] + 2 * p_ < k_ || ho < 1 || wo < 1)
    throw PreconditionError("maxpool: input smaller than window");
  return {in[0], ho, wo};
}

template <typename T>
std::vector<std::uint32_t> MaxPool2d<T>::config() const {
  return {static_cast<std::uint32_t>(k_), static_cast<std::uint32_t>(s_), static_cast<std::uint32_t>(p_)};
}

template <typename T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, bool) {
  const Shape3 os = output_shape({x.c, x.h, x.w});
  const int ho = os[1], wo = os[2];
  input_shape_ = Tensor<T>();
  input_shape_.n = x.n;
  input_shape_.c = x.c;
  input_shape_.h = x.h;
  input_shape_.w = x.w;
  Tensor<T> out(x.n, x.c, ho, wo);
  argmax_.resize(out.size());
  std::size_t o = 0;
  for (int i = 0; i < x.n; ++i)
    for (int c = 0; c < x.c; ++c) {
      const T* img = x.sample(i) + static_cast<std::size_t>(c) * x.h * x.w;
      for (int oi = 0; oi < ho; ++oi)
        for (int oj = 0; oj < wo; ++oj, ++o) {
          T best = -std::numeric_limits<T>::infinity();
          std::uint32_t arg = 0;
          const int y0 = oi * s_ - p_, x0 = oj * s_ - p_;
          for (int ki = 0; ki < k_; ++ki) {
            const int y = y0 + ki;
            if (y < 0 || y >= x.h) continue;
            for (int kj = 0; kj < k_; ++kj) {
              const int xx = x0 + kj;
              if (xx < 0 || xx >= x.w) continue;
              const T v = img[y * x.w + xx];
              if (v > best) {
                best = v;
                arg = static_cast<std::uint32_t>(y * x.w + xx);
              }
            }
          }
          out.data[o] = best;
          argmax_[o] = arg;
        }
    }
  return out;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& g) {
  const Tensor<T>& s = input_shape_;
  const Shape3 os = output_shape({s.c, s.h, s.w});
  require_shape(g, s.n, os[0], os[1], os[2], "maxpool backward");
  if (!this->input_grad_) return {};
  Tensor<T> dx(s.n, s.c, s.h, s.w);
  const std::size_t plane_out = static_cast<std::size_t>(os[1]) * os[2];
  const std::size_t plane_in = static_cast<std::size_t>(s.h) * s.w;
  for (std::size_t o = 0; o < g.size(); ++o) dx.data[(o / plane_out) * plane_in + argmax_[o]] += g.data[o];
  return dx;
}

// --- Linear --------------------------------------------------------------------------------

template <typename T>
Linear<T>::Linear(int in_features, int out_features) : in_(in_features), out_(out_features) {
  if (in_ < 1 || out_ < 1) throw PreconditionError("linear: feature counts must be positive");
  weight_ = Param<T>(static_cast<std::size_t>(in_) * out_);
  bias_ = Param<T>(static_cast<std::size_t>(out_));
}

template <typename T>
Shape3 Linear<T>::output_shape(Shape3 in) const {
  if (in[0] * in[1] * in[2] != in_) throw PreconditionError("linear: input size mismatch");
  return {out_, 1, 1};
}

template <typename T>
std::vector<std::uint32_t> Linear<T>::config() const {
  return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_)};
}

template <typename T>
void Linear<T>::init(Rng& rng) {
  kaiming(weight_.value, in_, rng);
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, bool) {
  output_shape({x.c, x.h, x.w});
  input_ = x;
  Tensor<T> out(x.n, out_, 1, 1);
  const ConstMapMat<T> xin(x.data.data(), x.n, in_);
  const ConstMapMat<T> w(weight_.value.data(), out_, in_);
  MapMat<T> y(out.data.data(), x.n, out_);
  y.noalias() = xin * w.transpose();
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.data(), out_);
  y.rowwise() += b;
  return out;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& g) {
  const Tensor<T>& x = input_;
  require_shape(g, x.n, out_, 1, 1, "linear backward");
  const ConstMapMat<T> xin(x.data.data(), x.n, in_);
  const ConstMapMat<T> dy(g.data.data(), x.n, out_);
  MapMat<T> dw(weight_.grad.data(), out_, in_);
  dw.noalias() += dy.transpose() * xin;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_.grad.data(), out_);
  db += dy.colwise().sum();
  if (!this->input_grad_) return {};
  Tensor<T> dx(x.n, x.c, x.h, x.w);
  const ConstMapMat<T> w(weight_.value.data(), out_, in_);
  MapMat<T> d(dx.data.data(), x.n, in_);
  d.noalias() = dy * w;
  return dx;
}

// --- shape layers --------------------------------------------------------------------------

template <typename T>
Shape3 Reshape<T>::output_shape(Shape3 in) const {
  if (in[0] * in[1] * in[2] != c_ * h_ * w_) throw PreconditionError("reshape: element count mismatch");
  return {c_, h_, w_};
}

template <typename T>
std::vector<std::uint32_t> Reshape<T>::config() const {
  return {static_cast<std::uint32_t>(c_), static_cast<std::uint32_t>(h_), static_cast<std::uint32_t>(w_)};
}

template <typename T>
Tensor<T> Reshape<T>::forward(const Tensor<T>& x, bool) {
  output_shape({x.c, x.h, x.w});
  in_shape_ = {x.c, x.h, x.w};
  Tensor<T> out = x;
  out.c = c_;
  out.h = h_;
  out.w = w_;
  return out;
}

template <typename T>
Tensor<T> Reshape<T>::backward(const Tensor<T>& g) {
  if (g.c != c_ || g.h != h_ || g.w != w_) throw PreconditionError("reshape backward: shape mismatch");
  if (!this->input_grad_) return {};
  Tensor<T> dx = g;
  dx.c = in_shape_[0];
  dx.h = in_shape_[1];
  dx.w = in_shape_[2];
  return dx;
}

template <typename T>
std::vector<std::uint32_t> Crop<T>::config() const {
  return {static_cast<std::uint32_t>(h_), static_cast<std::uint32_t>(w_), static_cast<std::uint32_t>(oy_),
          static_cast<std::uint32_t>(ox_)};
}

template <typename T>
Tensor<T> Crop<T>::forward(const Tensor<T>& x, bool) {
  in_shape_ = {x.c, x.h, x.w};
  Tensor<T> out(x.n, x.c, h_, w_);
  for (int i = 0; i < x.n; ++i)
    for (int c = 0; c < x.c; ++c)
      for (int y = 0; y < h_; ++y) {
        const int sy = y + oy_;
        if (sy < 0 || sy >= x.h) continue;
        for (int xx = 0; xx < w_; ++xx) {
          const int sx = xx + ox_;
          if (sx >= 0 && sx < x.w) out.at(i, c, y, xx) = x.at(i, c, sy, sx);
        }
      }
  return out;
}

template <typename T>
Tensor<T> Crop<T>::backward(const Tensor<T>& g) {
  if (g.h != h_ || g.w != w_ || g.c != in_shape_[0]) throw PreconditionError("crop backward: shape mismatch");
  if (!this->input_grad_) return {};
  Tensor<T> dx(g.n, in_shape_[0], in_shape_[1], in_shape_[2]);
  for (int i = 0; i < g.n; ++i)
    for (int c = 0; c < g.c; ++c)
      for (int y = 0; y < h_; ++y) {
        const int sy = y + oy_;
        if (sy < 0 || sy >= dx.h) continue;
        for (int xx = 0; xx < w_; ++xx) {
          const int sx = xx + ox_;
          if (sx >= 0 && sx < dx.w) dx.at(i, c, sy, sx) += g.at(i, c, y, xx);
        }
      }
  return dx;
}

template <typename T>
Tensor<T> Scale<T>::forward(const Tensor<T>& x, bool) {
  Tensor<T> out = x;
  const T f = factor_[0];
  for (T& v : out.data) v *= f;
  return out;
}

template <typename T>
Tensor<T> Scale<T>::backward(const Tensor<T>& g) {
  if (!this->input_grad_) return {};
  return forward(g, false);
}

// --- Sequential ----------------------------------------------------------------------------

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, bool training) {
  if (layers_.empty()) return x;
  Tensor<T> h = layers_.front()->forward(x, training);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, training);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g);
    if (!layers_[i]->input_grad()) break;
  }
  return g;
}

template <typename T>
Shape3 Sequential<T>::output_shape(Shape3 in) const {
  for (const auto& l : layers_) in = l->output_shape(in);
  return in;
}

template <typename T>
std::vector<Param<T>*> Sequential<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_)
    for (Param<T>* p : l->params()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<Buffer<T>*> Sequential<T>::buffers() {
  std::vector<Buffer<T>*> out;
  for (auto& l : layers_)
    for (auto* b : l->buffers()) out.push_back(b);
  return out;
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (Param<T>* p : params()) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

template <typename T>
void Sequential<T>::init(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) l->init(rng);
}

// --- losses --------------------------------------------------------------------------------

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const int k = logits.c * logits.h * logits.w;
  if (k < 1) throw PreconditionError("softmax: empty rows");
  Tensor<T> out = logits;
  for (int i = 0; i < logits.n; ++i) {
    T* row = out.sample(i);
    const T mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    for (int j = 0; j < k; ++j) row[j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / sum);
  }
  return out;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  const int k = logits.c * logits.h * logits.w;
  if (logits.n < 1 || static_cast<std::size_t>(logits.n) != labels.size())
    throw PreconditionError("cross-entropy: label count does not match the batch");
  LossResult<T> r;
  r.grad = softmax(logits);
  double loss = 0.0;
  for (int i = 0; i < logits.n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) throw PreconditionError("cross-entropy: label out of range");
    const T* row = logits.sample(i);
    const T mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    loss += std::log(sum) - static_cast<double>(row[y] - mx);
    T* g = r.grad.sample(i);
    g[y] -= T(1);
    for (int j = 0; j < k; ++j) g[j] /= static_cast<T>(logits.n);
  }
  r.loss = loss / logits.n;
  return r;
}

template <typename T>
LossResult<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!pred.same_shape(target) || pred.size() == 0) throw PreconditionError("mse: shape mismatch");
  LossResult<T> r;
  r.grad = pred;
  double loss = 0.0;
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    loss += d * d;
    r.grad.data[i] = static_cast<T>(2.0 * d / n);
  }
  r.loss = loss / n;
  return r;
}

#define GEARFD_INSTANTIATE(T)                                                            \
  template class Conv2d<T>;                                                              \
  template class ConvTranspose2d<T>;                                                     \
  template class BatchNorm<T>;                                                           \
  template class ReLU<T>;                                                                \
  template class ELU<T>;                                                                 \
  template class MaxPool2d<T>;                                                           \
  template class Linear<T>;                                                              \
  template class Reshape<T>;                                                             \
  template class Crop<T>;                                                                \
  template class Scale<T>;                                                               \
  template class Sequential<T>;                                                          \
  template Tensor<T> softmax(const Tensor<T>&);                                          \
  template LossResult<T> softmax_cross_entropy(const Tensor<T>&, std::span<const int>); \
  template LossResult<T> mse(const Tensor<T>&, const Tensor<T>&);

GEARFD_INSTANTIATE(float)
GEARFD_INSTANTIATE(double)

#undef GEARFD_INSTANTIATE

}  // namespace gearfd::nn
