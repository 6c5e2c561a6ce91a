#include "gearfd/nn/tensor.hpp"

#include "gearfd/error.hpp"

namespace gearfd::nn {

template <typename T>
Tensor<T>::Tensor(int n_, int c_, int h_, int w_, T fill) : n(n_), c(c_), h(h_), w(w_) {
  if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw PreconditionError("negative tensor dimension");
  data.assign(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill);
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

template <typename T>
void require_shape(const Tensor<T>& t, int n, int c, int h, int w, const char* what) {
  if (t.n != n || t.c != c || t.h != h || t.w != w)
    throw PreconditionError(std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(c) + "x" +
                            std::to_string(h) + "x" + std::to_string(w) + ", got " + t.shape_string());
}

template struct Tensor<float>;
template struct Tensor<double>;
template void require_shape(const Tensor<float>&, int, int, int, int, const char*);
template void require_shape(const Tensor<double>&, int, int, int, int, const char*);

}  // namespace gearfd::nn
