#include "fusionnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fusionnet {

template <typename T>
Tensor<T> softmax(const Tensor<T>& scores) {
  if (scores.rank() != 2) fail(ErrorKind::shape, "softmax expects N x K scores");
  const std::size_t n = scores.dim(0), k = scores.dim(1);
  Tensor<T> out(scores.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = scores.data().data() + i * k;
    T* dst = out.data().data() + i * k;
    const T m = *std::max_element(row, row + k);
    T sum{0};
    for (std::size_t j = 0; j < k; ++j) {
      dst[j] = std::exp(row[j] - m);
      sum += dst[j];
    }
    for (std::size_t j = 0; j < k; ++j) dst[j] /= sum;
  }
  return out;
}

template <typename T>
LossResult<T> softmax_loss(const Tensor<T>& scores, std::span<const int> labels) {
  if (scores.rank() != 2) fail(ErrorKind::shape, "softmax_loss expects N x K scores");
  const std::size_t n = scores.dim(0), k = scores.dim(1);
  if (labels.size() != n) fail(ErrorKind::shape, "label count does not match batch size");
  if (n == 0) fail(ErrorKind::shape, "softmax_loss on empty batch");
  LossResult<T> result;
  result.grad = Tensor<T>(scores.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      fail(ErrorKind::invalid_argument, "label " + std::to_string(label) + " out of range for " +
                                            std::to_string(k) + " classes");
    }
    const T* row = scores.data().data() + i * k;
    T* g = result.grad.data().data() + i * k;
    const T m = *std::max_element(row, row + k);
    T sum{0};
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - m);
    const T log_z = m + std::log(sum);
    total += static_cast<double>(log_z - row[label]);
    for (std::size_t j = 0; j < k; ++j) {
      g[j] = std::exp(row[j] - log_z) / static_cast<T>(n);
    }
    g[label] -= T{1} / static_cast<T>(n);
  }
  result.loss = static_cast<T>(total / static_cast<double>(n));
  return result;
}

template Tensor<float> softmax<float>(const Tensor<float>&);
template Tensor<double> softmax<double>(const Tensor<double>&);
template LossResult<float> softmax_loss<float>(const Tensor<float>&, std::span<const int>);
template LossResult<double> softmax_loss<double>(const Tensor<double>&, std::span<const int>);

}  // namespace fusionnet
