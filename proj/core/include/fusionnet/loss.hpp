#pragma once

#include <span>

#include "fusionnet/tensor.hpp"

namespace fusionnet {

template <typename T>
struct LossResult {
  T loss{};
  Tensor<T> grad;  // d loss / d scores, same shape as scores
};

// Mean over the batch of -log softmax(scores)[label], stabilized by subtracting
// the row maximum. Gradient is (softmax - onehot) / N.
template <typename T>
[[nodiscard]] LossResult<T> softmax_loss(const Tensor<T>& scores, std::span<const int> labels);

// Row-wise softmax of an N x K tensor.
template <typename T>
[[nodiscard]] Tensor<T> softmax(const Tensor<T>& scores);

}  // namespace fusionnet
