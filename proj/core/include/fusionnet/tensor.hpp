#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fusionnet/error.hpp"

namespace fusionnet {

using Shape = std::vector<std::size_t>;

// Buffers start on Eigen's vector alignment, so vectorized reductions sum in the
// same order whatever the heap layout.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

[[nodiscard]] std::size_t shape_size(const Shape& shape);
[[nodiscard]] std::string shape_to_string(const Shape& shape);

// Dense row-major array with an optional gradient buffer of the same shape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, const std::vector<T>& data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    if (data_.size() != shape_size(shape_)) {
      fail(ErrorKind::shape, "tensor data length does not match shape " + shape_to_string(shape_));
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<T> data() { return data_; }
  [[nodiscard]] std::span<const T> data() const { return data_; }
  [[nodiscard]] AlignedVector<T>& values() { return data_; }
  [[nodiscard]] const AlignedVector<T>& values() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] bool has_grad() const { return !grad_.empty(); }
  void ensure_grad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T{0});
  }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), T{0}); }
  void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }
  [[nodiscard]] std::span<T> grad() { return grad_; }
  [[nodiscard]] std::span<const T> grad() const { return grad_; }

  // Same data under a new shape of equal element count.
  void reshape(Shape shape) {
    if (shape_size(shape) != data_.size()) {
      fail(ErrorKind::shape, "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    shape_ = std::move(shape);
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  AlignedVector<T> data_;
  AlignedVector<T> grad_;
};

// Prepends a batch dimension.
[[nodiscard]] Shape batched(std::size_t batch, const Shape& sample);

}  // namespace fusionnet
