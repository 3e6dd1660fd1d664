#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fusionnet/layers.hpp"

namespace fusionnet {

// Float32 parameter snapshot, the unit of the weights file.
struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// A sequential layer stack with reverse-mode gradients.
template <typename T>
class Network {
 public:
  Network(std::string name, Shape input_shape, const std::vector<LayerSpec>& layers, std::uint64_t seed);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const Shape& input_shape() const { return input_shape_; }
  [[nodiscard]] std::size_t layer_count() const { return layers_.size(); }
  [[nodiscard]] Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  [[nodiscard]] const Shape& output_shape(std::size_t i) const { return shapes_.at(i + 1); }

  // Input is N x input_shape. Records what backward() needs.
  Tensor<T> forward(const Tensor<T>& input, const ForwardContext& ctx);

  // Accumulates gradients into every non-frozen parameter. Returns the input
  // gradient, or an empty tensor when frozen layers stop propagation or
  // `need_input_grad` is false.
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad = true);

  void zero_grad();
  [[nodiscard]] std::vector<Parameter<T>*> parameters();
  [[nodiscard]] std::size_t parameter_count() const;

  // Layers [0, index) keep their weights; 0 unfreezes everything.
  void set_freeze_below(std::size_t index);
  [[nodiscard]] std::size_t freeze_below() const { return freeze_below_; }

  void reseed_dropout(std::uint64_t seed);

  [[nodiscard]] std::vector<NamedTensor> export_weights();
  // Every parameter must be present with a matching shape; extra entries are
  // ignored. Mismatches name the offending parameter.
  void import_weights(const std::vector<NamedTensor>& weights);

 private:
  std::string name_;
  Shape input_shape_;
  std::vector<Shape> shapes_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::size_t freeze_below_ = 0;
  bool forward_recorded_ = false;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace fusionnet
