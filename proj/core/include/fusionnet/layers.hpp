#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fusionnet/tensor.hpp"

namespace fusionnet {

enum class LayerKind { conv2d, relu, maxpool2d, dropout, fully_connected, concat, view_maxpool };

[[nodiscard]] std::string_view to_string(LayerKind kind);
[[nodiscard]] LayerKind parse_layer_kind(std::string_view text);

// Declarative description of one layer. Only the fields relevant to `kind` are read.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;
  int filter_size = 1;
  int filter_count = 0;
  int stride = 1;
  int padding = 0;
  double dropout_rate = 0.0;
  int output_units = 0;
  // concat: each branch is a layer sequence applied to the same input; outputs
  // are stacked along the channel axis.
  std::vector<std::vector<LayerSpec>> branches;

  static LayerSpec conv(std::string name, int filters, int size, int stride = 1, int padding = 0);
  static LayerSpec relu(std::string name);
  static LayerSpec maxpool(std::string name, int size = 2, int stride = 2);
  static LayerSpec dropout(std::string name, double rate);
  static LayerSpec fully_connected(std::string name, int units);
  static LayerSpec concat(std::string name, std::vector<std::vector<LayerSpec>> branches);
  static LayerSpec view_maxpool(std::string name);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

void validate_layer_spec(const LayerSpec& spec);

// Per-sample shape inference (no batch dimension). Throws Error(shape) on
// incompatible input.
[[nodiscard]] Shape infer_output_shape(const LayerSpec& spec, const Shape& input);
[[nodiscard]] std::size_t parameter_count(const LayerSpec& spec, const Shape& input);

struct ForwardContext {
  bool training = false;
  // Views per object for view_maxpool; 0 makes view_maxpool a pass-through,
  // which is how every view is trained as an independent sample.
  std::size_t views_per_sample = 0;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;  // gradient lives in value.grad()
  bool frozen = false;
};

template <typename T>
class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(std::move(spec)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  [[nodiscard]] const LayerSpec& spec() const { return spec_; }

  // Input and output carry a leading batch dimension.
  virtual Tensor<T> forward(const Tensor<T>& input, const ForwardContext& ctx) = 0;

  // Accumulates parameter gradients (unless frozen) and returns the input
  // gradient when `need_input_grad` is set, otherwise an empty tensor.
  virtual Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  virtual void reseed(std::uint64_t /*seed*/) {}

  void set_frozen(bool frozen) {
    for (auto* p : parameters()) p->frozen = frozen;
  }

 private:
  LayerSpec spec_;
};

// Builds a layer for per-sample input shape `input`; weights are drawn from a
// centered Gaussian with std sqrt(2 / fan_in) seeded by (seed, parameter name),
// biases start at zero.
template <typename T>
[[nodiscard]] std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& input,
                                                   std::uint64_t seed);

}  // namespace fusionnet
