#include "fusionnet/network.hpp"

#include <algorithm>
#include <unordered_map>

namespace fusionnet {

template <typename T>
Network<T>::Network(std::string name, Shape input_shape, const std::vector<LayerSpec>& layers,
                    std::uint64_t seed)
    : name_(std::move(name)), input_shape_(std::move(input_shape)) {
  if (layers.empty()) fail(ErrorKind::invalid_argument, "network '" + name_ + "' has no layers");
  shapes_.push_back(input_shape_);
  for (const auto& spec : layers) {
    layers_.push_back(make_layer<T>(spec, shapes_.back(), seed));
    shapes_.push_back(infer_output_shape(spec, shapes_.back()));
  }
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input, const ForwardContext& ctx) {
  Tensor<T> x = input;
  for (auto& layer : layers_) x = layer->forward(x, ctx);
  forward_recorded_ = true;
  return x;
}

template <typename T>
Tensor<T> Network<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  if (!forward_recorded_) fail(ErrorKind::state, "backward called before forward");
  forward_recorded_ = false;
  Tensor<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i < freeze_below_) return {};
    const bool lower_needs_grad = i > freeze_below_ || (freeze_below_ == 0 && (i > 0 || need_input_grad));
    g = layers_[i]->backward(g, lower_needs_grad);
  }
  return g;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto* p : parameters()) {
    p->value.ensure_grad();
    p->value.zero_grad();
  }
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) {
    auto p = layer->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) n += fusionnet::parameter_count(layers_[i]->spec(), shapes_[i]);
  return n;
}

template <typename T>
void Network<T>::set_freeze_below(std::size_t index) {
  if (index > layers_.size()) fail(ErrorKind::invalid_argument, "freeze index beyond layer count");
  freeze_below_ = index;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->set_frozen(i < index);
}

template <typename T>
void Network<T>::reseed_dropout(std::uint64_t seed) {
  for (auto& layer : layers_) layer->reseed(seed);
}

template <typename T>
std::vector<NamedTensor> Network<T>::export_weights() {
  std::vector<NamedTensor> out;
  for (auto* p : parameters()) {
    NamedTensor t;
    t.name = p->name;
    t.shape = p->value.shape();
    t.values.reserve(p->value.size());
    for (T v : p->value.data()) t.values.push_back(static_cast<float>(v));
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void Network<T>::import_weights(const std::vector<NamedTensor>& weights) {
  std::unordered_map<std::string, const NamedTensor*> by_name;
  for (const auto& w : weights) by_name.emplace(w.name, &w);
  for (auto* p : parameters()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) fail(ErrorKind::shape, "weights missing parameter '" + p->name + "'");
    const NamedTensor& w = *it->second;
    if (w.shape != p->value.shape()) {
      fail(ErrorKind::shape, "parameter '" + p->name + "' has shape " + shape_to_string(w.shape) +
                                 ", network expects " + shape_to_string(p->value.shape()));
    }
    auto dst = p->value.data();
    std::transform(w.values.begin(), w.values.end(), dst.begin(), [](float v) { return static_cast<T>(v); });
  }
}

template class Network<float>;
template class Network<double>;

}  // namespace fusionnet
