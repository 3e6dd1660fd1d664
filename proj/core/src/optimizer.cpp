#include "fusionnet/optimizer.hpp"

namespace fusionnet {

void validate_optimizer_config(const OptimizerConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) fail(ErrorKind::invalid_argument, "learning rate must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) fail(ErrorKind::invalid_argument, "momentum must lie in [0, 1)");
  if (!(cfg.weight_decay >= 0.0)) fail(ErrorKind::invalid_argument, "weight decay must be non-negative");
}

template <typename T>
void sgd_step(std::span<T> weights, std::span<const T> grads, std::span<T> velocity,
              const OptimizerConfig& cfg) {
  if (weights.size() != grads.size() || weights.size() != velocity.size()) {
    fail(ErrorKind::shape, "sgd_step: weights, gradients and velocity differ in length");
  }
  const T lr = static_cast<T>(cfg.learning_rate);
  const T mu = static_cast<T>(cfg.momentum);
  const T wd = static_cast<T>(cfg.weight_decay);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    velocity[i] = mu * velocity[i] - lr * (grads[i] + wd * weights[i]);
    weights[i] += velocity[i];
  }
}

template <typename T>
SgdOptimizer<T>::SgdOptimizer(OptimizerConfig cfg) : cfg_(cfg) {
  validate_optimizer_config(cfg_);
}

template <typename T>
void SgdOptimizer<T>::step(const std::vector<Parameter<T>*>& params) {
  for (auto* p : params) {
    if (p->frozen) continue;
    p->value.ensure_grad();
    auto& v = velocity_[p->name];
    if (v.size() != p->value.size()) v.assign(p->value.size(), T{0});
    sgd_step<T>(p->value.data(), p->value.grad(), v, cfg_);
  }
}

template <typename T>
std::vector<NamedTensor> SgdOptimizer<T>::export_state(const std::vector<Parameter<T>*>& params) const {
  std::vector<NamedTensor> out;
  for (auto* p : params) {
    auto it = velocity_.find(p->name);
    if (it == velocity_.end()) continue;
    NamedTensor t;
    t.name = p->name + ".momentum";
    t.shape = p->value.shape();
    t.values.assign(it->second.begin(), it->second.end());
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void SgdOptimizer<T>::import_state(const std::vector<NamedTensor>& state) {
  constexpr std::string_view suffix = ".momentum";
  for (const auto& t : state) {
    if (!t.name.ends_with(suffix)) continue;
    const std::string param = t.name.substr(0, t.name.size() - suffix.size());
    velocity_[param].assign(t.values.begin(), t.values.end());
  }
}

template void sgd_step<float>(std::span<float>, std::span<const float>, std::span<float>, const OptimizerConfig&);
template void sgd_step<double>(std::span<double>, std::span<const double>, std::span<double>, const OptimizerConfig&);
template class SgdOptimizer<float>;
template class SgdOptimizer<double>;

}  // namespace fusionnet
