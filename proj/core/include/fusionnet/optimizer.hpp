#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fusionnet/layers.hpp"
#include "fusionnet/network.hpp"

namespace fusionnet {

struct OptimizerConfig {
  double learning_rate = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::uint64_t seed = 0;
};

void validate_optimizer_config(const OptimizerConfig& cfg);

// v <- momentum * v - lr * (g + weight_decay * w);  w <- w + v
template <typename T>
void sgd_step(std::span<T> weights, std::span<const T> grads, std::span<T> velocity,
              const OptimizerConfig& cfg);

// Owns one velocity buffer per parameter, keyed by parameter name. Frozen
// parameters are left untouched.
template <typename T>
class SgdOptimizer {
 public:
  explicit SgdOptimizer(OptimizerConfig cfg);

  void step(const std::vector<Parameter<T>*>& params);

  [[nodiscard]] const OptimizerConfig& config() const { return cfg_; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

  // Momentum buffers as "<param>.momentum" entries for checkpoints.
  [[nodiscard]] std::vector<NamedTensor> export_state(const std::vector<Parameter<T>*>& params) const;
  void import_state(const std::vector<NamedTensor>& state);

 private:
  OptimizerConfig cfg_;
  std::map<std::string, AlignedVector<T>> velocity_;
};

extern template class SgdOptimizer<float>;
extern template class SgdOptimizer<double>;

}  // namespace fusionnet
