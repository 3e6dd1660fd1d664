#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusionnet/layers.hpp"
#include "fusionnet/network.hpp"

namespace fusionnet {

struct NetworkSpec {
  std::string name;
  Shape input_shape;
  std::vector<LayerSpec> layers;
  int class_count = 0;
  std::size_t freeze_below = 0;  // 0: nothing frozen

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ClassScores {
  std::string model_id;
  std::string network;
  std::vector<double> scores;
};

// Width knobs exist so gradient checks can run on a narrow copy of the same topology.
struct VolumetricOptions {
  int resolution = 30;
  int conv_filters = 64;
  int hidden_units = 2048;
};

struct MultiViewOptions {
  int image_size = 64;
  int hidden_units = 512;
};

[[nodiscard]] NetworkSpec build_vcnn1(int class_count, const VolumetricOptions& opt = {});
[[nodiscard]] NetworkSpec build_vcnn2(int class_count, const VolumetricOptions& opt = {});
[[nodiscard]] NetworkSpec build_mvnet(int class_count, const MultiViewOptions& opt = {});

// Resolves "vcnn1", "vcnn1_jitter", "vcnn2", "mvnet".
[[nodiscard]] NetworkSpec build_named(const std::string& name, int class_count, int resolution, int image_size);

void validate_spec(const NetworkSpec& spec);

// One row per layer in table order; concat branches are listed before their concat row.
struct LayerSummary {
  std::string name;
  LayerKind kind;
  Shape output_shape;
  std::size_t parameter_count = 0;
  bool in_branch = false;
};

[[nodiscard]] std::vector<LayerSummary> summarize(const NetworkSpec& spec);
[[nodiscard]] std::size_t total_parameters(const NetworkSpec& spec);

// Index of the first fully_connected layer, the default fine-tuning boundary.
[[nodiscard]] std::size_t first_fc_index(const NetworkSpec& spec);
[[nodiscard]] std::size_t head_index(const NetworkSpec& spec);

// Human-readable architecture listing, one layer per line.
[[nodiscard]] std::string write_spec_manifest(const NetworkSpec& spec);

template <typename T>
[[nodiscard]] Network<T> instantiate(const NetworkSpec& spec, std::uint64_t seed);

// Passes every view through the trunk, max-pools per neuron across views at the
// view_maxpool layer and returns the head's scores. Dropout is off.
template <typename T>
[[nodiscard]] ClassScores forward_multiview(Network<T>& net, const std::vector<Tensor<T>>& views,
                                            const std::string& model_id = {});

struct AdaptedNetwork {
  NetworkSpec spec;
  std::vector<NamedTensor> weights;
};

// Keeps every layer below the final fully_connected layer and reinitializes the
// head for `new_class_count` classes.
[[nodiscard]] AdaptedNetwork adapt_head(const NetworkSpec& spec, const std::vector<NamedTensor>& weights,
                                        int new_class_count, std::uint64_t seed);

}  // namespace fusionnet
