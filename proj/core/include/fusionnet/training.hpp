#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fusionnet/caches.hpp"
#include "fusionnet/dataset.hpp"
#include "fusionnet/network.hpp"
#include "fusionnet/optimizer.hpp"
#include "fusionnet/tensor.hpp"

namespace fusionnet {

enum class Modality { voxels, views };

[[nodiscard]] std::string_view to_string(Modality m);

// Cached samples of one split held as bytes: voxel occupancy (0/1) or gray
// levels (0..255, replicated to three channels on the way into the network).
struct SampleSet {
  Modality modality = Modality::voxels;
  Shape stored_shape;  // per sample
  std::size_t views_per_model = 0;
  std::vector<std::string> model_ids;
  std::vector<int> labels;  // per model
  std::vector<std::uint8_t> data;

  [[nodiscard]] std::size_t model_count() const { return model_ids.size(); }
  [[nodiscard]] std::size_t sample_count() const { return model_ids.size() * views_per_model; }
  [[nodiscard]] std::size_t stored_size() const { return shape_size(stored_shape); }
  [[nodiscard]] Shape input_shape() const;

  // Writes sample `index` (model-major, view-minor) as network input values.
  template <typename T>
  void fill(std::size_t index, T* dst) const;
};

// Loads every model of `splits` from a prepared cache. With `with_jitter`, the
// jittered copies of each model are appended as extra models with the same label.
[[nodiscard]] SampleSet load_samples(const DatasetManifest& manifest, const std::vector<Split>& splits,
                                     Modality modality, const std::filesystem::path& cache_dir,
                                     bool with_jitter = false);

// Keeps the models whose label is in `keep` (indices into the old class list)
// and renumbers labels in the order given.
[[nodiscard]] SampleSet select_classes(const SampleSet& set, const std::vector<int>& keep);

struct TrainConfig {
  int epochs = 60;
  int batch_size = 64;
  double lr_decay = 0.1;
  int decay_every = 20;  // epochs; 0 disables decay
  OptimizerConfig optimizer;
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
};

void validate_train_config(const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;          // mean over the epoch's samples
  double train_metric = 0.0;  // average per-class accuracy of the epoch's predictions
  double wall_seconds = 0.0;
};

// Called after every epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochLog&, Network<float>&)>;

// Every view or orientation is an independent sample. Sample order comes from a
// per-epoch seeded shuffle, so runs are bit-reproducible.
std::vector<EpochLog> train(Network<float>& net, const SampleSet& samples, const TrainConfig& cfg,
                            const EpochCallback& on_epoch = {});

[[nodiscard]] std::string format_training_log(const std::vector<EpochLog>& log);

// Weights followed by "<param>.momentum" buffers.
void write_checkpoint(const std::filesystem::path& path, Network<float>& net, const SgdOptimizer<float>& opt);

}  // namespace fusionnet
