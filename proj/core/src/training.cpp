#include "fusionnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "fusionnet/error.hpp"
#include "fusionnet/evaluation.hpp"
#include "fusionnet/io_util.hpp"
#include "fusionnet/loss.hpp"
#include "fusionnet/renderer.hpp"
#include "fusionnet/voxelizer.hpp"
#include "fusionnet/weights_io.hpp"

namespace fusionnet {

namespace fs = std::filesystem;

std::string_view to_string(Modality m) { return m == Modality::voxels ? "voxels" : "views"; }

Shape SampleSet::input_shape() const {
  if (modality == Modality::views) return {3, stored_shape.at(0), stored_shape.at(1)};
  return stored_shape;
}

template <typename T>
void SampleSet::fill(std::size_t index, T* dst) const {
  const std::size_t n = stored_size();
  const std::uint8_t* src = data.data() + index * n;
  if (modality == Modality::voxels) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<T>(src[i]);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<T>(src[i]) / T{255};
  std::copy(dst, dst + n, dst + n);
  std::copy(dst, dst + n, dst + 2 * n);
}

template void SampleSet::fill<float>(std::size_t, float*) const;
template void SampleSet::fill<double>(std::size_t, double*) const;

namespace {

void append_voxels(SampleSet& set, const fs::path& cache_dir, const std::string& file) {
  const VoxelGrid grid = read_voxel_cache(read_file(cache_dir / file));
  if (grid.size() != set.stored_size()) {
    fail(ErrorKind::shape, file + " has " + std::to_string(grid.size()) + " voxels, expected " +
                               std::to_string(set.stored_size()));
  }
  set.data.insert(set.data.end(), grid.bits.begin(), grid.bits.end());
}

void append_view(SampleSet& set, const fs::path& cache_dir, const std::string& file, int view) {
  const ViewImage img = read_pgm(read_file(cache_dir / file), view);
  if (img.pixels.size() != set.stored_size()) fail(ErrorKind::shape, file + " has the wrong image size");
  for (float p : img.pixels) set.data.push_back(quantize_intensity(p));
}

}  // namespace

SampleSet load_samples(const DatasetManifest& manifest, const std::vector<Split>& splits, Modality modality,
                       const fs::path& cache_dir, bool with_jitter) {
  const CacheConfig cfg = load_cache_config(cache_dir);
  SampleSet set;
  set.modality = modality;
  const auto r = static_cast<std::size_t>(cfg.resolution);
  const auto s = static_cast<std::size_t>(cfg.image_size);
  set.stored_shape = modality == Modality::voxels ? Shape{r, r, r} : Shape{s, s};
  set.views_per_model = modality == Modality::voxels ? static_cast<std::size_t>(cfg.orientations) : kViewCount;
  if (with_jitter && modality != Modality::voxels) fail(ErrorKind::invalid_argument, "jitter copies exist only for voxels");
  if (with_jitter && cfg.jitter_copies == 0) fail(ErrorKind::invalid_argument, "cache was prepared without jitter copies");

  for (const auto& e : manifest.entries) {
    if (std::find(splits.begin(), splits.end(), e.split) == splits.end()) continue;
    const int label = manifest.class_index(e.label);
    if (modality == Modality::views) {
      for (int v = 0; v < kViewCount; ++v) append_view(set, cache_dir, view_file(e.model_id, v), v);
    } else {
      for (int k = 0; k < cfg.orientations; ++k) append_voxels(set, cache_dir, voxel_file(e.model_id, k));
    }
    set.model_ids.push_back(e.model_id);
    set.labels.push_back(label);
    if (with_jitter && e.split != Split::test) {
      for (int c = 0; c < cfg.jitter_copies; ++c) {
        for (int k = 0; k < cfg.orientations; ++k) append_voxels(set, cache_dir, jitter_voxel_file(e.model_id, c, k));
        set.model_ids.push_back(e.model_id + "#j" + std::to_string(c));
        set.labels.push_back(label);
      }
    }
  }
  return set;
}

SampleSet select_classes(const SampleSet& set, const std::vector<int>& keep) {
  SampleSet out = set;
  out.model_ids.clear();
  out.labels.clear();
  out.data.clear();
  const std::size_t block = set.views_per_model * set.stored_size();
  for (std::size_t m = 0; m < set.model_count(); ++m) {
    auto it = std::find(keep.begin(), keep.end(), set.labels[m]);
    if (it == keep.end()) continue;
    out.model_ids.push_back(set.model_ids[m]);
    out.labels.push_back(static_cast<int>(it - keep.begin()));
    out.data.insert(out.data.end(), set.data.begin() + m * block, set.data.begin() + (m + 1) * block);
  }
  return out;
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) fail(ErrorKind::invalid_argument, "epochs must be >= 1");
  if (cfg.batch_size < 1) fail(ErrorKind::invalid_argument, "batch size must be >= 1");
  if (cfg.decay_every < 0) fail(ErrorKind::invalid_argument, "decay interval must be >= 0");
  if (!(cfg.lr_decay > 0.0)) fail(ErrorKind::invalid_argument, "learning-rate decay factor must be > 0");
  validate_optimizer_config(cfg.optimizer);
}

void write_checkpoint(const fs::path& path, Network<float>& net, const SgdOptimizer<float>& opt) {
  auto tensors = net.export_weights();
  auto state = opt.export_state(net.parameters());
  tensors.insert(tensors.end(), std::make_move_iterator(state.begin()), std::make_move_iterator(state.end()));
  const Bytes bytes = write_weights(tensors);
  write_file_atomic(path, std::span<const std::uint8_t>(bytes));
}

std::vector<EpochLog> train(Network<float>& net, const SampleSet& samples, const TrainConfig& cfg,
                            const EpochCallback& on_epoch) {
  validate_train_config(cfg);
  if (samples.input_shape() != net.input_shape()) {
    fail(ErrorKind::shape, "cached samples have shape " + shape_to_string(samples.input_shape()) + ", network '" +
                               net.name() + "' expects " + shape_to_string(net.input_shape()));
  }
  if (samples.sample_count() == 0) fail(ErrorKind::invalid_argument, "no training samples");
  const int class_count = static_cast<int>(net.output_shape(net.layer_count() - 1).back());
  for (int label : samples.labels) {
    if (label < 0 || label >= class_count) fail(ErrorKind::shape, "label out of range for the network head");
  }
  if (!cfg.checkpoint_dir.empty()) fs::create_directories(cfg.checkpoint_dir);

  SgdOptimizer<float> opt(cfg.optimizer);
  const std::size_t input_size = shape_size(samples.input_shape());
  std::vector<std::size_t> order(samples.sample_count());
  std::vector<EpochLog> log;
  ForwardContext ctx;
  ctx.training = true;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const int decays = cfg.decay_every > 0 ? (epoch - 1) / cfg.decay_every : 0;
    opt.set_learning_rate(cfg.optimizer.learning_rate * std::pow(cfg.lr_decay, decays));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg.optimizer.seed, "shuffle/" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::vector<int> labels, predictions;
    labels.reserve(order.size());
    predictions.reserve(order.size());
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t n = std::min<std::size_t>(cfg.batch_size, order.size() - begin);
      Tensor<float> batch(batched(n, samples.input_shape()));
      std::vector<int> batch_labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = order[begin + i];
        samples.fill(idx, batch.data().data() + i * input_size);
        batch_labels[i] = samples.labels[idx / samples.views_per_model];
      }
      net.zero_grad();
      const Tensor<float> scores = net.forward(batch, ctx);
      const auto result = softmax_loss(scores, std::span<const int>(batch_labels));
      net.backward(result.grad, false);
      opt.step(net.parameters());

      loss_sum += static_cast<double>(result.loss) * static_cast<double>(n);
      const std::size_t k = scores.dim(1);
      for (std::size_t i = 0; i < n; ++i) {
        const float* row = scores.data().data() + i * k;
        predictions.push_back(static_cast<int>(std::max_element(row, row + k) - row));
        labels.push_back(batch_labels[i]);
      }
    }
    if (!std::isfinite(loss_sum)) fail(ErrorKind::state, "training diverged: loss is not finite");

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(order.size());
    entry.train_metric = average_per_class_accuracy(labels, predictions, class_count);
    entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.push_back(entry);
    if (!cfg.checkpoint_dir.empty()) {
      write_checkpoint(cfg.checkpoint_dir / (net.name() + "_epoch" + std::to_string(epoch) + ".fnw"), net, opt);
    }
    if (on_epoch && !on_epoch(entry, net)) break;
  }
  return log;
}

std::string format_training_log(const std::vector<EpochLog>& log) {
  std::string out = "epoch,loss,train_metric,wall_seconds\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + format_real(e.loss) + "," + format_real(e.train_metric) + "," +
           format_real(e.wall_seconds, 6) + "\n";
  }
  return out;
}

}  // namespace fusionnet
