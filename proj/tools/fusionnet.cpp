#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fusionnet/caches.hpp"
#include "fusionnet/dataset.hpp"
#include "fusionnet/error.hpp"
#include "fusionnet/evaluation.hpp"
#include "fusionnet/fusion.hpp"
#include "fusionnet/gradcheck.hpp"
#include "fusionnet/io_util.hpp"
#include "fusionnet/models.hpp"
#include "fusionnet/report.hpp"
#include "fusionnet/training.hpp"
#include "fusionnet/weights_io.hpp"

namespace fs = std::filesystem;
using namespace fusionnet;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 2,
  kInvalidArgument = 3,
  kParse = 4,
  kFormat = 5,
  kShape = 6,
  kIo = 7,
  kNotFound = 8,
  kState = 9,
  kCheckFailed = 10,
  kInternal = 70,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return kInvalidArgument;
    case ErrorKind::parse: return kParse;
    case ErrorKind::format: return kFormat;
    case ErrorKind::shape: return kShape;
    case ErrorKind::io: return kIo;
    case ErrorKind::not_found: return kNotFound;
    case ErrorKind::state: return kState;
  }
  return kInternal;
}

struct RunConfig {
  std::string data;
  std::string synthetic = "4x50";
  std::string manifest;
  int orientations = 60;
  int resolution = 30;
  int image_size = 64;
  int jitter_copies = 0;
  double jitter_sigma = 0.01;
  int epochs = 60;
  int batch_size = 64;
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double lr_decay = 0.1;
  int decay_every = 20;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "run";
  std::string network = "vcnn1";
  std::string finetune_from;
  int freeze_below = -1;
  std::vector<std::string> components;
  double grid_step = 0.05;
  bool softmax = false;
  int gradcheck_seeds = 20;
};

fs::path out_dir(const RunConfig& rc) { return rc.out; }

fs::path manifest_path(const RunConfig& rc) {
  return rc.manifest.empty() ? out_dir(rc) / "manifest.jsonl" : fs::path(rc.manifest);
}

fs::path cache_dir(const RunConfig& rc) {
  if (const char* env = std::getenv("FUSIONNET_CACHE"); env != nullptr && *env != '\0') return env;
  return out_dir(rc) / "cache";
}

Modality modality_of(const std::string& network) { return network == "mvnet" ? Modality::views : Modality::voxels; }

// The fusion validation models come out of the training split with a seed of their own.
DatasetManifest carved_manifest(const RunConfig& rc) {
  DatasetManifest m = load_manifest(manifest_path(rc));
  validate_manifest(m);
  return carve_validation(m, rc.val_fraction, derive_seed(rc.seed, "validation"));
}

void print_manifest_summary(const DatasetManifest& m) {
  std::size_t train = 0, test = 0;
  for (const auto& e : m.entries) (e.split == Split::test ? test : train)++;
  std::printf("%zu classes, %zu train, %zu test\n", m.classes.size(), train, test);
}

int cmd_synth(const RunConfig& rc) {
  const SyntheticSpec spec = parse_synthetic_spec(rc.synthetic);
  const DatasetManifest m = make_synthetic_dataset(spec.kinds, spec.per_class, rc.seed, out_dir(rc));
  print_manifest_summary(m);
  std::printf("manifest: %s\n", (out_dir(rc) / "manifest.jsonl").string().c_str());
  return kOk;
}

int cmd_ingest(const RunConfig& rc) {
  if (rc.data.empty()) fail(ErrorKind::invalid_argument, "ingest needs --data");
  DatasetManifest m = ingest_modelnet(rc.data);
  fs::create_directories(out_dir(rc));
  const fs::path root = fs::absolute(rc.data);
  const fs::path dest = fs::absolute(out_dir(rc));
  for (auto& e : m.entries) e.path = fs::relative(root / e.path, dest).generic_string();
  m.root = dest;
  write_file_atomic(manifest_path(rc), write_manifest_jsonl(m));
  print_manifest_summary(m);
  std::printf("manifest: %s\n", manifest_path(rc).string().c_str());
  return kOk;
}

int cmd_prep(const RunConfig& rc) {
  const DatasetManifest m = load_manifest(manifest_path(rc));
  CacheConfig cfg;
  cfg.orientations = rc.orientations;
  cfg.resolution = rc.resolution;
  cfg.image_size = rc.image_size;
  cfg.seed = rc.seed;
  cfg.jitter_copies = rc.jitter_copies;
  cfg.jitter_sigma = rc.jitter_sigma;
  cfg.jobs = rc.jobs;
  const CacheReport r = prepare_caches(m, cfg, cache_dir(rc));
  std::printf("cache %s: %zu written, %zu repaired, %zu kept\n", cache_dir(rc).string().c_str(), r.files_written,
              r.files_repaired, r.files_kept);
  for (const auto& f : r.failures) std::fprintf(stderr, "failed: %s: %s\n", f.model_id.c_str(), f.message.c_str());
  if (!r.failures.empty()) fail(ErrorKind::io, std::to_string(r.failures.size()) + " model(s) could not be cached");
  return kOk;
}

NetworkSpec network_spec(const RunConfig& rc, int class_count) {
  const CacheConfig cfg = load_cache_config(cache_dir(rc));
  return build_named(rc.network, class_count, cfg.resolution, cfg.image_size);
}

fs::path weights_path(const RunConfig& rc, const std::string& network) { return out_dir(rc) / (network + ".fnw"); }

int cmd_train(const RunConfig& rc) {
  const DatasetManifest m = carved_manifest(rc);
  const int k = static_cast<int>(m.classes.size());
  NetworkSpec spec = network_spec(rc, k);
  std::optional<std::vector<NamedTensor>> initial;
  if (!rc.finetune_from.empty()) {
    const auto source = read_weights(read_file(rc.finetune_from));
    const std::string head_bias = spec.layers[head_index(spec)].name + ".bias";
    auto it = std::find_if(source.begin(), source.end(), [&](const NamedTensor& t) { return t.name == head_bias; });
    if (it == source.end()) fail(ErrorKind::format, rc.finetune_from + " has no " + head_bias + " tensor");
    const NetworkSpec source_spec = network_spec(rc, static_cast<int>(it->values.size()));
    AdaptedNetwork adapted = adapt_head(source_spec, source, k, derive_seed(rc.seed, "adapt/" + rc.network));
    spec = adapted.spec;
    spec.freeze_below = rc.freeze_below >= 0 ? static_cast<std::size_t>(rc.freeze_below) : first_fc_index(spec);
    initial = std::move(adapted.weights);
  } else if (rc.freeze_below > 0) {
    fail(ErrorKind::invalid_argument, "--freeze-below only applies with --finetune-from");
  }

  const SampleSet samples =
      load_samples(m, {Split::train}, modality_of(rc.network), cache_dir(rc), rc.network == "vcnn1_jitter");
  Network<float> net = instantiate<float>(spec, derive_seed(rc.seed, "init/" + rc.network));
  if (initial) net.import_weights(*initial);

  TrainConfig cfg;
  cfg.epochs = rc.epochs;
  cfg.batch_size = rc.batch_size;
  cfg.lr_decay = rc.lr_decay;
  cfg.decay_every = rc.decay_every;
  cfg.optimizer.learning_rate = rc.lr;
  cfg.optimizer.momentum = rc.momentum;
  cfg.optimizer.weight_decay = rc.weight_decay;
  cfg.optimizer.seed = derive_seed(rc.seed, "train/" + rc.network);
  cfg.checkpoint_dir = out_dir(rc) / "checkpoints" / rc.network;
  std::printf("%s: %zu parameters, %zu samples\n", rc.network.c_str(), net.parameter_count(), samples.sample_count());
  const auto log = train(net, samples, cfg, [](const EpochLog& e, Network<float>&) {
    std::printf("epoch %d  loss %.6f  train %.4f  %.1fs\n", e.epoch, e.loss, e.train_metric, e.wall_seconds);
    std::fflush(stdout);
    return true;
  });
  const Bytes bytes = write_weights(net.export_weights());
  write_file_atomic(weights_path(rc, rc.network), std::span<const std::uint8_t>(bytes));
  write_file_atomic(out_dir(rc) / (rc.network + "_train.csv"), format_training_log(log));
  write_file_atomic(out_dir(rc) / (rc.network + ".arch"), write_spec_manifest(spec));
  return kOk;
}

int cmd_eval(const RunConfig& rc) {
  const DatasetManifest m = carved_manifest(rc);
  const int k = static_cast<int>(m.classes.size());
  const fs::path wpath = weights_path(rc, rc.network);
  if (!fs::is_regular_file(wpath)) fail(ErrorKind::not_found, "weights not found: " + wpath.string());
  const auto weights = read_weights(read_file(wpath));
  NetworkSpec spec = network_spec(rc, k);
  Network<float> net = instantiate<float>(spec, 0);
  net.import_weights(weights);

  const Modality mod = modality_of(rc.network);
  std::vector<int> trained;
  for (const auto& e : m.entries) {
    if (e.split == Split::train) trained.push_back(m.class_index(e.label));
  }
  for (Split split : {Split::val, Split::test}) {
    const SampleSet samples = load_samples(m, {split}, mod, cache_dir(rc));
    if (samples.model_count() == 0) continue;
    const Evaluation eval = evaluate(net, samples, m.classes, trained);
    const std::string tag(to_string(split));
    write_file_atomic(out_dir(rc) / ("scores_" + rc.network + "_" + tag + ".jsonl"), write_scores_jsonl(eval));
    if (split == Split::test) write_file_atomic(out_dir(rc) / ("eval_" + rc.network + ".json"), write_evaluation_json(eval));
    std::printf("%s %s: average per-class accuracy %.4f over %zu models\n", rc.network.c_str(), tag.c_str(), eval.metric,
                eval.labels.size());
  }
  return kOk;
}

struct ComponentScores {
  std::vector<ScoreSet> sets;
  std::map<std::string, int> labels;
};

ComponentScores load_component_scores(const RunConfig& rc, const std::vector<std::string>& names, const char* split) {
  ComponentScores out;
  for (const auto& name : names) {
    const fs::path p = out_dir(rc) / ("scores_" + name + "_" + split + ".jsonl");
    if (!fs::is_regular_file(p)) fail(ErrorKind::not_found, "scores not found: " + p.string());
    LabeledScores ls = parse_scores_jsonl(read_text_file(p));
    std::vector<std::size_t> order(ls.scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ls.scores[a].model_id < ls.scores[b].model_id; });
    ScoreSet sorted;
    for (auto i : order) {
      sorted.push_back(ls.scores[i]);
      out.labels[ls.scores[i].model_id] = ls.labels[i];
    }
    out.sets.push_back(std::move(sorted));
  }
  return out;
}

const std::vector<std::string> kNetworkOrder = {"vcnn1", "vcnn1_jitter", "vcnn2", "mvnet"};

std::vector<std::string> available_components(const RunConfig& rc) {
  if (!rc.components.empty()) return rc.components;
  std::vector<std::string> names;
  for (const auto& n : kNetworkOrder) {
    if (fs::is_regular_file(out_dir(rc) / ("scores_" + n + "_val.jsonl"))) names.push_back(n);
  }
  if (names.empty()) fail(ErrorKind::not_found, "no evaluated networks found in " + out_dir(rc).string());
  return names;
}

double fused_metric(const ComponentScores& cs, const FusionWeights& w, int k, bool softmax) {
  std::vector<int> truth;
  for (const auto& s : cs.sets.front()) truth.push_back(cs.labels.at(s.model_id));
  return average_per_class_accuracy(truth, fuse_scores(cs.sets, w, softmax), k);
}

int cmd_fuse(const RunConfig& rc) {
  const DatasetManifest m = carved_manifest(rc);
  const int k = static_cast<int>(m.classes.size());
  const auto names = available_components(rc);
  const ComponentScores val = load_component_scores(rc, names, "val");
  const ComponentScores test = load_component_scores(rc, names, "test");
  FusionOptions opt;
  opt.grid_step = rc.grid_step;
  opt.softmax = rc.softmax;

  FusionSummary s;
  s.weights = fit_fusion_weights(val.sets, val.labels, k, opt);
  s.weights.components = names;
  s.validation_metric = fused_metric(val, s.weights, k, rc.softmax);
  s.test_metric = fused_metric(test, s.weights, k, rc.softmax);
  const CacheConfig cfg = load_cache_config(cache_dir(rc));
  for (const auto& n : names) {
    s.views.push_back(modality_of(n) == Modality::views ? static_cast<std::size_t>(20)
                                                        : static_cast<std::size_t>(cfg.orientations));
  }
  write_file_atomic(out_dir(rc) / "fusion.json", write_fusion_summary(s));
  for (std::size_t i = 0; i < names.size(); ++i) std::printf("%-14s weight %.2f\n", names[i].c_str(), s.weights.weights[i]);
  std::printf("fused validation %.4f  test %.4f\n", s.validation_metric, s.test_metric);
  return kOk;
}

int cmd_gradcheck(const RunConfig& rc) {
  GradcheckOptions opt;
  opt.seed = rc.seed;
  opt.seeds = rc.gradcheck_seeds;
  const auto rows = run_gradcheck_suite(opt);
  std::fputs(format_gradcheck_table(rows).c_str(), stdout);
  const bool ok = std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.passed; });
  return ok ? kOk : kCheckFailed;
}

int cmd_report(const RunConfig& rc) {
  std::vector<Evaluation> evals;
  std::vector<std::string> names = kNetworkOrder;
  for (const auto& entry : fs::directory_iterator(out_dir(rc))) {
    const std::string f = entry.path().filename().string();
    if (f.starts_with("eval_") && f.ends_with(".json")) {
      const std::string n = f.substr(5, f.size() - 10);
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
  }
  std::sort(names.begin() + static_cast<long>(kNetworkOrder.size()), names.end());
  for (const auto& n : names) {
    const fs::path p = out_dir(rc) / ("eval_" + n + ".json");
    if (fs::is_regular_file(p)) evals.push_back(parse_evaluation_json(read_text_file(p)));
  }
  if (evals.empty()) fail(ErrorKind::not_found, "no evaluation outputs found in " + out_dir(rc).string());
  std::optional<FusionSummary> fusion;
  if (fs::is_regular_file(out_dir(rc) / "fusion.json")) {
    fusion = parse_fusion_summary(read_text_file(out_dir(rc) / "fusion.json"));
  }
  const std::string table = format_accuracy_table(accuracy_rows(evals, fusion));
  write_file_atomic(out_dir(rc) / "report.md", table);
  std::fputs(table.c_str(), stdout);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FusionNet: voxel and multi-view CNNs with score fusion for 3D shape classification"};
  app.set_config("--config", "", "Read flags from a key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;

  app.add_option("--data", rc.data, "ModelNet root (class/{train,test}/*.off)");
  app.add_option("--synthetic", rc.synthetic, "Synthetic dataset CLASSESxN, e.g. box,sphere,pyramid,cylinderx50")
      ->capture_default_str();
  app.add_option("--manifest", rc.manifest, "Manifest path (default <out>/manifest.jsonl)");
  app.add_option("--orientations", rc.orientations, "Voxel orientations per model")->capture_default_str();
  app.add_option("--resolution", rc.resolution, "Voxel grid resolution")->capture_default_str();
  app.add_option("--image-size", rc.image_size, "Rendered view size in pixels")->capture_default_str();
  app.add_option("--jitter-copies", rc.jitter_copies, "Jittered voxel copies per training model")->capture_default_str();
  app.add_option("--jitter-sigma", rc.jitter_sigma, "Vertex jitter standard deviation in model units")
      ->capture_default_str();
  app.add_option("--epochs", rc.epochs, "Training epochs")->capture_default_str();
  app.add_option("--batch-size", rc.batch_size, "Mini-batch size")->capture_default_str();
  app.add_option("--lr", rc.lr, "Learning rate")->capture_default_str();
  app.add_option("--momentum", rc.momentum, "SGD momentum")->capture_default_str();
  app.add_option("--weight-decay", rc.weight_decay, "L2 weight decay")->capture_default_str();
  app.add_option("--lr-decay", rc.lr_decay, "Learning-rate factor per decay step")->capture_default_str();
  app.add_option("--decay-every", rc.decay_every, "Epochs between learning-rate decays (0: never)")
      ->capture_default_str();
  app.add_option("--val-fraction", rc.val_fraction, "Training models held out for fusion validation")
      ->capture_default_str();
  app.add_option("--seed", rc.seed, "Global seed")->capture_default_str();
  app.add_option("--jobs", rc.jobs, "Worker threads for cache preparation")->capture_default_str();
  app.add_option("--out", rc.out, "Run directory")->capture_default_str();
  app.add_option("--network", rc.network, "vcnn1, vcnn1_jitter, vcnn2 or mvnet")->capture_default_str();
  app.add_option("--finetune-from", rc.finetune_from, "Weights to adapt to this dataset's classes");
  app.add_option("--freeze-below", rc.freeze_below, "Frozen layer count when fine-tuning (default: up to fc1)")
      ->capture_default_str();
  app.add_option("--components", rc.components, "Networks to fuse (default: every evaluated network)")
      ->delimiter(',');
  app.add_option("--grid-step", rc.grid_step, "Fusion simplex grid step")->capture_default_str();
  app.add_flag("--softmax", rc.softmax, "Fuse softmax probabilities instead of raw scores");
  app.add_option("--gradcheck-seeds", rc.gradcheck_seeds, "Random seeds per gradient-check case")
      ->capture_default_str();

  std::function<int(const RunConfig&)> action;
  auto sub = [&](const char* name, const char* help, int (*fn)(const RunConfig&)) {
    app.add_subcommand(name, help)->fallthrough()->callback([&action, fn] { action = fn; });
  };
  sub("synth", "Generate a synthetic dataset and its manifest", cmd_synth);
  sub("ingest", "Build a manifest from a ModelNet directory", cmd_ingest);
  sub("prep", "Voxelize and render every model into the cache", cmd_prep);
  sub("train", "Train one network on the training split", cmd_train);
  sub("eval", "Evaluate a trained network on the validation and test splits", cmd_eval);
  sub("fuse", "Fit fusion weights on validation scores and apply them to test", cmd_fuse);
  sub("gradcheck", "Run the finite-difference gradient suite", cmd_gradcheck);
  sub("report", "Print the accuracy table of the evaluated networks", cmd_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action(rc);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
}
