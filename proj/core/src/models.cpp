#include "fusionnet/models.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

NetworkSpec build_vcnn1(int class_count, const VolumetricOptions& opt) {
  const int f = opt.conv_filters;
  NetworkSpec spec;
  spec.name = "vcnn1";
  spec.class_count = class_count;
  // depth slices along the gravity axis act as input channels
  spec.input_shape = {static_cast<std::size_t>(opt.resolution), static_cast<std::size_t>(opt.resolution),
                      static_cast<std::size_t>(opt.resolution)};
  spec.layers = {
      LayerSpec::conv("conv1", f, 3),
      LayerSpec::relu("relu1"),
      LayerSpec::maxpool("pool1"),
      LayerSpec::conv("conv2", f, 3),
      LayerSpec::relu("relu2"),
      LayerSpec::conv("conv3", f, 3),
      LayerSpec::maxpool("pool3"),
      LayerSpec::dropout("drop3", 0.5),
      LayerSpec::fully_connected("fc1", opt.hidden_units),
      LayerSpec::view_maxpool("viewpool"),
      LayerSpec::fully_connected("fc2", class_count),
  };
  validate_spec(spec);
  return spec;
}

NetworkSpec build_vcnn2(int class_count, const VolumetricOptions& opt) {
  NetworkSpec spec;
  spec.name = "vcnn2";
  spec.class_count = class_count;
  spec.input_shape = {static_cast<std::size_t>(opt.resolution), static_cast<std::size_t>(opt.resolution),
                      static_cast<std::size_t>(opt.resolution)};
  spec.layers = {
      LayerSpec::concat("inception1", {{LayerSpec::conv("inception1.conv1x1", 20, 1)},
                                       {LayerSpec::conv("inception1.conv3x3", 20, 3, 1, 1)},
                                       {LayerSpec::conv("inception1.conv5x5", 20, 5, 1, 2)}}),
      LayerSpec::relu("relu1"),
      LayerSpec::dropout("drop1", 0.2),
      LayerSpec::concat("inception2", {{LayerSpec::conv("inception2.conv1x1", 30, 1)},
                                       {LayerSpec::conv("inception2.conv3x3", 30, 3, 1, 1)}}),
      LayerSpec::relu("relu2"),
      LayerSpec::dropout("drop2", 0.3),
      LayerSpec::conv("conv3", 30, 3, 1, 1),
      LayerSpec::relu("relu3"),
      LayerSpec::dropout("drop3", 0.5),
      LayerSpec::fully_connected("fc1", opt.hidden_units),
      LayerSpec::view_maxpool("viewpool"),
      LayerSpec::fully_connected("fc2", class_count),
  };
  validate_spec(spec);
  return spec;
}

NetworkSpec build_mvnet(int class_count, const MultiViewOptions& opt) {
  if (opt.image_size < 32 || opt.image_size % 8 != 0) {
    fail(ErrorKind::invalid_argument, "mvnet image size must be >= 32 and a multiple of 8");
  }
  NetworkSpec spec;
  spec.name = "mvnet";
  spec.class_count = class_count;
  spec.input_shape = {3, static_cast<std::size_t>(opt.image_size), static_cast<std::size_t>(opt.image_size)};
  spec.layers = {
      LayerSpec::conv("conv1", 16, 3, 1, 1),
      LayerSpec::relu("relu1"),
      LayerSpec::maxpool("pool1"),
      LayerSpec::conv("conv2", 32, 3, 1, 1),
      LayerSpec::relu("relu2"),
      LayerSpec::maxpool("pool2"),
      LayerSpec::conv("conv3", 32, 3, 1, 1),
      LayerSpec::relu("relu3"),
      LayerSpec::maxpool("pool3"),
      LayerSpec::fully_connected("fc1", opt.hidden_units),
      LayerSpec::relu("relu4"),
      LayerSpec::dropout("drop4", 0.5),
      LayerSpec::view_maxpool("viewpool"),
      LayerSpec::fully_connected("fc2", class_count),
  };
  validate_spec(spec);
  return spec;
}

NetworkSpec build_named(const std::string& name, int class_count, int resolution, int image_size) {
  VolumetricOptions vol;
  vol.resolution = resolution;
  if (name == "vcnn1") return build_vcnn1(class_count, vol);
  if (name == "vcnn1_jitter") {
    NetworkSpec spec = build_vcnn1(class_count, vol);
    spec.name = "vcnn1_jitter";
    return spec;
  }
  if (name == "vcnn2") return build_vcnn2(class_count, vol);
  if (name == "mvnet") {
    MultiViewOptions mv;
    mv.image_size = image_size;
    return build_mvnet(class_count, mv);
  }
  fail(ErrorKind::invalid_argument, "unknown network '" + name + "' (vcnn1, vcnn1_jitter, vcnn2, mvnet)");
}

void validate_spec(const NetworkSpec& spec) {
  if (spec.class_count < 1) fail(ErrorKind::invalid_argument, "class_count must be >= 1");
  if (spec.layers.empty()) fail(ErrorKind::invalid_argument, "network spec has no layers");
  std::set<std::string> names;
  Shape shape = spec.input_shape;
  for (const auto& layer : spec.layers) {
    if (!names.insert(layer.name).second) fail(ErrorKind::invalid_argument, "duplicate layer name '" + layer.name + "'");
    shape = infer_output_shape(layer, shape);
  }
  if (shape != Shape{static_cast<std::size_t>(spec.class_count)}) {
    fail(ErrorKind::shape, "network '" + spec.name + "' ends in " + shape_to_string(shape) +
                               ", expected " + std::to_string(spec.class_count) + " class scores");
  }
  if (spec.freeze_below > spec.layers.size()) fail(ErrorKind::invalid_argument, "freeze_below beyond layer count");
}

std::vector<LayerSummary> summarize(const NetworkSpec& spec) {
  std::vector<LayerSummary> rows;
  Shape shape = spec.input_shape;
  for (const auto& layer : spec.layers) {
    if (layer.kind == LayerKind::concat) {
      for (const auto& branch : layer.branches) {
        Shape b = shape;
        for (const auto& inner : branch) {
          const std::size_t params = parameter_count(inner, b);
          b = infer_output_shape(inner, b);
          rows.push_back({inner.name, inner.kind, b, params, true});
        }
      }
    }
    const std::size_t params = layer.kind == LayerKind::concat ? 0 : parameter_count(layer, shape);
    shape = infer_output_shape(layer, shape);
    rows.push_back({layer.name, layer.kind, shape, params, false});
  }
  return rows;
}

std::size_t total_parameters(const NetworkSpec& spec) {
  std::size_t total = 0;
  Shape shape = spec.input_shape;
  for (const auto& layer : spec.layers) {
    total += parameter_count(layer, shape);
    shape = infer_output_shape(layer, shape);
  }
  return total;
}

std::size_t first_fc_index(const NetworkSpec& spec) {
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::fully_connected) return i;
  }
  fail(ErrorKind::invalid_argument, "network has no fully connected layer");
}

std::size_t head_index(const NetworkSpec& spec) {
  for (std::size_t i = spec.layers.size(); i-- > 0;) {
    if (spec.layers[i].kind == LayerKind::fully_connected) return i;
  }
  fail(ErrorKind::invalid_argument, "network has no fully connected layer");
}

namespace {

void describe(std::ostringstream& out, const LayerSpec& l) {
  out << l.name << " " << to_string(l.kind);
  switch (l.kind) {
    case LayerKind::conv2d:
      out << " filters=" << l.filter_count << " size=" << l.filter_size << " stride=" << l.stride
          << " padding=" << l.padding;
      break;
    case LayerKind::maxpool2d:
      out << " size=" << l.filter_size << " stride=" << l.stride;
      break;
    case LayerKind::dropout:
      out << " rate=" << l.dropout_rate;
      break;
    case LayerKind::fully_connected:
      out << " units=" << l.output_units;
      break;
    default:
      break;
  }
}

}  // namespace

std::string write_spec_manifest(const NetworkSpec& spec) {
  std::ostringstream out;
  out << "network " << spec.name << "\n";
  out << "input " << shape_to_string(spec.input_shape) << "\n";
  out << "classes " << spec.class_count << "\n";
  out << "freeze_below " << spec.freeze_below << "\n";
  Shape shape = spec.input_shape;
  for (const auto& layer : spec.layers) {
    if (layer.kind == LayerKind::concat) {
      for (const auto& branch : layer.branches) {
        Shape b = shape;
        for (const auto& inner : branch) {
          out << "  branch ";
          describe(out, inner);
          const std::size_t params = parameter_count(inner, b);
          b = infer_output_shape(inner, b);
          out << " -> " << shape_to_string(b) << " params=" << params << "\n";
        }
      }
    }
    out << "layer ";
    describe(out, layer);
    const std::size_t params = parameter_count(layer, shape);
    shape = infer_output_shape(layer, shape);
    out << " -> " << shape_to_string(shape) << " params=" << params << "\n";
  }
  out << "total_params " << total_parameters(spec) << "\n";
  return out.str();
}

template <typename T>
Network<T> instantiate(const NetworkSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  Network<T> net(spec.name, spec.input_shape, spec.layers, seed);
  net.set_freeze_below(spec.freeze_below);
  return net;
}

template <typename T>
ClassScores forward_multiview(Network<T>& net, const std::vector<Tensor<T>>& views, const std::string& model_id) {
  if (views.empty()) fail(ErrorKind::invalid_argument, "forward_multiview needs at least one view");
  const Shape& sample = net.input_shape();
  const std::size_t per = shape_size(sample);
  Tensor<T> batch(batched(views.size(), sample));
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].shape() != sample) {
      fail(ErrorKind::shape, "view " + std::to_string(v) + " has shape " + shape_to_string(views[v].shape()) +
                                 ", network expects " + shape_to_string(sample));
    }
    std::copy(views[v].data().begin(), views[v].data().end(), batch.data().begin() + v * per);
  }
  ForwardContext ctx;
  ctx.training = false;
  ctx.views_per_sample = views.size();
  Tensor<T> out = net.forward(batch, ctx);
  if (out.rank() != 2 || out.dim(0) != 1) {
    fail(ErrorKind::shape, "network '" + net.name() + "' has no view_maxpool layer");
  }
  ClassScores scores;
  scores.model_id = model_id;
  scores.network = net.name();
  scores.scores.assign(out.data().begin(), out.data().end());
  return scores;
}

AdaptedNetwork adapt_head(const NetworkSpec& spec, const std::vector<NamedTensor>& weights, int new_class_count,
                          std::uint64_t seed) {
  // Loading into the source topology validates every parameter by name and shape.
  Network<float> source = instantiate<float>(spec, seed);
  source.import_weights(weights);

  AdaptedNetwork out;
  out.spec = spec;
  out.spec.class_count = new_class_count;
  const std::size_t head = head_index(spec);
  out.spec.layers[head].output_units = new_class_count;
  validate_spec(out.spec);

  Network<float> fresh = instantiate<float>(out.spec, derive_seed(seed, "adapt_head"));
  const std::string head_prefix = spec.layers[head].name + ".";
  auto kept = source.export_weights();
  for (auto& w : fresh.export_weights()) {
    if (w.name.starts_with(head_prefix)) {
      out.weights.push_back(std::move(w));
    } else {
      auto it = std::find_if(kept.begin(), kept.end(), [&](const NamedTensor& k) { return k.name == w.name; });
      out.weights.push_back(*it);
    }
  }
  return out;
}

template Network<float> instantiate<float>(const NetworkSpec&, std::uint64_t);
template Network<double> instantiate<double>(const NetworkSpec&, std::uint64_t);
template ClassScores forward_multiview<float>(Network<float>&, const std::vector<Tensor<float>>&, const std::string&);
template ClassScores forward_multiview<double>(Network<double>&, const std::vector<Tensor<double>>&, const std::string&);

}  // namespace fusionnet
