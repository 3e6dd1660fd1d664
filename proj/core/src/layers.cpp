#include "fusionnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "fusionnet/io_util.hpp"

namespace fusionnet {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::dropout: return "dropout";
    case LayerKind::fully_connected: return "fully_connected";
    case LayerKind::concat: return "concat";
    case LayerKind::view_maxpool: return "view_maxpool";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view text) {
  for (auto k : {LayerKind::conv2d, LayerKind::relu, LayerKind::maxpool2d, LayerKind::dropout,
                 LayerKind::fully_connected, LayerKind::concat, LayerKind::view_maxpool}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorKind::parse, "unknown layer kind '" + std::string(text) + "'");
}

LayerSpec LayerSpec::conv(std::string name, int filters, int size, int stride, int padding) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.name = std::move(name);
  s.filter_count = filters;
  s.filter_size = size;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::relu(std::string name) {
  LayerSpec s;
  s.kind = LayerKind::relu;
  s.name = std::move(name);
  return s;
}

LayerSpec LayerSpec::maxpool(std::string name, int size, int stride) {
  LayerSpec s;
  s.kind = LayerKind::maxpool2d;
  s.name = std::move(name);
  s.filter_size = size;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::dropout(std::string name, double rate) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.name = std::move(name);
  s.dropout_rate = rate;
  return s;
}

LayerSpec LayerSpec::fully_connected(std::string name, int units) {
  LayerSpec s;
  s.kind = LayerKind::fully_connected;
  s.name = std::move(name);
  s.output_units = units;
  return s;
}

LayerSpec LayerSpec::concat(std::string name, std::vector<std::vector<LayerSpec>> branches) {
  LayerSpec s;
  s.kind = LayerKind::concat;
  s.name = std::move(name);
  s.branches = std::move(branches);
  return s;
}

LayerSpec LayerSpec::view_maxpool(std::string name) {
  LayerSpec s;
  s.kind = LayerKind::view_maxpool;
  s.name = std::move(name);
  return s;
}

void validate_layer_spec(const LayerSpec& spec) {
  const std::string who = "layer '" + spec.name + "': ";
  if (spec.filter_size < 1) fail(ErrorKind::invalid_argument, who + "filter_size must be >= 1");
  if (spec.stride < 1) fail(ErrorKind::invalid_argument, who + "stride must be >= 1");
  if (spec.padding < 0) fail(ErrorKind::invalid_argument, who + "padding must be >= 0");
  if (!(spec.dropout_rate >= 0.0 && spec.dropout_rate < 1.0)) {
    fail(ErrorKind::invalid_argument, who + "dropout rate must lie in [0, 1)");
  }
  if (spec.kind == LayerKind::conv2d && spec.filter_count < 1) {
    fail(ErrorKind::invalid_argument, who + "filter_count must be >= 1");
  }
  if (spec.kind == LayerKind::fully_connected && spec.output_units < 1) {
    fail(ErrorKind::invalid_argument, who + "output_units must be >= 1");
  }
  if (spec.kind == LayerKind::concat) {
    if (spec.branches.empty()) fail(ErrorKind::invalid_argument, who + "concat needs branches");
    for (const auto& branch : spec.branches) {
      if (branch.empty()) fail(ErrorKind::invalid_argument, who + "empty concat branch");
      for (const auto& inner : branch) validate_layer_spec(inner);
    }
  }
}

namespace {

void require_rank3(const LayerSpec& spec, const Shape& input) {
  if (input.size() != 3) {
    fail(ErrorKind::shape, "layer '" + spec.name + "' expects CxHxW input, got " + shape_to_string(input));
  }
}

Shape branch_output(const std::vector<LayerSpec>& branch, Shape shape) {
  for (const auto& l : branch) shape = infer_output_shape(l, shape);
  return shape;
}

}  // namespace

Shape infer_output_shape(const LayerSpec& spec, const Shape& input) {
  validate_layer_spec(spec);
  switch (spec.kind) {
    case LayerKind::conv2d: {
      require_rank3(spec, input);
      const auto k = static_cast<std::size_t>(spec.filter_size);
      const auto s = static_cast<std::size_t>(spec.stride);
      const auto p = static_cast<std::size_t>(spec.padding);
      Shape out{static_cast<std::size_t>(spec.filter_count), 0, 0};
      for (int axis = 1; axis <= 2; ++axis) {
        const std::size_t padded = input[axis] + 2 * p;
        if (padded < k || (padded - k) % s != 0) {
          fail(ErrorKind::shape, "layer '" + spec.name + "': non-integral output size for input " +
                                     shape_to_string(input));
        }
        out[axis] = (padded - k) / s + 1;
      }
      return out;
    }
    case LayerKind::maxpool2d: {
      require_rank3(spec, input);
      const auto k = static_cast<std::size_t>(spec.filter_size);
      const auto s = static_cast<std::size_t>(spec.stride);
      if (input[1] < k || input[2] < k) fail(ErrorKind::shape, "layer '" + spec.name + "': input smaller than window");
      return {input[0], (input[1] - k) / s + 1, (input[2] - k) / s + 1};
    }
    case LayerKind::relu:
    case LayerKind::dropout:
    case LayerKind::view_maxpool:
      return input;
    case LayerKind::fully_connected:
      if (input.empty()) fail(ErrorKind::shape, "layer '" + spec.name + "': empty input shape");
      return {static_cast<std::size_t>(spec.output_units)};
    case LayerKind::concat: {
      require_rank3(spec, input);
      Shape out;
      for (const auto& branch : spec.branches) {
        const Shape b = branch_output(branch, input);
        if (b.size() != 3) fail(ErrorKind::shape, "layer '" + spec.name + "': branch output must be CxHxW");
        if (out.empty()) {
          out = b;
        } else {
          if (b[1] != out[1] || b[2] != out[2]) {
            fail(ErrorKind::shape, "layer '" + spec.name + "': branch spatial sizes differ");
          }
          out[0] += b[0];
        }
      }
      return out;
    }
  }
  fail(ErrorKind::invalid_argument, "unknown layer kind");
}

std::size_t parameter_count(const LayerSpec& spec, const Shape& input) {
  switch (spec.kind) {
    case LayerKind::conv2d: {
      (void)infer_output_shape(spec, input);
      const auto k = static_cast<std::size_t>(spec.filter_size);
      return static_cast<std::size_t>(spec.filter_count) * (input[0] * k * k + 1);
    }
    case LayerKind::fully_connected:
      return shape_size(input) * static_cast<std::size_t>(spec.output_units) +
             static_cast<std::size_t>(spec.output_units);
    case LayerKind::concat: {
      std::size_t total = 0;
      for (const auto& branch : spec.branches) {
        Shape shape = input;
        for (const auto& l : branch) {
          total += parameter_count(l, shape);
          shape = infer_output_shape(l, shape);
        }
      }
      return total;
    }
    default:
      return 0;
  }
}

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<MatRM<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const MatRM<T>>;
template <typename T>
using MapVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

void check_input(const LayerSpec& spec, const Shape& expected, const Shape& actual) {
  if (actual.size() != expected.size() + 1 ||
      !std::equal(expected.begin(), expected.end(), actual.begin() + 1)) {
    fail(ErrorKind::shape, "layer '" + spec.name + "' expects Nx" + shape_to_string(expected) +
                               ", got " + shape_to_string(actual));
  }
}

template <typename T>
void init_gaussian(Tensor<T>& t, std::size_t fan_in, std::uint64_t seed, const std::string& name) {
  std::mt19937_64 rng(derive_seed(seed, name));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(const LayerSpec& spec, const Shape& input, std::uint64_t seed)
      : Layer<T>(spec), in_shape_(input), out_shape_(infer_output_shape(spec, input)) {
    k_ = static_cast<std::size_t>(spec.filter_size);
    stride_ = static_cast<std::size_t>(spec.stride);
    pad_ = static_cast<std::size_t>(spec.padding);
    const std::size_t f = out_shape_[0];
    weight_.name = spec.name + ".weight";
    weight_.value = Tensor<T>({f, in_shape_[0], k_, k_});
    init_gaussian(weight_.value, in_shape_[0] * k_ * k_, seed, weight_.name);
    bias_.name = spec.name + ".bias";
    bias_.value = Tensor<T>({f});
  }

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext&) override {
    check_input(this->spec(), in_shape_, input.shape());
    batch_ = input.dim(0);
    im2col(input);
    const std::size_t f = out_shape_[0];
    const std::size_t plane = out_shape_[1] * out_shape_[2];
    const std::size_t ckk = in_shape_[0] * k_ * k_;
    const std::size_t cols = batch_ * plane;
    ConstMapMat<T> w(weight_.value.data().data(), f, ckk);
    ConstMapMat<T> col(col_.data(), ckk, cols);
    out_mat_.resize(f * cols);
    MapMat<T> out(out_mat_.data(), f, cols);
    out.noalias() = w * col;

    Tensor<T> result(batched(batch_, out_shape_));
    T* dst = result.data().data();
    const T* bias = bias_.value.data().data();
    for (std::size_t n = 0; n < batch_; ++n) {
      for (std::size_t j = 0; j < f; ++j) {
        const T* src = out_mat_.data() + j * cols + n * plane;
        T* d = dst + (n * f + j) * plane;
        for (std::size_t q = 0; q < plane; ++q) d[q] = src[q] + bias[j];
      }
    }
    return result;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    const std::size_t f = out_shape_[0];
    const std::size_t plane = out_shape_[1] * out_shape_[2];
    const std::size_t ckk = in_shape_[0] * k_ * k_;
    const std::size_t cols = batch_ * plane;
    if (grad_output.size() != batch_ * f * plane) {
      fail(ErrorKind::shape, "layer '" + this->spec().name + "': gradient shape mismatch");
    }
    // gather to F x (N * plane)
    out_mat_.resize(f * cols);
    const T* g = grad_output.data().data();
    for (std::size_t n = 0; n < batch_; ++n) {
      for (std::size_t j = 0; j < f; ++j) {
        std::copy_n(g + (n * f + j) * plane, plane, out_mat_.data() + j * cols + n * plane);
      }
    }
    ConstMapMat<T> gmat(out_mat_.data(), f, cols);
    ConstMapMat<T> col(col_.data(), ckk, cols);
    if (!weight_.frozen) {
      weight_.value.ensure_grad();
      bias_.value.ensure_grad();
      MapMat<T> dw(weight_.value.grad().data(), f, ckk);
      dw.noalias() += gmat * col.transpose();
      MapVec<T> db(bias_.value.grad().data(), static_cast<Eigen::Index>(f));
      db += gmat.rowwise().sum();
    }
    if (!need_input_grad) return {};
    ConstMapMat<T> w(weight_.value.data().data(), f, ckk);
    dcol_.resize(ckk * cols);
    MapMat<T> dcol(dcol_.data(), ckk, cols);
    dcol.noalias() = w.transpose() * gmat;
    return col2im();
  }

  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }

 private:
  void im2col(const Tensor<T>& input) {
    const std::size_t c_in = in_shape_[0], h = in_shape_[1], w = in_shape_[2];
    const std::size_t oh = out_shape_[1], ow = out_shape_[2];
    const std::size_t plane = oh * ow;
    const std::size_t cols = batch_ * plane;
    col_.assign(c_in * k_ * k_ * cols, T{0});
    const T* src = input.data().data();
    for (std::size_t c = 0; c < c_in; ++c) {
      for (std::size_t ki = 0; ki < k_; ++ki) {
        for (std::size_t kj = 0; kj < k_; ++kj) {
          T* row = col_.data() + ((c * k_ + ki) * k_ + kj) * cols;
          for (std::size_t n = 0; n < batch_; ++n) {
            const T* img = src + (n * c_in + c) * h * w;
            T* dst = row + n * plane;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ki) - static_cast<std::ptrdiff_t>(pad_);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              const T* line = img + static_cast<std::size_t>(iy) * w;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kj) - static_cast<std::ptrdiff_t>(pad_);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                dst[oy * ow + ox] = line[ix];
              }
            }
          }
        }
      }
    }
  }

  Tensor<T> col2im() const {
    const std::size_t c_in = in_shape_[0], h = in_shape_[1], w = in_shape_[2];
    const std::size_t oh = out_shape_[1], ow = out_shape_[2];
    const std::size_t plane = oh * ow;
    const std::size_t cols = batch_ * plane;
    Tensor<T> grad(batched(batch_, in_shape_));
    T* dst = grad.data().data();
    for (std::size_t c = 0; c < c_in; ++c) {
      for (std::size_t ki = 0; ki < k_; ++ki) {
        for (std::size_t kj = 0; kj < k_; ++kj) {
          const T* row = dcol_.data() + ((c * k_ + ki) * k_ + kj) * cols;
          for (std::size_t n = 0; n < batch_; ++n) {
            T* img = dst + (n * c_in + c) * h * w;
            const T* src = row + n * plane;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ki) - static_cast<std::ptrdiff_t>(pad_);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              T* line = img + static_cast<std::size_t>(iy) * w;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kj) - static_cast<std::ptrdiff_t>(pad_);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                line[ix] += src[oy * ow + ox];
              }
            }
          }
        }
      }
    }
    return grad;
  }

  Shape in_shape_, out_shape_;
  std::size_t k_ = 1, stride_ = 1, pad_ = 0, batch_ = 0;
  Parameter<T> weight_, bias_;
  AlignedVector<T> col_, dcol_, out_mat_;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  Relu(const LayerSpec& spec, const Shape& input) : Layer<T>(spec), in_shape_(input) {}

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext&) override {
    check_input(this->spec(), in_shape_, input.shape());
    Tensor<T> out = input;
    positive_.resize(input.size());
    auto d = out.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      positive_[i] = d[i] > T{0};
      if (!positive_[i]) d[i] = T{0};
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    if (!need_input_grad) return {};
    Tensor<T> g = grad_output;
    auto d = g.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!positive_[i]) d[i] = T{0};
    }
    return g;
  }

 private:
  Shape in_shape_;
  std::vector<bool> positive_;
};

template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  MaxPool2d(const LayerSpec& spec, const Shape& input)
      : Layer<T>(spec), in_shape_(input), out_shape_(infer_output_shape(spec, input)) {}

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext&) override {
    check_input(this->spec(), in_shape_, input.shape());
    const std::size_t n_batch = input.dim(0);
    const std::size_t c = in_shape_[0], h = in_shape_[1], w = in_shape_[2];
    const std::size_t oh = out_shape_[1], ow = out_shape_[2];
    const auto k = static_cast<std::size_t>(this->spec().filter_size);
    const auto s = static_cast<std::size_t>(this->spec().stride);
    Tensor<T> out(batched(n_batch, out_shape_));
    argmax_.resize(out.size());
    batch_ = n_batch;
    const T* src = input.data().data();
    T* dst = out.data().data();
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < n_batch * c; ++plane) {
      const std::size_t base = plane * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
          std::size_t best = base + (oy * s) * w + ox * s;
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::size_t idx = base + (oy * s + ky) * w + ox * s + kx;
              if (src[idx] > src[best]) best = idx;
            }
          }
          argmax_[o] = best;
          dst[o] = src[best];
        }
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    if (!need_input_grad) return {};
    Tensor<T> g(batched(batch_, in_shape_));
    auto dst = g.data();
    auto src = grad_output.data();
    for (std::size_t o = 0; o < src.size(); ++o) dst[argmax_[o]] += src[o];
    return g;
  }

 private:
  Shape in_shape_, out_shape_;
  std::size_t batch_ = 0;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(const LayerSpec& spec, const Shape& input, std::uint64_t seed)
      : Layer<T>(spec), in_shape_(input), rng_(derive_seed(seed, spec.name + ".mask")) {}

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext& ctx) override {
    check_input(this->spec(), in_shape_, input.shape());
    const double p = this->spec().dropout_rate;
    active_ = ctx.training && p > 0.0;
    if (!active_) return input;
    Tensor<T> out = input;
    mask_.resize(input.size());
    std::bernoulli_distribution keep(1.0 - p);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    auto d = out.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      mask_[i] = keep(rng_) ? scale : T{0};
      d[i] *= mask_[i];
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    if (!need_input_grad) return {};
    if (!active_) return grad_output;
    Tensor<T> g = grad_output;
    auto d = g.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= mask_[i];
    return g;
  }

  void reseed(std::uint64_t seed) override { rng_.seed(derive_seed(seed, this->spec().name + ".mask")); }

 private:
  Shape in_shape_;
  std::mt19937_64 rng_;
  bool active_ = false;
  AlignedVector<T> mask_;
};

template <typename T>
class FullyConnected final : public Layer<T> {
 public:
  FullyConnected(const LayerSpec& spec, const Shape& input, std::uint64_t seed)
      : Layer<T>(spec), in_shape_(input), in_size_(shape_size(input)),
        out_size_(static_cast<std::size_t>(spec.output_units)) {
    weight_.name = spec.name + ".weight";
    weight_.value = Tensor<T>({out_size_, in_size_});
    init_gaussian(weight_.value, in_size_, seed, weight_.name);
    bias_.name = spec.name + ".bias";
    bias_.value = Tensor<T>({out_size_});
  }

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext&) override {
    check_input(this->spec(), in_shape_, input.shape());
    batch_ = input.dim(0);
    input_ = input.values();
    ConstMapMat<T> x(input_.data(), batch_, in_size_);
    ConstMapMat<T> w(weight_.value.data().data(), out_size_, in_size_);
    Tensor<T> out({batch_, out_size_});
    MapMat<T> y(out.data().data(), batch_, out_size_);
    y.noalias() = x * w.transpose();
    const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.data().data(),
                                                                 static_cast<Eigen::Index>(out_size_));
    y.rowwise() += b;
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    if (grad_output.size() != batch_ * out_size_) {
      fail(ErrorKind::shape, "layer '" + this->spec().name + "': gradient shape mismatch");
    }
    ConstMapMat<T> g(grad_output.data().data(), batch_, out_size_);
    ConstMapMat<T> x(input_.data(), batch_, in_size_);
    if (!weight_.frozen) {
      weight_.value.ensure_grad();
      bias_.value.ensure_grad();
      MapMat<T> dw(weight_.value.grad().data(), out_size_, in_size_);
      dw.noalias() += g.transpose() * x;
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_.value.grad().data(),
                                                        static_cast<Eigen::Index>(out_size_));
      db += g.colwise().sum();
    }
    if (!need_input_grad) return {};
    ConstMapMat<T> w(weight_.value.data().data(), out_size_, in_size_);
    Tensor<T> dx(batched(batch_, in_shape_));
    MapMat<T> dxm(dx.data().data(), batch_, in_size_);
    dxm.noalias() = g * w;
    return dx;
  }

  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }

 private:
  Shape in_shape_;
  std::size_t in_size_, out_size_, batch_ = 0;
  AlignedVector<T> input_;
  Parameter<T> weight_, bias_;
};

template <typename T>
class Concat final : public Layer<T> {
 public:
  Concat(const LayerSpec& spec, const Shape& input, std::uint64_t seed)
      : Layer<T>(spec), in_shape_(input), out_shape_(infer_output_shape(spec, input)) {
    for (const auto& branch_spec : spec.branches) {
      std::vector<std::unique_ptr<Layer<T>>> branch;
      Shape shape = input;
      for (const auto& l : branch_spec) {
        branch.push_back(make_layer<T>(l, shape, seed));
        shape = infer_output_shape(l, shape);
      }
      channels_.push_back(shape[0]);
      branches_.push_back(std::move(branch));
    }
  }

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext& ctx) override {
    check_input(this->spec(), in_shape_, input.shape());
    batch_ = input.dim(0);
    const std::size_t plane = out_shape_[1] * out_shape_[2];
    Tensor<T> out(batched(batch_, out_shape_));
    std::size_t offset = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      Tensor<T> x = input;
      for (auto& layer : branches_[b]) x = layer->forward(x, ctx);
      const std::size_t cb = channels_[b];
      for (std::size_t n = 0; n < batch_; ++n) {
        std::copy_n(x.data().data() + n * cb * plane, cb * plane,
                    out.data().data() + (n * out_shape_[0] + offset) * plane);
      }
      offset += cb;
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    const std::size_t plane = out_shape_[1] * out_shape_[2];
    Tensor<T> grad_in;
    if (need_input_grad) grad_in = Tensor<T>(batched(batch_, in_shape_));
    std::size_t offset = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const std::size_t cb = channels_[b];
      Tensor<T> g({batch_, cb, out_shape_[1], out_shape_[2]});
      for (std::size_t n = 0; n < batch_; ++n) {
        std::copy_n(grad_output.data().data() + (n * out_shape_[0] + offset) * plane, cb * plane,
                    g.data().data() + n * cb * plane);
      }
      offset += cb;
      auto& branch = branches_[b];
      for (std::size_t i = branch.size(); i-- > 0;) {
        g = branch[i]->backward(g, i > 0 || need_input_grad);
      }
      if (need_input_grad) {
        auto dst = grad_in.data();
        auto src = g.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      }
    }
    return grad_in;
  }

  std::vector<Parameter<T>*> parameters() override {
    std::vector<Parameter<T>*> out;
    for (auto& branch : branches_) {
      for (auto& layer : branch) {
        auto p = layer->parameters();
        out.insert(out.end(), p.begin(), p.end());
      }
    }
    return out;
  }

  void reseed(std::uint64_t seed) override {
    for (auto& branch : branches_) {
      for (auto& layer : branch) layer->reseed(seed);
    }
  }

 private:
  Shape in_shape_, out_shape_;
  std::size_t batch_ = 0;
  std::vector<std::size_t> channels_;
  std::vector<std::vector<std::unique_ptr<Layer<T>>>> branches_;
};

// Per-neuron maximum over groups of `views_per_sample` consecutive batch rows.
template <typename T>
class ViewMaxPool final : public Layer<T> {
 public:
  ViewMaxPool(const LayerSpec& spec, const Shape& input) : Layer<T>(spec), in_shape_(input) {}

  Tensor<T> forward(const Tensor<T>& input, const ForwardContext& ctx) override {
    check_input(this->spec(), in_shape_, input.shape());
    views_ = ctx.views_per_sample;
    if (views_ == 0) return input;
    const std::size_t rows = input.dim(0);
    if (rows == 0 || rows % views_ != 0) {
      fail(ErrorKind::shape, "layer '" + this->spec().name + "': batch of " + std::to_string(rows) +
                                 " is not a multiple of " + std::to_string(views_) + " views");
    }
    groups_ = rows / views_;
    const std::size_t d = shape_size(in_shape_);
    Tensor<T> out(batched(groups_, in_shape_));
    argmax_.assign(groups_ * d, 0);
    const T* src = input.data().data();
    T* dst = out.data().data();
    for (std::size_t g = 0; g < groups_; ++g) {
      for (std::size_t j = 0; j < d; ++j) {
        std::size_t best = 0;
        T value = src[(g * views_) * d + j];
        for (std::size_t v = 1; v < views_; ++v) {
          const T candidate = src[(g * views_ + v) * d + j];
          if (candidate > value) {
            value = candidate;
            best = v;
          }
        }
        argmax_[g * d + j] = best;
        dst[g * d + j] = value;
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override {
    if (!need_input_grad) return {};
    if (views_ == 0) return grad_output;
    const std::size_t d = shape_size(in_shape_);
    Tensor<T> g(batched(groups_ * views_, in_shape_));
    const T* src = grad_output.data().data();
    T* dst = g.data().data();
    for (std::size_t grp = 0; grp < groups_; ++grp) {
      for (std::size_t j = 0; j < d; ++j) {
        dst[(grp * views_ + argmax_[grp * d + j]) * d + j] = src[grp * d + j];
      }
    }
    return g;
  }

 private:
  Shape in_shape_;
  std::size_t views_ = 0, groups_ = 0;
  std::vector<std::size_t> argmax_;
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& input, std::uint64_t seed) {
  (void)infer_output_shape(spec, input);
  switch (spec.kind) {
    case LayerKind::conv2d: return std::make_unique<Conv2d<T>>(spec, input, seed);
    case LayerKind::relu: return std::make_unique<Relu<T>>(spec, input);
    case LayerKind::maxpool2d: return std::make_unique<MaxPool2d<T>>(spec, input);
    case LayerKind::dropout: return std::make_unique<Dropout<T>>(spec, input, seed);
    case LayerKind::fully_connected: return std::make_unique<FullyConnected<T>>(spec, input, seed);
    case LayerKind::concat: return std::make_unique<Concat<T>>(spec, input, seed);
    case LayerKind::view_maxpool: return std::make_unique<ViewMaxPool<T>>(spec, input);
  }
  fail(ErrorKind::invalid_argument, "unknown layer kind");
}

template std::unique_ptr<Layer<float>> make_layer<float>(const LayerSpec&, const Shape&, std::uint64_t);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerSpec&, const Shape&, std::uint64_t);

}  // namespace fusionnet
