#include "fusionnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>

#include "fusionnet/io_util.hpp"
#include "fusionnet/loss.hpp"
#include "fusionnet/models.hpp"

namespace fusionnet {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double objective(Network<double>& net, const GradcheckCase& c, const Tensor<double>& input) {
  net.reseed_dropout(c.dropout_seed);
  const Tensor<double> out = net.forward(input, c.ctx);
  if (!c.labels.empty()) return softmax_loss<double>(out, c.labels).loss;
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) sum += c.probe[i] * out[i];
  return sum;
}

}  // namespace

GradcheckResult check_gradients(Network<double>& net, const GradcheckCase& c, const GradcheckOptions& opt,
                                 std::uint64_t probe_seed) {
  // analytic pass
  net.zero_grad();
  net.reseed_dropout(c.dropout_seed);
  const Tensor<double> out = net.forward(c.input, c.ctx);
  Tensor<double> grad_out;
  if (!c.labels.empty()) {
    grad_out = softmax_loss<double>(out, c.labels).grad;
  } else {
    if (c.probe.size() != out.size()) fail(ErrorKind::shape, "gradcheck probe does not match output size");
    grad_out = Tensor<double>(out.shape(), c.probe);
  }
  const Tensor<double> input_grad = net.backward(grad_out);

  GradcheckResult result;
  const double h = opt.step;
  auto record = [&](double analytic, double numeric) {
    result.max_relative_error = std::max(result.max_relative_error, relative_error(analytic, numeric));
    ++result.probes;
  };

  for (auto* p : net.parameters()) {
    if (p->frozen) continue;
    auto values = p->value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = objective(net, c, c.input);
      values[i] = saved - h;
      const double down = objective(net, c, c.input);
      values[i] = saved;
      record(p->value.grad()[i], (up - down) / (2.0 * h));
    }
  }

  if (!input_grad.empty()) {
    std::vector<std::size_t> idx(c.input.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(probe_seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), opt.input_probes));
    Tensor<double> x = c.input;
    for (std::size_t i : idx) {
      const double saved = x[i];
      x[i] = saved + h;
      const double up = objective(net, c, x);
      x[i] = saved - h;
      const double down = objective(net, c, x);
      x[i] = saved;
      record(input_grad[i], (up - down) / (2.0 * h));
    }
  }
  return result;
}

namespace {

struct CaseBuilder {
  std::string name;
  std::function<void(std::mt19937_64&, std::uint64_t, GradcheckResult&, const GradcheckOptions&)> run;
};

Tensor<double> gaussian(const Shape& shape, std::mt19937_64& rng) {
  Tensor<double> t(shape);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : t.data()) v = n(rng);
  return t;
}

// Values at least `gap` apart in random order, so no max window is near a tie
// and no value sits within `gap / 2` of zero.
Tensor<double> well_separated(const Shape& shape, std::mt19937_64& rng, double gap = 0.05) {
  Tensor<double> t(shape);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (static_cast<double>(i) - static_cast<double>(v.size()) / 2.0 + 0.5) * gap;
  }
  std::shuffle(v.begin(), v.end(), rng);
  std::copy(v.begin(), v.end(), t.data().begin());
  return t;
}

std::vector<double> probe_for(const Network<double>& net, std::size_t batch, std::mt19937_64& rng,
                              const ForwardContext& ctx) {
  std::size_t rows = batch;
  if (ctx.views_per_sample > 0) rows = batch / ctx.views_per_sample;
  const Shape& out = net.output_shape(net.layer_count() - 1);
  std::vector<double> probe(rows * shape_size(out));
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& p : probe) p = n(rng);
  return probe;
}

void merge(GradcheckResult& into, const GradcheckResult& r) {
  into.probes += r.probes;
  into.max_relative_error = std::max(into.max_relative_error, r.max_relative_error);
}

void run_single_layer(const LayerSpec& spec, const Shape& input, std::size_t batch, bool separated_input,
                      ForwardContext ctx, std::mt19937_64& rng, std::uint64_t seed, GradcheckResult& acc,
                      const GradcheckOptions& opt) {
  Network<double> net("single", input, {spec}, seed);
  GradcheckCase c;
  c.input = separated_input ? well_separated(batched(batch, input), rng) : gaussian(batched(batch, input), rng);
  c.ctx = ctx;
  c.probe = probe_for(net, batch, rng, ctx);
  c.dropout_seed = seed;
  merge(acc, check_gradients(net, c, opt, seed));
}

std::vector<CaseBuilder> suite() {
  std::vector<CaseBuilder> cases;
  cases.push_back({"conv2d", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     run_single_layer(LayerSpec::conv("c", 4, 3), {3, 7, 7}, 2, false, {}, rng, seed, acc, opt);
                     run_single_layer(LayerSpec::conv("s", 3, 3, 2, 1), {2, 7, 7}, 2, false, {}, rng, seed, acc, opt);
                     run_single_layer(LayerSpec::conv("p", 2, 1), {3, 4, 4}, 2, false, {}, rng, seed, acc, opt);
                   }});
  cases.push_back({"relu", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     run_single_layer(LayerSpec::relu("r"), {2, 4, 4}, 2, true, {}, rng, seed, acc, opt);
                   }});
  cases.push_back({"maxpool2d", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     run_single_layer(LayerSpec::maxpool("m"), {2, 6, 6}, 2, true, {}, rng, seed, acc, opt);
                   }});
  cases.push_back({"dropout", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     ForwardContext train;
                     train.training = true;
                     run_single_layer(LayerSpec::dropout("d", 0.3), {3, 4, 4}, 2, false, train, rng, seed, acc, opt);
                   }});
  cases.push_back({"fully_connected", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     run_single_layer(LayerSpec::fully_connected("f", 5), {3, 2, 2}, 3, false, {}, rng, seed, acc, opt);
                   }});
  cases.push_back({"concat", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     const LayerSpec inception = LayerSpec::concat(
                         "inc", {{LayerSpec::conv("inc.a", 2, 1)},
                                 {LayerSpec::conv("inc.b", 3, 3, 1, 1)},
                                 {LayerSpec::conv("inc.c", 2, 5, 1, 2)}});
                     run_single_layer(inception, {3, 6, 6}, 2, false, {}, rng, seed, acc, opt);
                   }});
  cases.push_back({"view_maxpool", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     ForwardContext pooled;
                     pooled.views_per_sample = 3;
                     run_single_layer(LayerSpec::view_maxpool("v"), {5}, 6, true, pooled, rng, seed, acc, opt);
                   }});
  cases.push_back({"softmax_loss", [](auto& rng, auto seed, auto& acc, const auto& opt) {
                     // identity-like net: the loss gradient reaches the input unchanged
                     Network<double> net("loss", {5}, {LayerSpec::dropout("id", 0.0)}, seed);
                     GradcheckCase c;
                     c.input = gaussian({3, 5}, rng);
                     std::uniform_int_distribution<int> label(0, 4);
                     for (int i = 0; i < 3; ++i) c.labels.push_back(label(rng));
                     merge(acc, check_gradients(net, c, opt, seed));
                   }});
  auto reduced_vcnn1 = [](std::uint64_t seed) {
    VolumetricOptions small;
    small.resolution = 14;
    small.conv_filters = 4;
    small.hidden_units = 8;
    return instantiate<double>(build_vcnn1(3, small), seed);
  };
  cases.push_back({"vcnn1_reduced_train", [reduced_vcnn1](auto& rng, auto seed, auto& acc, const auto& opt) {
                     Network<double> net = reduced_vcnn1(seed);
                     GradcheckCase c;
                     c.input = gaussian(batched(2, net.input_shape()), rng);
                     c.ctx.training = true;
                     std::uniform_int_distribution<int> label(0, 2);
                     c.labels = {label(rng), label(rng)};
                     c.dropout_seed = seed;
                     merge(acc, check_gradients(net, c, opt, seed));
                   }});
  cases.push_back({"vcnn1_reduced_pooled", [reduced_vcnn1](auto& rng, auto seed, auto& acc, const auto& opt) {
                     Network<double> net = reduced_vcnn1(seed);
                     GradcheckCase c;
                     c.input = gaussian(batched(6, net.input_shape()), rng);
                     c.ctx.views_per_sample = 3;
                     std::uniform_int_distribution<int> label(0, 2);
                     c.labels = {label(rng), label(rng)};
                     merge(acc, check_gradients(net, c, opt, seed));
                   }});
  return cases;
}

}  // namespace

std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& opt) {
  std::vector<GradcheckRow> rows;
  for (const auto& builder : suite()) {
    GradcheckResult acc;
    for (int s = 0; s < opt.seeds; ++s) {
      const std::uint64_t seed = derive_seed(opt.seed, builder.name + "/" + std::to_string(s));
      std::mt19937_64 rng(seed);
      builder.run(rng, seed, acc, opt);
    }
    GradcheckRow row;
    row.name = builder.name;
    row.seeds = opt.seeds;
    row.probes = acc.probes;
    row.max_relative_error = acc.max_relative_error;
    row.passed = acc.max_relative_error < opt.tolerance;
    rows.push_back(row);
  }
  return rows;
}

std::string format_gradcheck_table(const std::vector<GradcheckRow>& rows) {
  std::string out = "case                    seeds   probes  max_rel_error  status\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-22s %6d %8zu  %13.3e  %s\n", r.name.c_str(), r.seeds, r.probes,
                  r.max_relative_error, r.passed ? "ok" : "FAIL");
    out += buf;
  }
  return out;
}

}  // namespace fusionnet
