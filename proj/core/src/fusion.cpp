#include "fusionnet/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fusionnet/error.hpp"
#include "fusionnet/evaluation.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

namespace {

// Components must list the same model ids in the same order with equal class counts.
void check_aligned(const std::vector<ScoreSet>& components) {
  if (components.empty()) fail(ErrorKind::invalid_argument, "fusion needs at least one component");
  const ScoreSet& first = components.front();
  for (std::size_t c = 1; c < components.size(); ++c) {
    const ScoreSet& other = components[c];
    if (other.size() != first.size()) {
      fail(ErrorKind::invalid_argument, "component " + std::to_string(c) + " covers " + std::to_string(other.size()) +
                                            " models, component 0 covers " + std::to_string(first.size()));
    }
    for (std::size_t m = 0; m < first.size(); ++m) {
      if (other[m].model_id != first[m].model_id) {
        fail(ErrorKind::invalid_argument, "components cover different model ids ('" + first[m].model_id + "' vs '" +
                                              other[m].model_id + "')");
      }
      if (other[m].scores.size() != first[m].scores.size()) {
        fail(ErrorKind::invalid_argument, "components disagree on the class count for '" + first[m].model_id + "'");
      }
    }
  }
}

std::vector<double> prepared(const std::vector<double>& scores, bool softmax) {
  if (!softmax) return scores;
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += out[i] = std::exp(scores[i] - mx);
  for (double& v : out) v /= sum;
  return out;
}

std::vector<int> fuse_prepared(const std::vector<std::vector<std::vector<double>>>& comps,
                               const std::vector<double>& w) {
  std::vector<int> preds;
  const std::size_t models = comps.front().size();
  for (std::size_t m = 0; m < models; ++m) {
    std::vector<double> sum(comps.front()[m].size(), 0.0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (w[c] == 0.0) continue;
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w[c] * comps[c][m][k];
    }
    preds.push_back(argmax(sum));
  }
  return preds;
}

std::vector<std::vector<std::vector<double>>> prepare_all(const std::vector<ScoreSet>& components, bool softmax) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& set : components) {
    auto& c = out.emplace_back();
    for (const auto& s : set) c.push_back(prepared(s.scores, softmax));
  }
  return out;
}

std::vector<std::string> component_names(const std::vector<ScoreSet>& components) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < components.size(); ++c) {
    names.push_back(components[c].empty() || components[c][0].network.empty() ? "component" + std::to_string(c)
                                                                              : components[c][0].network);
  }
  return names;
}

}  // namespace

std::vector<std::vector<int>> simplex_grid(int components, int steps) {
  if (components < 1 || steps < 1) fail(ErrorKind::invalid_argument, "simplex grid needs positive sizes");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(components, 0);
  // lexicographic enumeration of compositions of `steps` into `components` parts
  auto rec = [&](auto& self, int index, int remaining) -> void {
    if (index == components - 1) {
      cur[index] = remaining;
      out.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[index] = v;
      self(self, index + 1, remaining - v);
    }
  };
  rec(rec, 0, steps);
  return out;
}

FusionWeights fit_fusion_weights(const std::vector<ScoreSet>& components, const std::map<std::string, int>& labels,
                                 int class_count, const FusionOptions& opt) {
  check_aligned(components);
  if (components.front().empty()) fail(ErrorKind::invalid_argument, "no validation models to fit fusion weights on");
  if (!(opt.grid_step > 0.0 && opt.grid_step <= 1.0)) fail(ErrorKind::invalid_argument, "grid step must lie in (0, 1]");
  const int steps = static_cast<int>(std::lround(1.0 / opt.grid_step));
  if (std::abs(steps * opt.grid_step - 1.0) > 1e-9) fail(ErrorKind::invalid_argument, "grid step must divide 1");

  std::vector<int> truth;
  for (const auto& s : components.front()) {
    auto it = labels.find(s.model_id);
    if (it == labels.end()) fail(ErrorKind::invalid_argument, "no label for model '" + s.model_id + "'");
    truth.push_back(it->second);
  }
  const auto comps = prepare_all(components, opt.softmax);
  const int n = static_cast<int>(components.size());

  double best_metric = -1.0;
  long best_spread = 0;
  std::vector<int> best;
  for (const auto& units : simplex_grid(n, steps)) {
    std::vector<double> w(n);
    long spread = 0;
    for (int i = 0; i < n; ++i) {
      w[i] = static_cast<double>(units[i]) / steps;
      spread += static_cast<long>(units[i]) * units[i];
    }
    const double metric = average_per_class_accuracy(truth, fuse_prepared(comps, w), class_count);
    if (metric > best_metric || (metric == best_metric && spread < best_spread)) {
      best_metric = metric;
      best_spread = spread;
      best = units;
    }
  }
  FusionWeights out;
  out.components = component_names(components);
  for (int u : best) out.weights.push_back(static_cast<double>(u) / steps);
  return out;
}

std::vector<int> fuse_scores(const std::vector<ScoreSet>& components, const FusionWeights& weights, bool softmax) {
  check_aligned(components);
  if (weights.weights.size() != components.size()) {
    fail(ErrorKind::invalid_argument, "fusion weight count does not match the component count");
  }
  return fuse_prepared(prepare_all(components, softmax), weights.weights);
}

std::string write_fusion_weights(const FusionWeights& w) {
  nlohmann::ordered_json j;
  j["components"] = w.components;
  auto arr = nlohmann::ordered_json::array();
  for (double v : w.weights) arr.push_back(format_real(v, 17));
  j["weights"] = arr;
  return j.dump(2) + "\n";
}

FusionWeights parse_fusion_weights(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FusionWeights w;
    w.components = j.at("components").get<std::vector<std::string>>();
    for (const auto& v : j.at("weights")) w.weights.push_back(std::stod(v.get<std::string>()));
    if (w.components.size() != w.weights.size()) fail(ErrorKind::format, "fusion weights and components differ in length");
    return w;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("bad fusion weights: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::format, "bad fusion weights: non-numeric weight");
  }
}

}  // namespace fusionnet
