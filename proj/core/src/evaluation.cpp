#include "fusionnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

ConfusionMatrix confusion_matrix(const std::vector<int>& labels, const std::vector<int>& predictions,
                                 int class_count) {
  if (labels.size() != predictions.size()) fail(ErrorKind::shape, "label and prediction counts differ");
  if (class_count < 1) fail(ErrorKind::invalid_argument, "class count must be >= 1");
  ConfusionMatrix m(class_count, std::vector<std::size_t>(class_count, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count || predictions[i] < 0 || predictions[i] >= class_count) {
      fail(ErrorKind::invalid_argument, "class index out of range");
    }
    ++m[labels[i]][predictions[i]];
  }
  return m;
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& confusion) {
  std::vector<double> acc;
  for (std::size_t c = 0; c < confusion.size(); ++c) {
    std::size_t total = 0;
    for (auto v : confusion[c]) total += v;
    acc.push_back(total == 0 ? std::numeric_limits<double>::quiet_NaN()
                             : static_cast<double>(confusion[c][c]) / static_cast<double>(total));
  }
  return acc;
}

double average_per_class_accuracy(const ConfusionMatrix& confusion) {
  double sum = 0.0;
  int present = 0;
  for (double a : per_class_accuracy(confusion)) {
    if (std::isnan(a)) continue;
    sum += a;
    ++present;
  }
  if (present == 0) fail(ErrorKind::invalid_argument, "no samples to score");
  return sum / present;
}

double average_per_class_accuracy(const std::vector<int>& labels, const std::vector<int>& predictions,
                                  int class_count) {
  return average_per_class_accuracy(confusion_matrix(labels, predictions, class_count));
}

int argmax(const std::vector<double>& scores) {
  if (scores.empty()) fail(ErrorKind::invalid_argument, "argmax of an empty score vector");
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

Evaluation evaluate(Network<float>& net, const SampleSet& samples, const std::vector<std::string>& classes,
                    const std::vector<int>& trained_labels) {
  const std::set<int> trained(trained_labels.begin(), trained_labels.end());
  for (std::size_t m = 0; m < samples.model_count(); ++m) {
    if (!trained.contains(samples.labels[m])) {
      const int l = samples.labels[m];
      const std::string name = l >= 0 && l < static_cast<int>(classes.size()) ? classes[l] : std::to_string(l);
      fail(ErrorKind::invalid_argument, "class '" + name + "' appears in the evaluation set but not in training");
    }
  }
  if (samples.input_shape() != net.input_shape()) {
    fail(ErrorKind::shape, "cached samples have shape " + shape_to_string(samples.input_shape()) + ", network '" +
                               net.name() + "' expects " + shape_to_string(net.input_shape()));
  }

  Evaluation eval;
  eval.network = net.name();
  eval.views = samples.views_per_model;
  eval.classes = classes;
  const std::size_t input_size = shape_size(samples.input_shape());
  ForwardContext ctx;
  ctx.training = false;
  ctx.views_per_sample = samples.views_per_model;
  for (std::size_t m = 0; m < samples.model_count(); ++m) {
    Tensor<float> batch(batched(samples.views_per_model, samples.input_shape()));
    for (std::size_t v = 0; v < samples.views_per_model; ++v) {
      samples.fill(m * samples.views_per_model + v, batch.data().data() + v * input_size);
    }
    const Tensor<float> out = net.forward(batch, ctx);
    if (out.rank() != 2 || out.dim(0) != 1) fail(ErrorKind::shape, "network '" + net.name() + "' has no view_maxpool layer");
    ClassScores s;
    s.model_id = samples.model_ids[m];
    s.network = net.name();
    s.scores.assign(out.data().begin(), out.data().end());
    eval.predictions.push_back(argmax(s.scores));
    eval.labels.push_back(samples.labels[m]);
    eval.scores.push_back(std::move(s));
  }
  const int k = static_cast<int>(std::max(classes.size(), eval.scores.empty() ? 0 : eval.scores[0].scores.size()));
  eval.confusion = confusion_matrix(eval.labels, eval.predictions, k);
  eval.class_accuracy = per_class_accuracy(eval.confusion);
  eval.metric = average_per_class_accuracy(eval.confusion);
  return eval;
}

std::string write_scores_jsonl(const Evaluation& eval) {
  std::string out;
  for (std::size_t i = 0; i < eval.scores.size(); ++i) {
    nlohmann::ordered_json j;
    j["model_id"] = eval.scores[i].model_id;
    j["network"] = eval.scores[i].network;
    j["label"] = eval.labels[i];
    auto arr = nlohmann::ordered_json::array();
    for (double v : eval.scores[i].scores) arr.push_back(v);
    j["scores"] = arr;
    out += j.dump() + "\n";
  }
  return out;
}

LabeledScores parse_scores_jsonl(std::string_view text) {
  LabeledScores out;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(row);
      ClassScores s;
      s.model_id = j.at("model_id").get<std::string>();
      s.network = j.at("network").get<std::string>();
      s.scores = j.at("scores").get<std::vector<double>>();
      out.labels.push_back(j.at("label").get<int>());
      out.scores.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, std::string("bad score entry: ") + e.what());
    }
  }
  return out;
}

std::string write_evaluation_json(const Evaluation& eval) {
  nlohmann::ordered_json j;
  j["network"] = eval.network;
  j["views"] = eval.views;
  j["models"] = eval.labels.size();
  j["metric"] = format_real(eval.metric, 17);
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < eval.classes.size(); ++c) {
    nlohmann::ordered_json row;
    row["class"] = eval.classes[c];
    row["accuracy"] = c < eval.class_accuracy.size() && !std::isnan(eval.class_accuracy[c])
                          ? nlohmann::ordered_json(format_real(eval.class_accuracy[c], 17))
                          : nlohmann::ordered_json(nullptr);
    row["confusion"] = c < eval.confusion.size() ? eval.confusion[c] : std::vector<std::size_t>{};
    classes.push_back(row);
  }
  j["classes"] = classes;
  return j.dump(2) + "\n";
}

Evaluation parse_evaluation_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Evaluation eval;
    eval.network = j.at("network").get<std::string>();
    eval.views = j.at("views").get<std::size_t>();
    eval.metric = std::stod(j.at("metric").get<std::string>());
    for (const auto& row : j.at("classes")) {
      eval.classes.push_back(row.at("class").get<std::string>());
      eval.class_accuracy.push_back(row.at("accuracy").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                                 : std::stod(row.at("accuracy").get<std::string>()));
      eval.confusion.push_back(row.at("confusion").get<std::vector<std::size_t>>());
    }
    return eval;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("bad evaluation file: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::format, "bad evaluation file: non-numeric accuracy");
  }
}

}  // namespace fusionnet
