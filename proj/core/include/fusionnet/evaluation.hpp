#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fusionnet/models.hpp"
#include "fusionnet/network.hpp"
#include "fusionnet/training.hpp"

namespace fusionnet {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [true][predicted]

[[nodiscard]] ConfusionMatrix confusion_matrix(const std::vector<int>& labels, const std::vector<int>& predictions,
                                               int class_count);

// correct_c / total_c per class; classes without samples get NaN.
[[nodiscard]] std::vector<double> per_class_accuracy(const ConfusionMatrix& confusion);

// Mean of per-class accuracy over the classes that have samples.
[[nodiscard]] double average_per_class_accuracy(const ConfusionMatrix& confusion);
[[nodiscard]] double average_per_class_accuracy(const std::vector<int>& labels, const std::vector<int>& predictions,
                                                int class_count);

// First maximum wins, so ties go to the lowest class index.
[[nodiscard]] int argmax(const std::vector<double>& scores);

struct Evaluation {
  std::string network;
  std::size_t views = 0;
  std::vector<std::string> classes;
  std::vector<int> labels;
  std::vector<int> predictions;
  ConfusionMatrix confusion;
  std::vector<double> class_accuracy;
  double metric = 0.0;
  std::vector<ClassScores> scores;
};

// Pooled evaluation: all views of a model go through the network together and
// meet at view_maxpool. Fails when a label of `samples` never occurs in
// `trained_labels`.
[[nodiscard]] Evaluation evaluate(Network<float>& net, const SampleSet& samples, const std::vector<std::string>& classes,
                                  const std::vector<int>& trained_labels);

// JSON lines: {"model_id", "network", "label", "scores": [...]}.
[[nodiscard]] std::string write_scores_jsonl(const Evaluation& eval);
struct LabeledScores {
  std::vector<ClassScores> scores;
  std::vector<int> labels;
};
[[nodiscard]] LabeledScores parse_scores_jsonl(std::string_view text);

// Summary with per-class accuracy and the confusion matrix.
[[nodiscard]] std::string write_evaluation_json(const Evaluation& eval);
[[nodiscard]] Evaluation parse_evaluation_json(std::string_view text);

}  // namespace fusionnet
