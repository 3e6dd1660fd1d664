#pragma once

#include <map>
#include <string>
#include <vector>

#include "fusionnet/models.hpp"

namespace fusionnet {

// Convex weights over named score components.
struct FusionWeights {
  std::vector<std::string> components;
  std::vector<double> weights;
};

struct FusionOptions {
  double grid_step = 0.05;
  bool softmax = false;  // fuse softmax probabilities instead of raw scores
};

// One component's score vectors, one per model.
using ScoreSet = std::vector<ClassScores>;

// Exhaustive search over the simplex grid, one-hot corners included, for the
// best average per-class accuracy. Ties go to the weight vector with the
// smallest sum of squares, then to the first in enumeration order.
[[nodiscard]] FusionWeights fit_fusion_weights(const std::vector<ScoreSet>& components,
                                               const std::map<std::string, int>& labels, int class_count,
                                               const FusionOptions& opt = {});

// argmax over classes of sum_i w_i * scores_i, ties to the lowest class index.
// Predictions follow the model order of the first component.
[[nodiscard]] std::vector<int> fuse_scores(const std::vector<ScoreSet>& components, const FusionWeights& weights,
                                           bool softmax = false);

// Every simplex point with coordinates in multiples of 1/steps.
[[nodiscard]] std::vector<std::vector<int>> simplex_grid(int components, int steps);

[[nodiscard]] std::string write_fusion_weights(const FusionWeights& w);
[[nodiscard]] FusionWeights parse_fusion_weights(std::string_view text);

}  // namespace fusionnet
