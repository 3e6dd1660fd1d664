#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fusionnet/evaluation.hpp"
#include "fusionnet/fusion.hpp"

namespace fusionnet {

// "vcnn1" -> "V-CNN I" etc.; unknown names pass through.
[[nodiscard]] std::string display_name(const std::string& network);

struct FusionSummary {
  FusionWeights weights;
  std::vector<std::size_t> views;  // per component
  double validation_metric = 0.0;
  double test_metric = 0.0;
};

[[nodiscard]] std::string write_fusion_summary(const FusionSummary& s);
[[nodiscard]] FusionSummary parse_fusion_summary(std::string_view text);

struct AccuracyRow {
  std::string network;
  std::string views;
  double metric = 0.0;  // fraction; printed as a percentage
};

[[nodiscard]] std::vector<AccuracyRow> accuracy_rows(const std::vector<Evaluation>& evaluations,
                                                     const std::optional<FusionSummary>& fusion);

// Fixed-width table: network, number of views used, accuracy.
[[nodiscard]] std::string format_accuracy_table(const std::vector<AccuracyRow>& rows,
                                                const std::string& dataset = "test");

struct ComponentMetrics {
  std::string network;
  double validation_metric = 0.0;
  double test_metric = 0.0;
};

// Timing-free summary of a run. Identical seeds give identical bytes.
[[nodiscard]] std::string write_metric_report(const std::vector<ComponentMetrics>& components,
                                              const FusionSummary& fusion);

}  // namespace fusionnet
