#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusionnet/network.hpp"

namespace fusionnet {

struct GradcheckOptions {
  std::uint64_t seed = 7;
  int seeds = 20;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Input coordinates probed per case; parameters are always probed exhaustively.
  std::size_t input_probes = 64;
};

struct GradcheckRow {
  std::string name;
  int seeds = 0;
  std::size_t probes = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

// |a - n| / max(|a|, |n|, 1e-6)
[[nodiscard]] double relative_error(double analytic, double numeric);

// Central-difference check of one network on one input. The scalar objective
// is softmax_loss when `labels` is non-empty, otherwise sum(probe * output).
struct GradcheckCase {
  Tensor<double> input;
  ForwardContext ctx;
  std::vector<int> labels;
  std::vector<double> probe;
  std::uint64_t dropout_seed = 0;
};

struct GradcheckResult {
  std::size_t probes = 0;
  double max_relative_error = 0.0;
};

[[nodiscard]] GradcheckResult check_gradients(Network<double>& net, const GradcheckCase& c,
                                              const GradcheckOptions& opt, std::uint64_t probe_seed);

// Every layer kind, the softmax loss and a width-reduced V-CNN I (training and
// view-pooled evaluation paths), each over `opt.seeds` seeds.
[[nodiscard]] std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& opt);

[[nodiscard]] std::string format_gradcheck_table(const std::vector<GradcheckRow>& rows);

}  // namespace fusionnet
