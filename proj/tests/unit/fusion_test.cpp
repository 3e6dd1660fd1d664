#include <gtest/gtest.h>

#include <random>

#include "fusionnet/error.hpp"
#include "fusionnet/evaluation.hpp"
#include "fusionnet/fusion.hpp"

using namespace fusionnet;

namespace {

ScoreSet make_set(const std::string& net, const std::vector<std::vector<double>>& rows) {
  ScoreSet s;
  for (std::size_t i = 0; i < rows.size(); ++i) s.push_back({"m" + std::to_string(i), net, rows[i]});
  return s;
}

std::map<std::string, int> label_map(const std::vector<int>& labels) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out["m" + std::to_string(i)] = labels[i];
  return out;
}

double fused_metric(const std::vector<ScoreSet>& comps, const std::vector<double>& w, const std::vector<int>& labels,
                    int k) {
  return average_per_class_accuracy(labels, fuse_scores(comps, {{}, w}), k);
}

}  // namespace

TEST(Fusion, HandArithmetic) {
  const std::vector<ScoreSet> comps{make_set("a", {{2, 0}}), make_set("b", {{0, 3}})};
  EXPECT_EQ(fuse_scores(comps, {{"a", "b"}, {0.5, 0.5}}), (std::vector<int>{1}));
  EXPECT_EQ(fuse_scores(comps, {{"a", "b"}, {1.0, 0.0}}), (std::vector<int>{0}));
  // exact tie goes to the lower class
  const std::vector<ScoreSet> tie{make_set("a", {{2, 0}}), make_set("b", {{0, 2}})};
  EXPECT_EQ(fuse_scores(tie, {{"a", "b"}, {0.5, 0.5}}), (std::vector<int>{0}));
}

TEST(Fusion, SingleComponent) {
  const auto w = fit_fusion_weights({make_set("a", {{1, 0}, {0, 1}})}, label_map({0, 0}), 2);
  EXPECT_EQ(w.weights, (std::vector<double>{1.0}));
  EXPECT_EQ(w.components, (std::vector<std::string>{"a"}));
}

TEST(Fusion, SimplexGrid) {
  const auto g = simplex_grid(3, 4);
  EXPECT_EQ(g.size(), 15u);  // C(6, 2)
  for (const auto& p : g) EXPECT_EQ(p[0] + p[1] + p[2], 4);
  EXPECT_EQ(g.front(), (std::vector<int>{4, 0, 0}));
  EXPECT_EQ(simplex_grid(4, 20).size(), 1771u);  // C(23, 3)
}

TEST(Fusion, ComplementaryMixBeatsCorners) {
  const std::vector<int> labels{0, 1, 0, 1};
  const std::vector<ScoreSet> comps{make_set("a", {{5, 0}, {0, 5}, {0, 1}, {1, 0}}),
                                    make_set("b", {{0, 1}, {1, 0}, {5, 0}, {0, 5}})};
  const auto w = fit_fusion_weights(comps, label_map(labels), 2);
  EXPECT_DOUBLE_EQ(fused_metric(comps, w.weights, labels, 2), 1.0);
  EXPECT_DOUBLE_EQ(fused_metric(comps, {1, 0}, labels, 2), 0.5);
  EXPECT_DOUBLE_EQ(fused_metric(comps, {0, 1}, labels, 2), 0.5);
  // ties resolve to the most uniform vector
  EXPECT_EQ(w.weights, (std::vector<double>{0.5, 0.5}));
}

TEST(Fusion, DominantComponentCornerIsOptimal) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  std::vector<int> labels;
  std::vector<std::vector<double>> a, b;
  for (int m = 0; m < 30; ++m) {
    const int y = m % 3;
    labels.push_back(y);
    std::vector<double> sa{n(rng), n(rng), n(rng)}, sb{n(rng), n(rng), n(rng)};
    sa[y] += 10;  // A always right
    b.push_back(sb);
    a.push_back(sa);
  }
  const std::vector<ScoreSet> comps{make_set("a", a), make_set("b", b)};
  const auto w = fit_fusion_weights(comps, label_map(labels), 3);
  const double best = fused_metric(comps, w.weights, labels, 3);
  EXPECT_DOUBLE_EQ(fused_metric(comps, {1, 0}, labels, 3), best);
  EXPECT_DOUBLE_EQ(best, 1.0);
}

TEST(Fusion, ValidationNeverBelowBestComponent) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels;
    std::vector<std::vector<std::vector<double>>> rows(3);
    for (int m = 0; m < 40; ++m) {
      labels.push_back(m % 4);
      for (auto& r : rows) {
        std::vector<double> s(4);
        for (auto& v : s) v = n(rng);
        s[m % 4] += 0.8;
        r.push_back(s);
      }
    }
    const std::vector<ScoreSet> comps{make_set("a", rows[0]), make_set("b", rows[1]), make_set("c", rows[2])};
    const auto w = fit_fusion_weights(comps, label_map(labels), 4, {.grid_step = 0.1});
    const double fused = fused_metric(comps, w.weights, labels, 4);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> corner(3, 0.0);
      corner[c] = 1.0;
      EXPECT_GE(fused, fused_metric(comps, corner, labels, 4));
    }
    double sum = 0;
    for (double x : w.weights) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Fusion, ScaleInvariance) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> a, b, a3, b3;
  for (int m = 0; m < 50; ++m) {
    std::vector<double> sa{n(rng), n(rng), n(rng)}, sb{n(rng), n(rng), n(rng)};
    a.push_back(sa);
    b.push_back(sb);
    for (auto& v : sa) v *= 3.5;
    for (auto& v : sb) v *= 3.5;
    a3.push_back(sa);
    b3.push_back(sb);
  }
  const FusionWeights w{{"a", "b"}, {0.3, 0.7}};
  EXPECT_EQ(fuse_scores({make_set("a", a), make_set("b", b)}, w), fuse_scores({make_set("a", a3), make_set("b", b3)}, w));
  // one-hot weights reproduce the component's own argmax
  const auto only_b = fuse_scores({make_set("a", a), make_set("b", b)}, {{"a", "b"}, {0, 1}});
  for (std::size_t m = 0; m < b.size(); ++m) EXPECT_EQ(only_b[m], argmax(b[m]));
}

TEST(Fusion, SoftmaxOption) {
  // A's mass is split between classes 0 and 2, so its margin for 0 shrinks under softmax
  const std::vector<ScoreSet> comps{make_set("a", {{10, 8, 9.9}}), make_set("b", {{0, 1.9, 0}})};
  const FusionWeights w{{"a", "b"}, {0.5, 0.5}};
  EXPECT_EQ(fuse_scores(comps, w, false), (std::vector<int>{0}));
  EXPECT_EQ(fuse_scores(comps, w, true), (std::vector<int>{1}));
}

TEST(Fusion, MisalignedComponentsRejected) {
  ScoreSet a = make_set("a", {{1, 0}, {0, 1}});
  ScoreSet b = make_set("b", {{1, 0}, {0, 1}});
  std::swap(b[0].model_id, b[1].model_id);
  EXPECT_THROW((void)fuse_scores({a, b}, {{"a", "b"}, {0.5, 0.5}}), Error);
  EXPECT_THROW((void)fuse_scores({a, make_set("b", {{1, 0}})}, {{"a", "b"}, {0.5, 0.5}}), Error);
  EXPECT_THROW((void)fuse_scores({a, make_set("b", {{1, 0, 0}, {0, 1, 0}})}, {{"a", "b"}, {0.5, 0.5}}), Error);
  EXPECT_THROW((void)fit_fusion_weights({a}, label_map({0}), 2), Error);  // m1 has no label
  EXPECT_THROW((void)fit_fusion_weights({a}, label_map({0, 1}), 2, {.grid_step = 0.3}), Error);
}

TEST(Fusion, WeightsRoundTrip) {
  const FusionWeights w{{"vcnn1", "mvnet"}, {0.35000000000000003, 0.65}};
  const FusionWeights back = parse_fusion_weights(write_fusion_weights(w));
  EXPECT_EQ(back.components, w.components);
  EXPECT_EQ(back.weights, w.weights);
  EXPECT_THROW((void)parse_fusion_weights("{\"components\":[\"a\"],\"weights\":[]}"), Error);
  EXPECT_THROW((void)parse_fusion_weights("nope"), Error);
}
