#include "fusionnet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

std::string display_name(const std::string& network) {
  if (network == "vcnn1") return "V-CNN I";
  if (network == "vcnn1_jitter") return "V-CNN I*";
  if (network == "vcnn2") return "V-CNN II";
  if (network == "mvnet") return "MV-net";
  return network;
}

std::string write_fusion_summary(const FusionSummary& s) {
  nlohmann::ordered_json j;
  j["components"] = s.weights.components;
  auto w = nlohmann::ordered_json::array();
  for (double v : s.weights.weights) w.push_back(format_real(v, 17));
  j["weights"] = w;
  j["views"] = s.views;
  j["validation_metric"] = format_real(s.validation_metric, 17);
  j["test_metric"] = format_real(s.test_metric, 17);
  return j.dump(2) + "\n";
}

FusionSummary parse_fusion_summary(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FusionSummary s;
    s.weights.components = j.at("components").get<std::vector<std::string>>();
    for (const auto& v : j.at("weights")) s.weights.weights.push_back(std::stod(v.get<std::string>()));
    s.views = j.at("views").get<std::vector<std::size_t>>();
    s.validation_metric = std::stod(j.at("validation_metric").get<std::string>());
    s.test_metric = std::stod(j.at("test_metric").get<std::string>());
    if (s.weights.components.size() != s.weights.weights.size() || s.views.size() != s.weights.weights.size()) {
      fail(ErrorKind::format, "fusion summary lists differ in length");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("bad fusion summary: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::format, "bad fusion summary: non-numeric value");
  }
}

std::vector<AccuracyRow> accuracy_rows(const std::vector<Evaluation>& evaluations,
                                       const std::optional<FusionSummary>& fusion) {
  std::vector<AccuracyRow> rows;
  for (const auto& e : evaluations) rows.push_back({display_name(e.network), std::to_string(e.views), e.metric});
  if (fusion) {
    std::string name = "FusionNet (";
    std::set<std::size_t> views;
    bool first = true;
    for (std::size_t i = 0; i < fusion->weights.components.size(); ++i) {
      if (!first) name += " + ";
      name += display_name(fusion->weights.components[i]);
      first = false;
      views.insert(fusion->views[i]);
    }
    name += ")";
    std::string v;
    for (auto n : views) v += (v.empty() ? "" : ", ") + std::to_string(n);
    rows.push_back({name, v, fusion->test_metric});
  }
  return rows;
}

std::string format_accuracy_table(const std::vector<AccuracyRow>& rows, const std::string& dataset) {
  const std::string h1 = "Network", h2 = "Number of Views Used", h3 = "Accuracy (" + dataset + ")";
  std::size_t w1 = h1.size(), w2 = h2.size();
  for (const auto& r : rows) {
    w1 = std::max(w1, r.network.size());
    w2 = std::max(w2, r.views.size());
  }
  auto line = [&](const std::string& a, const std::string& b, const std::string& c) {
    std::string out = "| " + a + std::string(w1 - a.size(), ' ') + " | " + b + std::string(w2 - b.size(), ' ') +
                      " | " + c + std::string(h3.size() > c.size() ? h3.size() - c.size() : 0, ' ') + " |\n";
    return out;
  };
  std::string out = line(h1, h2, h3);
  out += "|" + std::string(w1 + 2, '-') + "|" + std::string(w2 + 2, '-') + "|" + std::string(h3.size() + 2, '-') + "|\n";
  for (const auto& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * r.metric);
    out += line(r.network, r.views, buf);
  }
  return out;
}

std::string write_metric_report(const std::vector<ComponentMetrics>& components, const FusionSummary& fusion) {
  nlohmann::ordered_json j;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : components) {
    nlohmann::ordered_json row;
    row["network"] = c.network;
    row["validation_metric"] = format_real(c.validation_metric, 17);
    row["test_metric"] = format_real(c.test_metric, 17);
    comps.push_back(row);
  }
  j["components"] = comps;
  nlohmann::ordered_json f;
  auto w = nlohmann::ordered_json::array();
  for (double v : fusion.weights.weights) w.push_back(format_real(v, 17));
  f["components"] = fusion.weights.components;
  f["weights"] = w;
  f["validation_metric"] = format_real(fusion.validation_metric, 17);
  f["test_metric"] = format_real(fusion.test_metric, 17);
  j["fusion"] = f;
  return j.dump(2) + "\n";
}

}  // namespace fusionnet
