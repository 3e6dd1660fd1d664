#include "fusionnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"
#include "fusionnet/mesh_io.hpp"
#include "fusionnet/shapes.hpp"

namespace fusionnet {

namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  fail(ErrorKind::parse, "unknown split '" + std::string(text) + "'");
}

int DatasetManifest::class_index(std::string_view label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) fail(ErrorKind::invalid_argument, "unknown class '" + std::string(label) + "'");
  return static_cast<int>(it - classes.begin());
}

std::vector<ManifestEntry> DatasetManifest::select(Split split) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [split](const ManifestEntry& e) { return e.split == split; });
  return out;
}

void refresh_classes(DatasetManifest& manifest) {
  std::set<std::string> labels;
  for (const auto& e : manifest.entries) labels.insert(e.label);
  manifest.classes.assign(labels.begin(), labels.end());
}

void validate_manifest(const DatasetManifest& manifest) {
  if (manifest.classes.empty()) fail(ErrorKind::invalid_argument, "no classes found");
  std::set<std::string> ids;
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& e : manifest.entries) {
    if (!ids.insert(e.model_id).second) fail(ErrorKind::invalid_argument, "duplicate model id '" + e.model_id + "'");
    auto& c = counts[e.label];
    (e.split == Split::test ? c.second : c.first)++;
  }
  for (const auto& label : manifest.classes) {
    const auto c = counts[label];
    if (c.first == 0) fail(ErrorKind::invalid_argument, "class '" + label + "' has no training models");
    if (c.second == 0) fail(ErrorKind::invalid_argument, "class '" + label + "' has no test models");
  }
}

DatasetManifest ingest_modelnet(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorKind::not_found, "dataset root " + root.string() + " not found");
  std::vector<fs::path> class_dirs;
  for (const auto& d : fs::directory_iterator(root)) {
    if (d.is_directory()) class_dirs.push_back(d.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) fail(ErrorKind::invalid_argument, "no classes found under " + root.string());

  DatasetManifest manifest;
  manifest.root = root;
  std::vector<std::string> broken;
  for (const auto& dir : class_dirs) {
    const std::string label = dir.filename().string();
    for (const char* split : {"train", "test"}) {
      const fs::path split_dir = dir / split;
      if (!fs::is_directory(split_dir)) {
        fail(ErrorKind::not_found, "class '" + label + "' is missing its " + split + " directory");
      }
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(split_dir)) {
        if (f.is_regular_file() && f.path().extension() == ".off") files.push_back(f.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        try {
          (void)parse_off(read_text_file(f));
        } catch (const Error& e) {
          broken.push_back(f.string() + ": " + e.what());
          continue;
        }
        ManifestEntry entry;
        entry.model_id = f.stem().string();
        entry.label = label;
        entry.split = parse_split(split);
        entry.path = fs::relative(f, root).generic_string();
        manifest.entries.push_back(std::move(entry));
      }
    }
  }
  if (!broken.empty()) {
    std::string msg = std::to_string(broken.size()) + " unparseable OFF file(s):";
    for (const auto& b : broken) msg += "\n  " + b;
    fail(ErrorKind::parse, msg);
  }
  refresh_classes(manifest);
  validate_manifest(manifest);
  return manifest;
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::box: return "box";
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::pyramid: return "pyramid";
    case ShapeKind::cylinder: return "cylinder";
    case ShapeKind::torus: return "torus";
  }
  return "box";
}

ShapeKind parse_shape_kind(std::string_view text) {
  for (auto k : {ShapeKind::box, ShapeKind::sphere, ShapeKind::pyramid, ShapeKind::cylinder, ShapeKind::torus}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorKind::invalid_argument, "unknown shape kind '" + std::string(text) + "'");
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  const std::string_view times = "\xC3\x97";  // U+00D7
  std::size_t sep = text.rfind(times);
  std::size_t sep_len = times.size();
  if (sep == std::string_view::npos) {
    sep = text.find_last_of("xX");
    sep_len = 1;
  }
  if (sep == std::string_view::npos || sep == 0) {
    fail(ErrorKind::invalid_argument, "synthetic spec must look like CLASSES\xC3\x97N, got '" + std::string(text) + "'");
  }
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      fail(ErrorKind::invalid_argument, "bad number '" + std::string(s) + "' in synthetic spec");
    }
    return v;
  };
  SyntheticSpec spec;
  spec.per_class = parse_int(text.substr(sep + sep_len));
  if (spec.per_class < 2) fail(ErrorKind::invalid_argument, "synthetic spec needs at least 2 models per class");
  const std::string_view classes = text.substr(0, sep);
  if (classes.find_first_not_of("0123456789") == std::string_view::npos) {
    const int n = parse_int(classes);
    const ShapeKind all[] = {ShapeKind::box, ShapeKind::sphere, ShapeKind::pyramid, ShapeKind::cylinder, ShapeKind::torus};
    if (n < 1 || n > 5) fail(ErrorKind::invalid_argument, "synthetic class count must lie in 1..5");
    spec.kinds.assign(all, all + n);
  } else {
    std::size_t pos = 0;
    while (pos <= classes.size()) {
      auto end = classes.find(',', pos);
      if (end == std::string_view::npos) end = classes.size();
      std::string_view name = classes.substr(pos, end - pos);
      while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
      while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
      const ShapeKind kind = parse_shape_kind(name);
      if (std::find(spec.kinds.begin(), spec.kinds.end(), kind) != spec.kinds.end()) {
        fail(ErrorKind::invalid_argument, "shape kind '" + std::string(name) + "' listed twice");
      }
      spec.kinds.push_back(kind);
      pos = end + 1;
    }
  }
  return spec;
}

namespace {

TriangleMesh random_shape(ShapeKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  switch (kind) {
    case ShapeKind::box:
      return shapes::box(Vec3(range(0.5, 1.0), range(0.5, 1.0), range(0.5, 1.0)));
    case ShapeKind::sphere: {
      TriangleMesh m = shapes::icosphere(std::uniform_int_distribution<int>(1, 3)(rng));
      const Vec3 s(range(0.9, 1.1), range(0.9, 1.1), range(0.9, 1.1));
      for (auto& v : m.vertices) v = v.cwiseProduct(s);
      return m;
    }
    case ShapeKind::pyramid:
      return shapes::pyramid(range(0.6, 1.0), range(0.6, 1.0));
    case ShapeKind::cylinder:
      return shapes::cylinder(std::uniform_int_distribution<int>(12, 32)(rng), range(0.25, 0.5), range(0.6, 1.0));
    case ShapeKind::torus:
      return shapes::torus(std::uniform_int_distribution<int>(16, 32)(rng), std::uniform_int_distribution<int>(8, 16)(rng),
                           range(0.5, 0.7), range(0.15, 0.3));
  }
  fail(ErrorKind::invalid_argument, "unknown shape kind");
}

}  // namespace

DatasetManifest make_synthetic_dataset(const std::vector<ShapeKind>& kinds, int per_class, std::uint64_t seed,
                                       const fs::path& out_dir) {
  if (per_class < 2) fail(ErrorKind::invalid_argument, "per_class must be >= 2");
  if (kinds.empty()) fail(ErrorKind::invalid_argument, "no shape kinds requested");
  std::set<ShapeKind> unique(kinds.begin(), kinds.end());
  if (unique.size() != kinds.size()) fail(ErrorKind::invalid_argument, "duplicate shape kind");

  DatasetManifest manifest;
  manifest.root = out_dir;
  const int train_count = std::clamp(static_cast<int>(std::lround(0.8 * per_class)), 1, per_class - 1);
  for (ShapeKind kind : kinds) {
    const std::string label(to_string(kind));
    std::mt19937_64 rng(derive_seed(seed, "synthetic/" + label));
    for (int i = 0; i < per_class; ++i) {
      TriangleMesh mesh = random_shape(kind, rng);
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%04d", label.c_str(), i);
      ManifestEntry entry;
      entry.model_id = id;
      entry.label = label;
      entry.split = i < train_count ? Split::train : Split::test;
      entry.path = label + "/" + std::string(to_string(entry.split)) + "/" + entry.model_id + ".off";
      write_file_atomic(out_dir / entry.path, write_off(mesh));
      manifest.entries.push_back(std::move(entry));
    }
  }
  refresh_classes(manifest);
  validate_manifest(manifest);
  write_file_atomic(out_dir / "manifest.jsonl", write_manifest_jsonl(manifest));
  return manifest;
}

std::string write_manifest_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["model_id"] = e.model_id;
    j["label"] = e.label;
    j["split"] = to_string(e.split);
    j["path"] = e.path;
    out += j.dump() + "\n";
  }
  return out;
}

DatasetManifest parse_manifest_jsonl(std::string_view text, const fs::path& root) {
  DatasetManifest manifest;
  manifest.root = root;
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
      ManifestEntry e;
      e.model_id = j.at("model_id").get<std::string>();
      e.label = j.at("label").get<std::string>();
      e.split = parse_split(j.at("split").get<std::string>());
      e.path = j.at("path").get<std::string>();
      manifest.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(line, std::string("bad manifest entry: ") + ex.what());
    }
  }
  refresh_classes(manifest);
  return manifest;
}

DatasetManifest load_manifest(const fs::path& manifest_path) {
  if (!fs::is_regular_file(manifest_path)) fail(ErrorKind::not_found, "manifest not found: " + manifest_path.string());
  return parse_manifest_jsonl(read_text_file(manifest_path), manifest_path.parent_path());
}

DatasetManifest carve_validation(const DatasetManifest& manifest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorKind::invalid_argument, "validation fraction must lie in (0, 1)");
  DatasetManifest out = manifest;
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    if (out.entries[i].split == Split::train) by_class[out.entries[i].label].push_back(i);
  }
  for (auto& [label, idx] : by_class) {
    std::mt19937_64 rng(derive_seed(seed, "validation/" + label));
    std::shuffle(idx.begin(), idx.end(), rng);
    // keep at least one training model per class
    const auto take = std::min(idx.size() - 1, static_cast<std::size_t>(std::lround(fraction * idx.size())));
    for (std::size_t k = 0; k < take; ++k) out.entries[idx[k]].split = Split::val;
  }
  return out;
}

}  // namespace fusionnet
