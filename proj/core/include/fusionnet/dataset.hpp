#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fusionnet {

enum class Split { train, val, test };

[[nodiscard]] std::string_view to_string(Split split);
[[nodiscard]] Split parse_split(std::string_view text);

struct ManifestEntry {
  std::string model_id;
  std::string label;
  Split split = Split::train;
  std::string path;  // relative to DatasetManifest::root

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> classes;  // sorted

  [[nodiscard]] int class_index(std::string_view label) const;
  [[nodiscard]] std::filesystem::path mesh_path(const ManifestEntry& e) const { return root / e.path; }
  [[nodiscard]] std::vector<ManifestEntry> select(Split split) const;
};

// Unique ids, every class has at least one train and one test entry (val counts as train).
void validate_manifest(const DatasetManifest& manifest);

// Rebuilds the sorted class list from the entries.
void refresh_classes(DatasetManifest& manifest);

// ModelNet layout: <root>/<class>/{train,test}/*.off. Every OFF file is parsed;
// unparseable ones are collected and reported together.
[[nodiscard]] DatasetManifest ingest_modelnet(const std::filesystem::path& root);

enum class ShapeKind { box, sphere, pyramid, cylinder, torus };

[[nodiscard]] std::string_view to_string(ShapeKind kind);
[[nodiscard]] ShapeKind parse_shape_kind(std::string_view text);

struct SyntheticSpec {
  std::vector<ShapeKind> kinds;
  int per_class = 0;
};

// "CLASSES×N" or "CLASSESxN", where CLASSES is a comma-separated list of shape
// kinds or a count taking the first kinds in box, sphere, pyramid, cylinder, torus order.
[[nodiscard]] SyntheticSpec parse_synthetic_spec(std::string_view text);

// Procedural meshes in ModelNet layout under `out_dir`, with manifest.jsonl.
// Per class, the first round(0.8 * per_class) models (at least one, leaving at
// least one) form the train split.
[[nodiscard]] DatasetManifest make_synthetic_dataset(const std::vector<ShapeKind>& kinds, int per_class,
                                                     std::uint64_t seed, const std::filesystem::path& out_dir);

// JSON lines: {"model_id", "label", "split", "path"}.
[[nodiscard]] std::string write_manifest_jsonl(const DatasetManifest& manifest);
[[nodiscard]] DatasetManifest parse_manifest_jsonl(std::string_view text, const std::filesystem::path& root);
[[nodiscard]] DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

// Moves a stratified `fraction` of each class's train entries to the val split,
// chosen by a seeded shuffle. Test entries are never touched.
[[nodiscard]] DatasetManifest carve_validation(const DatasetManifest& manifest, double fraction, std::uint64_t seed);

}  // namespace fusionnet
