#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fusionnet/dataset.hpp"

namespace fusionnet {

struct CacheConfig {
  int orientations = 60;
  int resolution = 30;
  int image_size = 64;
  std::uint64_t seed = 0;
  // Jittered voxel copies per training model, written next to the clean ones.
  int jitter_copies = 0;
  double jitter_sigma = 0.0;  // raw model units
  int jobs = 1;

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

void validate_cache_config(const CacheConfig& cfg);

// File naming inside a cache directory.
[[nodiscard]] std::string voxel_file(const std::string& model_id, int orientation);
[[nodiscard]] std::string jitter_voxel_file(const std::string& model_id, int copy, int orientation);
[[nodiscard]] std::string view_file(const std::string& model_id, int view);
[[nodiscard]] std::string orientation_file(const std::string& model_id);

struct CacheFailure {
  std::string model_id;
  std::string message;
};

struct CacheReport {
  std::size_t files_written = 0;   // new files
  std::size_t files_repaired = 0;  // existing but invalid or stale
  std::size_t files_kept = 0;
  std::vector<CacheFailure> failures;
};

// Writes, per model, one voxel grid per orientation (plus jittered copies for
// train/val models), one image per camera of the canonical pose, the
// orientation list, and cache_manifest.jsonl with FNV-1a content hashes. Files
// that already exist and decode to the expected header are kept as they are.
CacheReport prepare_caches(const DatasetManifest& manifest, const CacheConfig& cfg,
                           const std::filesystem::path& cache_dir);

// The configuration a cache directory was prepared with (cache_config.json).
[[nodiscard]] CacheConfig load_cache_config(const std::filesystem::path& cache_dir);

}  // namespace fusionnet
