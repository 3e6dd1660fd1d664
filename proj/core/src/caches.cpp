#include "fusionnet/caches.hpp"

#include <atomic>
#include <cstdio>
#include <optional>
#include <thread>

#include <json.hpp>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"
#include "fusionnet/mesh_io.hpp"
#include "fusionnet/renderer.hpp"
#include "fusionnet/transform.hpp"
#include "fusionnet/voxelizer.hpp"

namespace fusionnet {

namespace fs = std::filesystem;

void validate_cache_config(const CacheConfig& cfg) {
  if (cfg.orientations < 1) fail(ErrorKind::invalid_argument, "orientation count must be >= 1");
  if (cfg.resolution < 2 || cfg.resolution > 65535) fail(ErrorKind::invalid_argument, "resolution out of range");
  if (cfg.image_size < 16) fail(ErrorKind::invalid_argument, "image size must be >= 16");
  if (cfg.jitter_copies < 0) fail(ErrorKind::invalid_argument, "jitter copies must be >= 0");
  if (!(cfg.jitter_sigma >= 0.0)) fail(ErrorKind::invalid_argument, "jitter sigma must be >= 0");
  if (cfg.jobs < 1) fail(ErrorKind::invalid_argument, "jobs must be >= 1");
}

namespace {

std::string numbered(const std::string& model_id, const char* tag, int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%s%02d%s", tag, index, ext);
  return model_id + buf;
}

nlohmann::ordered_json config_json(const CacheConfig& cfg) {
  nlohmann::ordered_json j;
  j["orientations"] = cfg.orientations;
  j["resolution"] = cfg.resolution;
  j["image_size"] = cfg.image_size;
  j["seed"] = cfg.seed;
  j["jitter_copies"] = cfg.jitter_copies;
  j["jitter_sigma"] = format_real(cfg.jitter_sigma, 17);
  return j;
}

struct Staleness {
  bool voxels = true;
  bool views = true;
  bool jitter = true;
};

Staleness compare_configs(const std::optional<CacheConfig>& old, const CacheConfig& cfg) {
  if (!old) return {};
  Staleness s;
  s.voxels = old->orientations != cfg.orientations || old->resolution != cfg.resolution || old->seed != cfg.seed;
  s.views = old->image_size != cfg.image_size;
  s.jitter = s.voxels || old->jitter_sigma != cfg.jitter_sigma;
  return s;
}

struct CachedFile {
  std::string kind;
  std::string file;
  std::uint64_t hash = 0;
};

struct ModelResult {
  std::vector<CachedFile> files;
  std::size_t written = 0;
  std::size_t repaired = 0;
  std::size_t kept = 0;
  std::optional<std::string> failure;
};

// Returns the file bytes if they decode under `valid`, otherwise nothing.
template <typename Check>
std::optional<Bytes> existing_valid(const fs::path& path, Check valid) {
  if (!fs::is_regular_file(path)) return std::nullopt;
  try {
    Bytes bytes = read_file(path);
    if (valid(bytes)) return bytes;
  } catch (const Error&) {
  }
  return std::nullopt;
}

class ModelCacher {
 public:
  ModelCacher(const DatasetManifest& manifest, const CacheConfig& cfg, const fs::path& dir, Staleness stale)
      : manifest_(manifest), cfg_(cfg), dir_(dir), stale_(stale), rig_(make_camera_rig(cfg.image_size)) {}

  ModelResult run(const ManifestEntry& entry) const {
    ModelResult result;
    try {
      cache_model(entry, result);
    } catch (const std::exception& e) {
      result.failure = e.what();
    }
    return result;
  }

 private:
  void cache_model(const ManifestEntry& entry, ModelResult& result) const {
    const std::string& id = entry.model_id;
    std::optional<TriangleMesh> raw;
    std::optional<TriangleMesh> canonical;
    auto load_raw = [&]() -> const TriangleMesh& {
      if (!raw) raw = load_off(manifest_.mesh_path(entry).string());
      return *raw;
    };
    auto load_canonical = [&]() -> const TriangleMesh& {
      if (!canonical) canonical = normalize_mesh(load_raw());
      return *canonical;
    };

    const OrientationSet orientations = sample_orientations(cfg_.orientations, orientation_seed(cfg_.seed, id));
    const std::string orientation_text = write_orientation_manifest(orientations);
    store(result, "orientations", orientation_file(id), stale_.voxels,
          [&](const Bytes& b) { return std::string_view(reinterpret_cast<const char*>(b.data()), b.size()) ==
                                       orientation_text; },
          [&] { return Bytes(orientation_text.begin(), orientation_text.end()); });

    auto voxel_ok = [&](const Bytes& b) {
      const VoxelGrid g = read_voxel_cache(b);
      return g.dims == std::array<int, 3>{cfg_.resolution, cfg_.resolution, cfg_.resolution};
    };
    auto voxelize_pose = [&](const TriangleMesh& mesh, const Orientation& o) {
      // renormalize so the rotated bounding box fits the grid with the same padding
      return write_voxel_cache(voxelize_surface(normalize_mesh(apply_rotation(mesh, o)), cfg_.resolution));
    };
    for (int k = 0; k < cfg_.orientations; ++k) {
      store(result, "voxel", voxel_file(id, k), stale_.voxels, voxel_ok,
            [&] { return voxelize_pose(load_canonical(), orientations.orientations[k]); });
    }
    if (entry.split != Split::test) {
      for (int c = 0; c < cfg_.jitter_copies; ++c) {
        std::optional<TriangleMesh> jittered;
        for (int k = 0; k < cfg_.orientations; ++k) {
          store(result, "jitter", jitter_voxel_file(id, c, k), stale_.jitter, voxel_ok, [&] {
            if (!jittered) {
              const JitterConfig jc{cfg_.jitter_sigma, derive_seed(cfg_.seed, "jitter/" + id + "/" + std::to_string(c))};
              jittered = normalize_mesh(jitter_mesh(load_raw(), jc));
            }
            return voxelize_pose(*jittered, orientations.orientations[k]);
          });
        }
      }
    }
    for (int v = 0; v < kViewCount; ++v) {
      store(result, "view", view_file(id, v), stale_.views,
            [&](const Bytes& b) { return read_pgm(b, v).size == cfg_.image_size; },
            [&] { return write_pgm(render_view(load_canonical(), rig_, v)); });
    }
  }

  template <typename Check, typename Make>
  void store(ModelResult& result, const char* kind, const std::string& name, bool stale, Check valid,
             Make make) const {
    const fs::path path = dir_ / name;
    std::optional<Bytes> bytes;
    if (!stale) bytes = existing_valid(path, valid);
    if (bytes) {
      ++result.kept;
    } else {
      (fs::exists(path) ? result.repaired : result.written)++;
      bytes = make();
      write_file_atomic(path, std::span<const std::uint8_t>(*bytes));
    }
    result.files.push_back({kind, name, fnv1a64(std::span<const std::uint8_t>(*bytes))});
  }

  const DatasetManifest& manifest_;
  const CacheConfig& cfg_;
  fs::path dir_;
  Staleness stale_;
  CameraRig rig_;
};

std::optional<CacheConfig> try_load_config(const fs::path& dir) {
  try {
    return load_cache_config(dir);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::string voxel_file(const std::string& model_id, int orientation) {
  return "voxels/" + numbered(model_id, "o", orientation, ".vox");
}

std::string jitter_voxel_file(const std::string& model_id, int copy, int orientation) {
  return "voxels/" + numbered(model_id + "_j" + std::to_string(copy), "o", orientation, ".vox");
}

std::string view_file(const std::string& model_id, int view) {
  return "views/" + numbered(model_id, "v", view, ".pgm");
}

std::string orientation_file(const std::string& model_id) { return "orientations/" + model_id + ".txt"; }

CacheReport prepare_caches(const DatasetManifest& manifest, const CacheConfig& cfg, const fs::path& cache_dir) {
  validate_cache_config(cfg);
  validate_manifest(manifest);
  for (const char* sub : {"voxels", "views", "orientations"}) fs::create_directories(cache_dir / sub);

  const Staleness stale = compare_configs(try_load_config(cache_dir), cfg);
  const ModelCacher cacher(manifest, cfg, cache_dir, stale);
  std::vector<ModelResult> results(manifest.entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) results[i] = cacher.run(manifest.entries[i]);
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(std::max<std::size_t>(1, results.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  CacheReport report;
  std::string listing;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const ModelResult& r = results[i];
    const std::string& id = manifest.entries[i].model_id;
    report.files_written += r.written;
    report.files_repaired += r.repaired;
    report.files_kept += r.kept;
    if (r.failure) {
      report.failures.push_back({id, *r.failure});
      continue;
    }
    for (const auto& f : r.files) {
      nlohmann::ordered_json j;
      j["model_id"] = id;
      j["kind"] = f.kind;
      j["file"] = f.file;
      j["hash"] = hex64(f.hash);
      listing += j.dump() + "\n";
    }
  }

  auto write_if_changed = [&](const fs::path& path, const std::string& text) {
    if (fs::is_regular_file(path) && read_text_file(path) == text) return;
    write_file_atomic(path, text);
  };
  write_if_changed(cache_dir / "cache_manifest.jsonl", listing);
  write_if_changed(cache_dir / "cache_config.json", config_json(cfg).dump(2) + "\n");
  return report;
}

CacheConfig load_cache_config(const fs::path& cache_dir) {
  const fs::path path = cache_dir / "cache_config.json";
  if (!fs::is_regular_file(path)) fail(ErrorKind::not_found, "cache not prepared: " + path.string() + " not found");
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    CacheConfig cfg;
    cfg.orientations = j.at("orientations").get<int>();
    cfg.resolution = j.at("resolution").get<int>();
    cfg.image_size = j.at("image_size").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.jitter_copies = j.at("jitter_copies").get<int>();
    cfg.jitter_sigma = std::stod(j.at("jitter_sigma").get<std::string>());
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, "bad cache config " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::format, "bad cache config " + path.string() + ": jitter_sigma");
  }
}

}  // namespace fusionnet
