#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fusionnet/io_util.hpp"
#include "fusionnet/mesh_io.hpp"

namespace fusionnet {

inline constexpr int kDefaultVoxelResolution = 30;

// Binary occupancy, x fastest, then y, then z.
struct VoxelGrid {
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> bits;  // one 0/1 byte per voxel

  VoxelGrid() = default;
  VoxelGrid(int nx, int ny, int nz);
  explicit VoxelGrid(int resolution) : VoxelGrid(resolution, resolution, resolution) {}

  [[nodiscard]] std::size_t size() const { return bits.size(); }
  [[nodiscard]] std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * z);
  }
  [[nodiscard]] bool at(int x, int y, int z) const { return bits[index(x, y, z)] != 0; }
  void set(int x, int y, int z, bool value = true) { bits[index(x, y, z)] = value ? 1 : 0; }
  [[nodiscard]] std::size_t occupied_count() const;

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;
};

// Closed-box / triangle overlap by the separating-axis theorem (13 axes).
[[nodiscard]] bool triangle_box_overlap(const Vec3& box_center, double half_size, const Vec3& a,
                                        const Vec3& b, const Vec3& c);

// Marks every voxel of the [-0.5, 0.5]^3 cube whose closed box touches a
// triangle. Each triangle is only tested against voxels within its bounding box.
[[nodiscard]] VoxelGrid voxelize_surface(const TriangleMesh& mesh,
                                         int resolution = kDefaultVoxelResolution);

inline constexpr std::size_t kVoxelCacheHeaderSize = 16;

[[nodiscard]] Bytes write_voxel_cache(const VoxelGrid& grid);
[[nodiscard]] VoxelGrid read_voxel_cache(std::span<const std::uint8_t> bytes);

}  // namespace fusionnet
