#include "fusionnet/voxelizer.hpp"

#include <algorithm>
#include <cmath>

#include "fusionnet/error.hpp"

namespace fusionnet {

VoxelGrid::VoxelGrid(int nx, int ny, int nz) : dims{nx, ny, nz} {
  if (nx < 1 || ny < 1 || nz < 1) fail(ErrorKind::invalid_argument, "voxel dims must be positive");
  bits.assign(static_cast<std::size_t>(nx) * ny * nz, 0);
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

// Separated along `axis` when the projected triangle interval misses [-r, r].
inline bool separated(const Vec3& axis, double h, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  const double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
  const double r = h * (std::abs(axis.x()) + std::abs(axis.y()) + std::abs(axis.z()));
  return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
}

}  // namespace

bool triangle_box_overlap(const Vec3& box_center, double h, const Vec3& a, const Vec3& b,
                          const Vec3& c) {
  const Vec3 v0 = a - box_center, v1 = b - box_center, v2 = c - box_center;

  // box face normals
  for (int k = 0; k < 3; ++k) {
    if (std::min({v0[k], v1[k], v2[k]}) > h || std::max({v0[k], v1[k], v2[k]}) < -h) return false;
  }

  const Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

  // triangle plane
  const Vec3 n = e0.cross(e1);
  const double d = n.dot(v0);
  const double r = h * (std::abs(n.x()) + std::abs(n.y()) + std::abs(n.z()));
  if (std::abs(d) > r) return false;

  // edge x box axis
  for (const Vec3* e : {&e0, &e1, &e2}) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 axis = e->cross(Vec3::Unit(k));
      if (separated(axis, h, v0, v1, v2)) return false;
    }
  }
  return true;
}

VoxelGrid voxelize_surface(const TriangleMesh& mesh, int resolution) {
  if (resolution < 1) fail(ErrorKind::invalid_argument, "resolution must be >= 1");
  if (mesh.faces.empty()) fail(ErrorKind::invalid_argument, "mesh has no triangles");
  constexpr double kSlack = 1e-9;
  for (const auto& v : mesh.vertices) {
    if (v.cwiseAbs().maxCoeff() > 0.5 + kSlack) {
      fail(ErrorKind::invalid_argument, "mesh lies outside the unit cube; normalize it first");
    }
  }

  VoxelGrid grid(resolution);
  const double res = resolution;
  const double h = 0.5 / res;
  auto cell = [&](double coord) {
    return static_cast<int>(std::floor((coord + 0.5) * res));
  };

  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 lo = a.cwiseMin(b).cwiseMin(c);
    const Vec3 hi = a.cwiseMax(b).cwiseMax(c);
    std::array<int, 3> first{}, last{};
    for (int k = 0; k < 3; ++k) {
      // one extra cell each side covers boxes that only touch the bounds
      first[k] = std::clamp(cell(lo[k]) - 1, 0, resolution - 1);
      last[k] = std::clamp(cell(hi[k]) + 1, 0, resolution - 1);
    }
    for (int z = first[2]; z <= last[2]; ++z) {
      for (int y = first[1]; y <= last[1]; ++y) {
        for (int x = first[0]; x <= last[0]; ++x) {
          const std::size_t idx = grid.index(x, y, z);
          if (grid.bits[idx]) continue;
          const Vec3 center(-0.5 + (x + 0.5) / res, -0.5 + (y + 0.5) / res,
                            -0.5 + (z + 0.5) / res);
          if (triangle_box_overlap(center, h, a, b, c)) grid.bits[idx] = 1;
        }
      }
    }
  }
  return grid;
}

namespace {
constexpr std::uint8_t kVoxelCacheVersion = 0x01;
constexpr std::size_t kMaxVoxels = std::size_t{1} << 32;
}  // namespace

Bytes write_voxel_cache(const VoxelGrid& grid) {
  for (int d : grid.dims) {
    if (d < 1 || d > 0xffff) fail(ErrorKind::invalid_argument, "voxel dims out of range for cache");
  }
  if (grid.bits.size() != static_cast<std::size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2]) {
    fail(ErrorKind::invalid_argument, "voxel bit count does not match dims");
  }
  if (grid.occupied_count() == 0) fail(ErrorKind::invalid_argument, "refusing to cache an empty grid");

  Bytes out{'V', 'O', 'X', 'B', kVoxelCacheVersion};
  for (int d : grid.dims) put_u16le(out, static_cast<std::uint16_t>(d));
  out.resize(kVoxelCacheHeaderSize, 0);
  out.resize(kVoxelCacheHeaderSize + (grid.bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < grid.bits.size(); ++i) {
    if (grid.bits[i]) out[kVoxelCacheHeaderSize + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

VoxelGrid read_voxel_cache(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kVoxelCacheHeaderSize) fail(ErrorKind::format, "voxel cache truncated header");
  if (!(bytes[0] == 'V' && bytes[1] == 'O' && bytes[2] == 'X' && bytes[3] == 'B')) {
    fail(ErrorKind::format, "voxel cache has bad magic");
  }
  if (bytes[4] != kVoxelCacheVersion) fail(ErrorKind::format, "unsupported voxel cache version");
  const std::array<int, 3> dims{get_u16le(bytes, 5), get_u16le(bytes, 7), get_u16le(bytes, 9)};
  const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  if (count == 0 || count > kMaxVoxels) fail(ErrorKind::format, "voxel cache dimension overflow");
  const std::size_t payload = (count + 7) / 8;
  if (bytes.size() < kVoxelCacheHeaderSize + payload) fail(ErrorKind::format, "voxel cache truncated payload");
  if (bytes.size() > kVoxelCacheHeaderSize + payload) fail(ErrorKind::format, "voxel cache has trailing bytes");

  VoxelGrid grid(dims[0], dims[1], dims[2]);
  for (std::size_t i = 0; i < count; ++i) {
    grid.bits[i] = (bytes[kVoxelCacheHeaderSize + i / 8] >> (i % 8)) & 1u;
  }
  return grid;
}

}  // namespace fusionnet
