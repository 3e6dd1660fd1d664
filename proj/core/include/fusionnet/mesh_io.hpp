#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fusionnet {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::string> class_label;
  std::optional<std::string> source_path;
};

struct JitterConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultPadding = 0.05;

// Throws Error(invalid_argument) when an index is out of range, a face repeats
// a vertex, or the mesh has fewer than 3 vertices or no faces.
void validate_mesh(const TriangleMesh& mesh);

// Parses OFF text. Polygons with k > 3 vertices are fan-triangulated from their
// first vertex; triangles that collapse (repeated index) are dropped. Errors are
// ParseError carrying the offending line number.
[[nodiscard]] TriangleMesh parse_off(std::string_view text);
[[nodiscard]] TriangleMesh load_off(const std::string& path);

// Emits "OFF\nV F 0\n" followed by vertices at 9 significant digits.
[[nodiscard]] std::string write_off(const TriangleMesh& mesh);

// Adds an independent N(0, sigma^2) draw to every vertex coordinate.
[[nodiscard]] TriangleMesh jitter_mesh(const TriangleMesh& mesh, const JitterConfig& cfg);

// Centers the bounding box at the origin and scales uniformly so that the
// longest axis spans (1 - 2 * padding).
[[nodiscard]] TriangleMesh normalize_mesh(const TriangleMesh& mesh, double padding = kDefaultPadding);

struct BoundingBox {
  Vec3 min;
  Vec3 max;
  [[nodiscard]] Vec3 extent() const { return max - min; }
};

[[nodiscard]] BoundingBox bounding_box(const TriangleMesh& mesh);

}  // namespace fusionnet
