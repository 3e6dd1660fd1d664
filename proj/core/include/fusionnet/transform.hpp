#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fusionnet/mesh_io.hpp"

namespace fusionnet {

using Mat3 = Eigen::Matrix3d;

// One object pose: theta in [0, pi] tilts away from the gravity (z) axis,
// phi in [0, 2*pi) spins about it.
struct Orientation {
  double theta = 0.0;
  double phi = 0.0;

  friend bool operator==(const Orientation&, const Orientation&) = default;
};

struct OrientationSet {
  std::vector<Orientation> orientations;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t count() const { return orientations.size(); }
};

inline constexpr int kDefaultOrientationCount = 60;

[[nodiscard]] OrientationSet sample_orientations(int count, std::uint64_t seed);

// Seed for a model's orientation set, derived from the run seed and model id.
[[nodiscard]] std::uint64_t orientation_seed(std::uint64_t global_seed, std::string_view model_id);

// R = Rx(theta) * Rz(phi).
[[nodiscard]] Mat3 rotation_matrix(const Orientation& o);

[[nodiscard]] TriangleMesh apply_rotation(const TriangleMesh& mesh, const Orientation& o);
[[nodiscard]] TriangleMesh apply_matrix(const TriangleMesh& mesh, const Mat3& r);

// "index theta phi" per line, radians at 9 significant digits.
[[nodiscard]] std::string write_orientation_manifest(const OrientationSet& set);
[[nodiscard]] OrientationSet parse_orientation_manifest(std::string_view text);

}  // namespace fusionnet
