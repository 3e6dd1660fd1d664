#pragma once

#include <span>
#include <vector>

#include "fusionnet/io_util.hpp"
#include "fusionnet/mesh_io.hpp"

namespace fusionnet {

inline constexpr int kViewCount = 20;
inline constexpr int kDefaultImageSize = 64;

struct PhongConstants {
  double ambient = 0.1;
  double diffuse = 0.6;
  double specular = 0.3;
  double shininess = 32.0;
};

inline constexpr PhongConstants kPhong{};

// Cameras sit on the 20 face centers of the icosahedron from shapes::icosahedron()
// (the vertices of the dual dodecahedron), looking at the origin.
struct CameraRig {
  std::vector<Vec3> positions;
  Vec3 up{0.0, 0.0, 1.0};
  int image_size = kDefaultImageSize;
  // Orthographic half-width of the frame. sqrt(3)/2 fits the bounding sphere of
  // the unit cube, so a normalized mesh spans at most 90% of the frame.
  double half_extent = 0.8660254037844386;
};

struct ViewImage {
  int size = 0;
  int view_index = 0;
  std::vector<float> pixels;  // row-major, row 0 at the top, values in [0, 1]

  [[nodiscard]] float at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * size + col];
  }
  friend bool operator==(const ViewImage&, const ViewImage&) = default;
};

// Planar channel-major 3 x size x size.
struct RgbImage {
  int size = 0;
  std::vector<float> data;
};

[[nodiscard]] CameraRig make_camera_rig(int image_size = kDefaultImageSize);

// Orthonormal camera frame for a view: right, up, and the direction toward the camera.
struct CameraFrame {
  Vec3 right;
  Vec3 up;
  Vec3 toward_camera;
};
[[nodiscard]] CameraFrame camera_frame(const CameraRig& rig, int view_index);

// Orthographic z-buffered render with flat, double-sided Phong shading and a
// directional light at the camera. Background pixels are exactly 0.
[[nodiscard]] ViewImage render_view(const TriangleMesh& mesh, const CameraRig& rig, int view_index);
[[nodiscard]] std::vector<ViewImage> render_all_views(const TriangleMesh& mesh, const CameraRig& rig);

[[nodiscard]] RgbImage replicate_channels(const ViewImage& img);

// Binary PGM (P5, maxval 255); intensities quantized as round(255 v), ties to even.
[[nodiscard]] std::uint8_t quantize_intensity(float v);
[[nodiscard]] Bytes write_pgm(const ViewImage& img);
[[nodiscard]] ViewImage read_pgm(std::span<const std::uint8_t> bytes, int view_index = 0);

}  // namespace fusionnet
