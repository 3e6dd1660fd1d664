#include "fusionnet/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fusionnet/error.hpp"
#include "fusionnet/shapes.hpp"

namespace fusionnet {

CameraRig make_camera_rig(int image_size) {
  if (image_size < 16) fail(ErrorKind::invalid_argument, "image size must be >= 16");
  CameraRig rig;
  rig.image_size = image_size;
  const TriangleMesh ico = shapes::icosahedron();
  rig.positions.reserve(ico.faces.size());
  for (const auto& f : ico.faces) {
    rig.positions.push_back((ico.vertices[f[0]] + ico.vertices[f[1]] + ico.vertices[f[2]]).normalized());
  }
  return rig;
}

CameraFrame camera_frame(const CameraRig& rig, int view_index) {
  if (view_index < 0 || view_index >= static_cast<int>(rig.positions.size())) {
    fail(ErrorKind::invalid_argument, "view index " + std::to_string(view_index) + " out of range");
  }
  CameraFrame frame;
  frame.toward_camera = rig.positions[static_cast<std::size_t>(view_index)].normalized();
  Vec3 right = rig.up.cross(frame.toward_camera);
  if (right.norm() < 1e-9) right = Vec3::UnitY().cross(frame.toward_camera);
  frame.right = right.normalized();
  frame.up = frame.toward_camera.cross(frame.right);
  return frame;
}

namespace {

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

ViewImage render_view(const TriangleMesh& mesh, const CameraRig& rig, int view_index) {
  if (mesh.faces.empty() || mesh.vertices.empty()) fail(ErrorKind::invalid_argument, "cannot render an empty mesh");
  const CameraFrame frame = camera_frame(rig, view_index);
  const int size = rig.image_size;
  const double scale = 0.5 * size / rig.half_extent;

  struct Projected {
    double x, y, depth;
  };
  std::vector<Projected> proj(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& p = mesh.vertices[i];
    proj[i] = {0.5 * size + p.dot(frame.right) * scale, 0.5 * size - p.dot(frame.up) * scale,
               -p.dot(frame.toward_camera)};
  }

  ViewImage img;
  img.size = size;
  img.view_index = view_index;
  img.pixels.assign(static_cast<std::size_t>(size) * size, 0.0f);
  std::vector<double> zbuf(img.pixels.size(), std::numeric_limits<double>::infinity());

  const Vec3& light = frame.toward_camera;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    Vec3 n = (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
    const double len = n.norm();
    if (len == 0.0) continue;
    n /= len;
    if (n.dot(frame.toward_camera) < 0.0) n = -n;
    const double ndotl = std::max(0.0, n.dot(light));
    const Vec3 reflected = 2.0 * n.dot(light) * n - light;
    const double rdotv = std::max(0.0, reflected.dot(frame.toward_camera));
    const double shade = std::clamp(kPhong.ambient + kPhong.diffuse * ndotl +
                                        kPhong.specular * std::pow(rdotv, kPhong.shininess),
                                    0.0, 1.0);

    Projected p0 = proj[f[0]], p1 = proj[f[1]], p2 = proj[f[2]];
    double area = edge(p0.x, p0.y, p1.x, p1.y, p2.x, p2.y);
    if (area == 0.0) continue;
    if (area < 0.0) {
      std::swap(p1, p2);
      area = -area;
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({p0.x, p1.x, p2.x}))));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({p0.x, p1.x, p2.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({p0.y, p1.y, p2.y}))));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({p0.y, p1.y, p2.y}))));
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double w0 = edge(p1.x, p1.y, p2.x, p2.y, px, py);
        const double w1 = edge(p2.x, p2.y, p0.x, p0.y, px, py);
        const double w2 = edge(p0.x, p0.y, p1.x, p1.y, px, py);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double depth = (w0 * p0.depth + w1 * p1.depth + w2 * p2.depth) / area;
        const std::size_t idx = static_cast<std::size_t>(y) * size + x;
        if (depth < zbuf[idx]) {
          zbuf[idx] = depth;
          img.pixels[idx] = static_cast<float>(shade);
        }
      }
    }
  }
  return img;
}

std::vector<ViewImage> render_all_views(const TriangleMesh& mesh, const CameraRig& rig) {
  std::vector<ViewImage> views;
  views.reserve(rig.positions.size());
  for (int v = 0; v < static_cast<int>(rig.positions.size()); ++v) views.push_back(render_view(mesh, rig, v));
  return views;
}

RgbImage replicate_channels(const ViewImage& img) {
  RgbImage out;
  out.size = img.size;
  out.data.reserve(img.pixels.size() * 3);
  for (int c = 0; c < 3; ++c) out.data.insert(out.data.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

std::uint8_t quantize_intensity(float v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::nearbyint(255.0 * clamped));
}

Bytes write_pgm(const ViewImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.size) + " " + std::to_string(img.size) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels.size());
  for (float v : img.pixels) out.push_back(quantize_intensity(v));
  return out;
}

ViewImage read_pgm(std::span<const std::uint8_t> bytes, int view_index) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  if (next_token() != "P5") fail(ErrorKind::format, "not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    fail(ErrorKind::format, "malformed PGM header");
  }
  if (w <= 0 || w != h) fail(ErrorKind::format, "PGM must be square");
  if (maxval != 255) fail(ErrorKind::format, "PGM maxval must be 255");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) fail(ErrorKind::format, "PGM truncated");
  ViewImage img;
  img.size = w;
  img.view_index = view_index;
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<float>(bytes[pos + i]) / 255.0f;
  return img;
}

}  // namespace fusionnet
