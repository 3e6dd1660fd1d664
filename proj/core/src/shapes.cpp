#include "fusionnet/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "fusionnet/error.hpp"

namespace fusionnet::shapes {

TriangleMesh box(const Vec3& extent) {
  const Vec3 h = 0.5 * extent;
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                            (i & 4) ? h.z() : -h.z());
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

TriangleMesh icosahedron() {
  const double t = std::numbers::phi;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

TriangleMesh icosphere(int subdivisions) {
  if (subdivisions < 0) fail(ErrorKind::invalid_argument, "subdivisions must be >= 0");
  TriangleMesh m = icosahedron();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const auto idx = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const auto ab = mid(f[0], f[1]);
      const auto bc = mid(f[1], f[2]);
      const auto ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  return m;
}

TriangleMesh pyramid(double base, double height) {
  const double b = 0.5 * base;
  const double z0 = -0.5 * height;
  TriangleMesh m;
  m.vertices = {{-b, -b, z0}, {b, -b, z0}, {b, b, z0}, {-b, b, z0}, {0, 0, -z0}};
  m.faces = {{0, 2, 1}, {0, 3, 2}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return m;
}

TriangleMesh cylinder(int segments, double radius, double height) {
  if (segments < 3) fail(ErrorKind::invalid_argument, "cylinder needs >= 3 segments");
  TriangleMesh m;
  const auto n = static_cast<std::uint32_t>(segments);
  const double h = 0.5 * height;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), -h);
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), h);
  }
  const std::uint32_t bottom = 2 * n;
  const std::uint32_t top = 2 * n + 1;
  m.vertices.emplace_back(0, 0, -h);
  m.vertices.emplace_back(0, 0, h);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.faces.push_back({i, j, n + j});
    m.faces.push_back({i, n + j, n + i});
    m.faces.push_back({bottom, j, i});
    m.faces.push_back({top, n + i, n + j});
  }
  return m;
}

TriangleMesh torus(int major_segments, int minor_segments, double major_radius,
                   double minor_radius) {
  if (major_segments < 3 || minor_segments < 3) {
    fail(ErrorKind::invalid_argument, "torus needs >= 3 segments per direction");
  }
  TriangleMesh m;
  const auto nu = static_cast<std::uint32_t>(major_segments);
  const auto nv = static_cast<std::uint32_t>(minor_segments);
  for (std::uint32_t i = 0; i < nu; ++i) {
    const double u = 2.0 * std::numbers::pi * i / nu;
    for (std::uint32_t j = 0; j < nv; ++j) {
      const double v = 2.0 * std::numbers::pi * j / nv;
      const double r = major_radius + minor_radius * std::cos(v);
      m.vertices.emplace_back(r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v));
    }
  }
  for (std::uint32_t i = 0; i < nu; ++i) {
    for (std::uint32_t j = 0; j < nv; ++j) {
      const std::uint32_t a = i * nv + j;
      const std::uint32_t b = ((i + 1) % nu) * nv + j;
      const std::uint32_t c = ((i + 1) % nu) * nv + (j + 1) % nv;
      const std::uint32_t d = i * nv + (j + 1) % nv;
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  return m;
}

TriangleMesh square(double half, double offset) {
  TriangleMesh m;
  m.vertices = {{-half, -half, offset}, {half, -half, offset}, {half, half, offset},
                {-half, half, offset}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace fusionnet::shapes
