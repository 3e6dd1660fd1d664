#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "fusionnet/error.hpp"
#include "fusionnet/mesh_io.hpp"
#include "fusionnet/shapes.hpp"

using namespace fusionnet;

namespace {

std::string cube_off_with_quads() {
  std::string s = "OFF\n8 6 0\n";
  for (int i = 0; i < 8; ++i) {
    s += std::to_string(i & 1) + " " + std::to_string((i >> 1) & 1) + " " + std::to_string((i >> 2) & 1) + "\n";
  }
  s += "4 0 2 3 1\n4 4 5 7 6\n4 0 1 5 4\n4 2 6 7 3\n4 0 4 6 2\n4 1 3 7 5\n";
  return s;
}

int error_line(const std::string& text) {
  try {
    (void)parse_off(text);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

}  // namespace

TEST(ParseOff, MinimalTriangle) {
  const TriangleMesh m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2");
  EXPECT_EQ(m.vertices.size(), 3u);
  ASSERT_EQ(m.faces.size(), 1u);
  EXPECT_EQ(m.faces[0], (Face{0, 1, 2}));
}

TEST(ParseOff, QuadCubeFanTriangulates) {
  const TriangleMesh m = parse_off(cube_off_with_quads());
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_EQ(m.faces.size(), 12u);
  // fan from the first polygon vertex
  EXPECT_EQ(m.faces[0], (Face{0, 2, 3}));
  EXPECT_EQ(m.faces[1], (Face{0, 3, 1}));
}

TEST(ParseOff, PentagonGivesThreeTriangles) {
  const TriangleMesh m = parse_off("OFF\n5 1 0\n0 0 0\n1 0 0\n1 1 0\n0.5 1.5 0\n0 1 0\n5 0 1 2 3 4\n");
  EXPECT_EQ(m.faces.size(), 3u);
}

TEST(ParseOff, HeaderFusedWithCounts) {
  const TriangleMesh m = parse_off("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(m.faces.size(), 1u);
  const TriangleMesh n = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(n.vertices.size(), 3u);
}

TEST(ParseOff, HeaderOptionalAndCommentsSkipped) {
  const TriangleMesh m = parse_off("# made by hand\n3 1 0\n\n0 0 0\n1 0 0 # trailing\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(m.vertices.size(), 3u);
  EXPECT_DOUBLE_EQ(m.vertices[1].x(), 1.0);
}

TEST(ParseOff, IndexOutOfRangeNamesLine) {
  EXPECT_EQ(error_line("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 99\n"), 6);
  try {
    (void)parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 99\n");
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
}

TEST(ParseOff, NonNumericToken) { EXPECT_EQ(error_line("OFF\n3 1 0\n0 0 0\n1 zero 0\n0 1 0\n3 0 1 2\n"), 4); }

TEST(ParseOff, TruncatedFile) {
  EXPECT_GT(error_line("OFF\n3 1 0\n0 0 0\n1 0 0\n"), 0);
  EXPECT_GT(error_line("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"), 0);
}

TEST(ParseOff, MalformedHeader) {
  EXPECT_EQ(error_line("PLY\n3 1 0\n"), 1);
  EXPECT_EQ(error_line("OFF\n3 x 0\n"), 2);
  EXPECT_EQ(error_line(""), 1);
}

TEST(ParseOff, PolygonWithTooFewVertices) { EXPECT_EQ(error_line("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n"), 6); }

TEST(WriteOff, HeaderAndRoundTrip) {
  const TriangleMesh tri = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2");
  EXPECT_EQ(write_off(tri).rfind("OFF\n3 1 0", 0), 0u);

  TriangleMesh cube = shapes::box(Vec3(0.3, 0.7, 1.1));
  for (auto& v : cube.vertices) v += Vec3(0.123456789, -3.3333333, 1e-3);
  const TriangleMesh back = parse_off(write_off(cube));
  ASSERT_EQ(back.vertices.size(), cube.vertices.size());
  EXPECT_EQ(back.faces, cube.faces);
  for (std::size_t i = 0; i < cube.vertices.size(); ++i) {
    EXPECT_LT((back.vertices[i] - cube.vertices[i]).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ValidateMesh, RejectsBrokenInvariants) {
  TriangleMesh m = shapes::box(Vec3(1, 1, 1));
  EXPECT_NO_THROW(validate_mesh(m));
  TriangleMesh repeated = m;
  repeated.faces[0] = {1, 1, 2};
  EXPECT_THROW(validate_mesh(repeated), Error);
  TriangleMesh out_of_range = m;
  out_of_range.faces[0] = {0, 1, 8};
  EXPECT_THROW(validate_mesh(out_of_range), Error);
  TriangleMesh no_faces = m;
  no_faces.faces.clear();
  EXPECT_THROW(validate_mesh(no_faces), Error);
}

TEST(Jitter, ZeroSigmaIsIdentity) {
  const TriangleMesh m = shapes::icosphere(2);
  const TriangleMesh j = jitter_mesh(m, {0.0, 42});
  EXPECT_EQ(j.faces, m.faces);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_EQ(j.vertices[i], m.vertices[i]);
}

TEST(Jitter, StatisticsMatchSigma) {
  TriangleMesh m;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 10000; ++i) m.vertices.emplace_back(u(rng), u(rng), u(rng));
  m.faces.push_back({0, 1, 2});
  const TriangleMesh j = jitter_mesh(m, {5.0, 1234});
  double sum = 0.0, sq = 0.0;
  const std::size_t n = 3 * m.vertices.size();
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const Vec3 d = j.vertices[i] - m.vertices[i];
    sum += d.sum();
    sq += d.squaredNorm();
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_LT(std::abs(mean), 0.2);
  EXPECT_LT(std::abs(sd - 5.0), 0.2);
  EXPECT_EQ(j.faces, m.faces);
}

TEST(Jitter, SameSeedReproducible) {
  const TriangleMesh m = shapes::torus(12, 8, 0.6, 0.2);
  const TriangleMesh a = jitter_mesh(m, {0.01, 9});
  const TriangleMesh b = jitter_mesh(m, {0.01, 9});
  const TriangleMesh c = jitter_mesh(m, {0.01, 10});
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_NE(a.vertices, c.vertices);
}

TEST(Jitter, NegativeSigmaRejected) { EXPECT_THROW((void)jitter_mesh(shapes::icosahedron(), {-1.0, 0}), Error); }

TEST(Normalize, UnitCubeFillsBox) {
  TriangleMesh cube = shapes::box(Vec3(1, 1, 1));
  for (auto& v : cube.vertices) v += Vec3(0.5, 0.5, 0.5);  // [0,1]^3
  const BoundingBox bb = bounding_box(normalize_mesh(cube, 0.0));
  EXPECT_NEAR(bb.min.minCoeff(), -0.5, 1e-12);
  EXPECT_NEAR(bb.max.maxCoeff(), 0.5, 1e-12);
  EXPECT_NEAR(bb.min.maxCoeff(), -0.5, 1e-12);
}

TEST(Normalize, ElongatedBoxKeepsAspect) {
  const BoundingBox bb = bounding_box(normalize_mesh(shapes::box(Vec3(2, 1, 1)), 0.05));
  const Vec3 e = bb.extent();
  EXPECT_NEAR(e.x(), 0.9, 1e-9);
  EXPECT_NEAR(e.y(), 0.45, 1e-9);
  EXPECT_NEAR(e.z(), 0.45, 1e-9);
  EXPECT_NEAR((bb.min + bb.max).norm(), 0.0, 1e-12);
}

TEST(Normalize, IdempotentAndLongestAxis) {
  TriangleMesh m = shapes::torus(20, 10, 3.0, 1.0);
  for (auto& v : m.vertices) v = v.cwiseProduct(Vec3(1.0, 0.4, 2.0)) + Vec3(7, -2, 3);
  const TriangleMesh once = normalize_mesh(m);
  const TriangleMesh twice = normalize_mesh(once);
  EXPECT_NEAR(bounding_box(once).extent().maxCoeff(), 0.9, 1e-9);
  for (std::size_t i = 0; i < once.vertices.size(); ++i) {
    EXPECT_LT((once.vertices[i] - twice.vertices[i]).norm(), 1e-9);
  }
}

TEST(Normalize, DegenerateRejected) {
  TriangleMesh m;
  m.vertices = {Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)};
  m.faces = {{0, 1, 2}};
  EXPECT_THROW((void)normalize_mesh(m), Error);
}

TEST(Shapes, ClosedMeshesHaveEulerCharacteristic) {
  auto check = [](const TriangleMesh& m, long expected, const char* what) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const auto& f : m.faces) {
      for (int i = 0; i < 3; ++i) {
        const auto a = f[i], b = f[(i + 1) % 3];
        ++edges[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [e, n] : edges) ASSERT_EQ(n, 2) << what << " edge " << e.first << "-" << e.second;
    const long chi = static_cast<long>(m.vertices.size()) - static_cast<long>(edges.size()) +
                     static_cast<long>(m.faces.size());
    EXPECT_EQ(chi, expected) << what;
  };
  for (int sub = 0; sub <= 3; ++sub) check(shapes::icosphere(sub), 2, "icosphere");
  check(shapes::box(Vec3(1, 2, 3)), 2, "box");
  check(shapes::pyramid(1, 1), 2, "pyramid");
  check(shapes::cylinder(16, 0.5, 1), 2, "cylinder");
  check(shapes::torus(16, 8, 0.6, 0.2), 0, "torus");
}
