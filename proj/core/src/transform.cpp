#include "fusionnet/transform.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

OrientationSet sample_orientations(int count, std::uint64_t seed) {
  if (count < 1) fail(ErrorKind::invalid_argument, "orientation count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> polar(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
  OrientationSet set;
  set.seed = seed;
  set.orientations.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Orientation o;
    o.theta = polar(rng);
    o.phi = azimuth(rng);
    set.orientations.push_back(o);
  }
  return set;
}

std::uint64_t orientation_seed(std::uint64_t global_seed, std::string_view model_id) {
  return derive_seed(global_seed, std::string("orientations/") + std::string(model_id));
}

Mat3 rotation_matrix(const Orientation& o) {
  const double ct = std::cos(o.theta), st = std::sin(o.theta);
  const double cp = std::cos(o.phi), sp = std::sin(o.phi);
  Mat3 rx;
  rx << 1, 0, 0,
        0, ct, -st,
        0, st, ct;
  Mat3 rz;
  rz << cp, -sp, 0,
        sp, cp, 0,
        0, 0, 1;
  return rx * rz;
}

TriangleMesh apply_matrix(const TriangleMesh& mesh, const Mat3& r) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = r * v;
  return out;
}

TriangleMesh apply_rotation(const TriangleMesh& mesh, const Orientation& o) {
  return apply_matrix(mesh, rotation_matrix(o));
}

std::string write_orientation_manifest(const OrientationSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.orientations.size(); ++i) {
    const auto& o = set.orientations[i];
    out += std::to_string(i) + " " + format_real(o.theta) + " " + format_real(o.phi) + "\n";
  }
  return out;
}

OrientationSet parse_orientation_manifest(std::string_view text) {
  OrientationSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::size_t index = 0;
    Orientation o;
    if (!(fields >> index >> o.theta >> o.phi)) throw ParseError(lineno, "expected 'index theta phi'");
    if (index != set.orientations.size()) throw ParseError(lineno, "orientation index out of sequence");
    set.orientations.push_back(o);
  }
  return set;
}

}  // namespace fusionnet
