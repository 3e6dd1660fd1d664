#include "fusionnet/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <random>

#include "fusionnet/error.hpp"
#include "fusionnet/io_util.hpp"

namespace fusionnet {

void validate_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.size() < 3) fail(ErrorKind::invalid_argument, "mesh has fewer than 3 vertices");
  if (mesh.faces.empty()) fail(ErrorKind::invalid_argument, "mesh has no faces");
  const auto n = mesh.vertices.size();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (auto idx : face) {
      if (idx >= n) {
        fail(ErrorKind::invalid_argument,
             "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                 " of " + std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      fail(ErrorKind::invalid_argument, "face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-blank, non-comment line split into tokens; false at end of input.
  bool next(std::vector<std::string_view>& tokens) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      tokens.clear();
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return true;
    }
    ++line_;
    return false;
  }

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "non-numeric token '" + std::string(tok) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

TriangleMesh parse_off(std::string_view text) {
  LineReader reader(text);
  std::vector<std::string_view> tok;

  if (!reader.next(tok)) throw ParseError(reader.line(), "empty file, expected OFF header");

  // Header: "OFF", "OFF V F E", or bare counts line.
  std::vector<std::string_view> counts;
  if (tok[0].starts_with("OFF")) {
    std::string_view rest = tok[0].substr(3);
    if (!rest.empty()) counts.push_back(rest);  // "OFF3 1 0" style fusion
    counts.insert(counts.end(), tok.begin() + 1, tok.end());
    if (counts.empty()) {
      if (!reader.next(tok)) throw ParseError(reader.line(), "truncated file, missing counts line");
      counts = tok;
    }
  } else {
    counts = tok;
  }
  const std::size_t counts_line = reader.line();
  if (counts.size() < 2 || counts.size() > 3) {
    throw ParseError(counts_line, "malformed header, expected 'V F E' counts");
  }
  const auto nv = parse_count(counts[0], counts_line);
  const auto nf = parse_count(counts[1], counts_line);
  if (counts.size() == 3) (void)parse_count(counts[2], counts_line);
  if (nv > std::numeric_limits<std::uint32_t>::max()) {
    throw ParseError(counts_line, "vertex count too large");
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::uint64_t i = 0; i < nv; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.line(), "truncated file, expected " + std::to_string(nv) +
                                          " vertices, got " + std::to_string(i));
    }
    if (tok.size() < 3) throw ParseError(reader.line(), "vertex line needs 3 coordinates");
    const auto line = reader.line();
    mesh.vertices.emplace_back(parse_real(tok[0], line), parse_real(tok[1], line),
                               parse_real(tok[2], line));
  }

  mesh.faces.reserve(nf);
  for (std::uint64_t i = 0; i < nf; ++i) {
    if (!reader.next(tok)) {
      throw ParseError(reader.line(), "truncated file, expected " + std::to_string(nf) +
                                          " faces, got " + std::to_string(i));
    }
    const auto line = reader.line();
    const auto k = parse_count(tok[0], line);
    if (k < 3) throw ParseError(line, "face has fewer than 3 vertices");
    if (tok.size() < k + 1) throw ParseError(line, "face line shorter than its vertex count");
    std::vector<std::uint32_t> poly(k);
    for (std::uint64_t j = 0; j < k; ++j) {
      const auto idx = parse_count(tok[j + 1], line);
      if (idx >= nv) {
        throw ParseError(line, "vertex index " + std::to_string(idx) + " out of range (" +
                                   std::to_string(nv) + " vertices)");
      }
      poly[j] = static_cast<std::uint32_t>(idx);
    }
    for (std::uint64_t j = 1; j + 1 < k; ++j) {
      Face f{poly[0], poly[j], poly[j + 1]};
      if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
      mesh.faces.push_back(f);
    }
  }

  if (mesh.vertices.size() < 3) throw ParseError(counts_line, "mesh needs at least 3 vertices");
  if (mesh.faces.empty()) throw ParseError(counts_line, "mesh has no non-degenerate faces");
  return mesh;
}

TriangleMesh load_off(const std::string& path) {
  const auto text = read_text_file(path);
  try {
    TriangleMesh mesh = parse_off(text);
    mesh.source_path = path;
    return mesh;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

std::string write_off(const TriangleMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
  for (const auto& v : mesh.vertices) {
    out += format_real(v.x()) + " " + format_real(v.y()) + " " + format_real(v.z()) + "\n";
  }
  for (const auto& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) +
           "\n";
  }
  return out;
}

TriangleMesh jitter_mesh(const TriangleMesh& mesh, const JitterConfig& cfg) {
  if (!(cfg.sigma >= 0.0)) fail(ErrorKind::invalid_argument, "jitter sigma must be >= 0");
  TriangleMesh out = mesh;
  if (cfg.sigma == 0.0) return out;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  for (auto& v : out.vertices) {
    v.x() += noise(rng);
    v.y() += noise(rng);
    v.z() += noise(rng);
  }
  return out;
}

BoundingBox bounding_box(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) fail(ErrorKind::invalid_argument, "bounding box of empty mesh");
  BoundingBox box{mesh.vertices.front(), mesh.vertices.front()};
  for (const auto& v : mesh.vertices) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh, double padding) {
  if (!(padding >= 0.0 && padding < 0.5)) {
    fail(ErrorKind::invalid_argument, "padding must lie in [0, 0.5)");
  }
  const BoundingBox box = bounding_box(mesh);
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) fail(ErrorKind::invalid_argument, "mesh has zero extent");
  const Vec3 center = 0.5 * (box.min + box.max);
  const double scale = (1.0 - 2.0 * padding) / longest;
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * scale;
  return out;
}

}  // namespace fusionnet
