#include "ifind/surface/mesh.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ifind/common/error.hpp"

namespace ifind::surface {

namespace {

constexpr double kMinArea = 1e-14;  // m^2

class OffTokenizer {
 public:
  explicit OffTokenizer(std::string_view text) : text_(text) {}

  std::string_view next() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    if (pos_ >= text_.size()) throw Error(ErrorCode::ParseError, "OFF: unexpected end of file");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  template <class T>
  T number() {
    const auto tok = next();
    T value{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw Error(ErrorCode::ParseError, "OFF: bad number '" + std::string(tok) + "'");
    return value;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.empty() || triangles_.empty())
    throw Error(ErrorCode::DegenerateMesh, "mesh has no vertices or no triangles");
  for (const auto& v : vertices_) centroid_ += v;
  centroid_ /= static_cast<double>(vertices_.size());

  face_normals_.reserve(triangles_.size());
  double orientation = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (auto idx : triangles_[t])
      if (idx >= vertices_.size())
        throw Error(ErrorCode::DegenerateMesh, "triangle " + std::to_string(t) + " references vertex " +
                                                   std::to_string(idx) + " of " +
                                                   std::to_string(vertices_.size()));
    Vec3 a, b, c;
    triangle_corners(t, a, b, c);
    const Vec3 cross = (b - a).cross(c - a);
    const double area = 0.5 * cross.norm();
    if (!(area > kMinArea))
      throw Error(ErrorCode::DegenerateMesh, "triangle " + std::to_string(t) + " has zero area");
    face_normals_.push_back(cross / (2.0 * area));
    orientation += cross.dot((a + b + c) / 3.0 - centroid_);
  }
  // Winding is trusted to be consistent; a globally inward mesh is flipped.
  if (orientation < 0.0) {
    for (auto& tri : triangles_) std::swap(tri[1], tri[2]);
    for (auto& n : face_normals_) n = -n;
  }

  vertex_normals_.assign(vertices_.size(), Vec3::Zero());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    Vec3 a, b, c;
    triangle_corners(t, a, b, c);
    const Vec3 weighted = (b - a).cross(c - a);  // |cross| = 2 * area
    for (auto idx : triangles_[t]) vertex_normals_[idx] += weighted;
  }
  for (auto& n : vertex_normals_) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
  }
}

void SurfaceMesh::triangle_corners(std::size_t id, Vec3& a, Vec3& b, Vec3& c) const {
  const auto& t = triangles_[id];
  a = vertices_[t[0]];
  b = vertices_[t[1]];
  c = vertices_[t[2]];
}

SurfaceMesh parse_off(std::string_view text) {
  OffTokenizer tok(text);
  const auto header = tok.next();
  if (header != "OFF") throw Error(ErrorCode::ParseError, "OFF: missing 'OFF' header");
  const auto nv = tok.number<long long>();
  const auto nf = tok.number<long long>();
  tok.number<long long>();  // edge count, unused
  if (nv <= 0 || nf <= 0) throw Error(ErrorCode::ParseError, "OFF: counts must be positive");

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    const double x = tok.number<double>();
    const double y = tok.number<double>();
    const double z = tok.number<double>();
    vertices.emplace_back(x, y, z);
  }
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(nf));
  for (long long f = 0; f < nf; ++f) {
    const auto k = tok.number<long long>();
    if (k != 3) throw Error(ErrorCode::ParseError, "OFF: only triangular faces are supported");
    Triangle t{};
    for (auto& idx : t) {
      const auto v = tok.number<long long>();
      if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::DegenerateMesh, "OFF: vertex index out of range");
      idx = static_cast<std::uint32_t>(v);
    }
    triangles.push_back(t);
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open mesh file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_off(buf.str());
}

std::string to_off(const SurfaceMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertices().size()) + " " + std::to_string(mesh.triangles().size()) +
         " 0\n";
  char line[128];
  for (const auto& v : mesh.vertices()) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out += line;
  }
  for (const auto& t : mesh.triangles()) {
    std::snprintf(line, sizeof line, "3 %u %u %u\n", t[0], t[1], t[2]);
    out += line;
  }
  return out;
}

void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write mesh file " + path.string());
  out << to_off(mesh);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

SurfacePoint closest_point(const SurfaceMesh& mesh, const Vec3& p) {
  SurfacePoint best;
  double best_sq = std::numeric_limits<double>::infinity();
  Vec3 a, b, c;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    mesh.triangle_corners(t, a, b, c);
    const Vec3 q = closest_point_on_triangle(p, a, b, c);
    const double d2 = (q - p).squaredNorm();
    if (d2 < best_sq) {
      best_sq = d2;
      best.point = q;
      best.triangle = t;
    }
  }
  best.normal = mesh.face_normals()[best.triangle];
  best.distance = std::sqrt(best_sq);
  return best;
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-15;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < kEps) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qv = s.cross(e1);
  const double v = inv * dir.dot(qv);
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = inv * e2.dot(qv);
  if (t > 0.0) return t;
  return std::nullopt;
}

std::optional<double> raycast(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& direction) {
  std::optional<double> best;
  Vec3 a, b, c;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    mesh.triangle_corners(t, a, b, c);
    if (auto hit = ray_triangle(origin, direction, a, b, c); hit && (!best || *hit < *best))
      best = hit;
  }
  return best;
}

}  // namespace ifind::surface
