#include "ifind/surface/shapes.hpp"

#include <cmath>

namespace ifind::surface {

namespace {

// Vertex index of ring r (1-based below the apex), segment s.
std::uint32_t ring_vertex(int r, int s, int segments) {
  return static_cast<std::uint32_t>(1 + (r - 1) * segments + (s % segments));
}

}  // namespace

SurfaceMesh make_ellipsoid_dome(double semi_x, double semi_y, double semi_z, int rings,
                                int segments) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  v.emplace_back(0.0, 0.0, semi_z);
  for (int r = 1; r <= rings; ++r) {
    const double theta = 0.5 * kPi * r / rings;
    // Exactly zero height on the rim.
    const double z = r == rings ? 0.0 : semi_z * std::cos(theta);
    const double st = std::sin(theta);
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      v.emplace_back(semi_x * st * std::cos(phi), semi_y * st * std::sin(phi), z);
    }
  }
  for (int s = 0; s < segments; ++s)
    t.push_back({0, ring_vertex(1, s, segments), ring_vertex(1, s + 1, segments)});
  for (int r = 1; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const auto a = ring_vertex(r, s, segments), b = ring_vertex(r, s + 1, segments);
      const auto c = ring_vertex(r + 1, s, segments), d = ring_vertex(r + 1, s + 1, segments);
      t.push_back({a, c, d});
      t.push_back({a, d, b});
    }
  }
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh make_sphere(double radius, int rings, int segments) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  v.emplace_back(0.0, 0.0, radius);
  for (int r = 1; r < rings; ++r) {
    const double theta = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      v.emplace_back(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                     radius * std::cos(theta));
    }
  }
  const auto south = static_cast<std::uint32_t>(v.size());
  v.emplace_back(0.0, 0.0, -radius);
  for (int s = 0; s < segments; ++s)
    t.push_back({0, ring_vertex(1, s, segments), ring_vertex(1, s + 1, segments)});
  for (int r = 1; r < rings - 1; ++r) {
    for (int s = 0; s < segments; ++s) {
      const auto a = ring_vertex(r, s, segments), b = ring_vertex(r, s + 1, segments);
      const auto c = ring_vertex(r + 1, s, segments), d = ring_vertex(r + 1, s + 1, segments);
      t.push_back({a, c, d});
      t.push_back({a, d, b});
    }
  }
  for (int s = 0; s < segments; ++s)
    t.push_back({south, ring_vertex(rings - 1, s + 1, segments), ring_vertex(rings - 1, s, segments)});
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh make_patch(double size_x, double size_y, int cells_x, int cells_y, double height) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  for (int j = 0; j <= cells_y; ++j)
    for (int i = 0; i <= cells_x; ++i)
      v.emplace_back(-0.5 * size_x + size_x * i / cells_x, -0.5 * size_y + size_y * j / cells_y, height);
  const auto idx = [cells_x](int i, int j) { return static_cast<std::uint32_t>(j * (cells_x + 1) + i); };
  for (int j = 0; j < cells_y; ++j) {
    for (int i = 0; i < cells_x; ++i) {
      t.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      t.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  return SurfaceMesh(std::move(v), std::move(t));
}

}  // namespace ifind::surface
