#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifind/common/geometry.hpp"

namespace ifind::surface {

using Triangle = std::array<std::uint32_t, 3>;

/// Triangulated surface. Immutable once built; all queries are const.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;

  /// Validates indices and triangle areas, orients faces outward and
  /// computes area-weighted vertex normals. Throws DegenerateMesh.
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Vec3>& vertex_normals() const { return vertex_normals_; }
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  const Vec3& centroid() const { return centroid_; }

  std::size_t triangle_count() const { return triangles_.size(); }
  void triangle_corners(std::size_t id, Vec3& a, Vec3& b, Vec3& c) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> face_normals_;
  std::vector<Vec3> vertex_normals_;
  Vec3 centroid_ = Vec3::Zero();
};

/// ASCII OFF. Throws ParseError on malformed text, DegenerateMesh on bad topology.
SurfaceMesh parse_off(std::string_view text);
SurfaceMesh load_mesh(const std::filesystem::path& path);

/// Writes vertices with 17 significant digits so that parsing the output
/// reproduces the same doubles.
std::string to_off(const SurfaceMesh& mesh);
void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path);

struct SurfacePoint {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // outward face normal of `triangle`
  std::size_t triangle = 0;
  double distance = 0.0;
};

/// Closest point on a single triangle (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Closest surface point over all triangles; ties go to the lowest triangle id.
SurfacePoint closest_point(const SurfaceMesh& mesh, const Vec3& p);

/// Moller-Trumbore intersection distance, if the ray hits at t > 0.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

/// Nearest positive hit distance along a unit direction, or nullopt on a miss.
std::optional<double> raycast(const SurfaceMesh& mesh, const Vec3& origin, const Vec3& direction);

}  // namespace ifind::surface
