#include "ifind/surface/sweep.hpp"

#include <cmath>
#include <list>

#include "ifind/common/error.hpp"

namespace ifind::surface {

namespace {

constexpr int kMaxSubdivisionDepth = 24;
// Relative rounding slack on the spacing bound, so that an exact multiple
// such as 0.10 m at 0.02 m spacing yields 6 waypoints.
constexpr double kSpacingSlack = 1e-12;

ContactPose project(const SurfaceMesh& mesh, const Vec3& p, double indentation, double roll) {
  const auto sp = closest_point(mesh, p);
  return {sp.point, sp.normal, indentation, roll};
}

void require_near(const SurfaceMesh& mesh, const Vec3& p, const char* what) {
  const auto sp = closest_point(mesh, p);
  if (sp.distance > kSweepEndpointReach)
    throw Error(ErrorCode::OffSurface, std::string(what) + " point is " + std::to_string(sp.distance) +
                                           " m from the mesh (limit 0.05 m)");
}

}  // namespace

Pose probe_pose(const ContactPose& contact) {
  const Vec3 n = contact.normal.normalized();
  const Vec3 z = -n;
  Vec3 x = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;
  if (x.norm() < 1e-6) x = Vec3::UnitY() - Vec3::UnitY().dot(z) * z;
  x.normalize();
  const Vec3 y = z.cross(x);
  const double c = std::cos(contact.axial_roll), s = std::sin(contact.axial_roll);
  Eigen::Matrix3d r;
  r.col(0) = c * x + s * y;
  r.col(1) = -s * x + c * y;
  r.col(2) = z;
  Pose pose;
  pose.position = contact.surface_point - contact.indentation * n;
  pose.orientation = Quat(r).normalized();
  return pose;
}

Pose probe_pose_at(const SurfaceMesh& mesh, const ContactPose& contact) {
  const auto sp = closest_point(mesh, contact.surface_point);
  if (sp.distance > kOnSurfaceTolerance)
    throw Error(ErrorCode::OffSurface,
                "contact point is " + std::to_string(sp.distance) + " m off the surface");
  return probe_pose(contact);
}

SweepPath generate_sweep(const SurfaceMesh& mesh, const Vec3& start, const Vec3& end,
                         double spacing, double indentation, double axial_roll) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep spacing must be positive");
  if (!(indentation >= 0.0)) throw Error(ErrorCode::InvalidArgument, "indentation must be non-negative");
  require_near(mesh, start, "start");
  require_near(mesh, end, "end");
  const double chord = (end - start).norm();
  if (chord < 1e-12) throw Error(ErrorCode::EmptyPath, "sweep start and end coincide");

  const auto segments =
      static_cast<std::size_t>(std::max(1.0, std::ceil(chord / spacing * (1.0 - kSpacingSlack))));

  // Parameters along the chord; subdivided where the projected gap is too large.
  std::list<double> ts;
  for (std::size_t i = 0; i <= segments; ++i)
    ts.push_back(static_cast<double>(i) / static_cast<double>(segments));
  std::list<ContactPose> pts;
  for (double t : ts) pts.push_back(project(mesh, start + t * (end - start), indentation, axial_roll));

  auto ti = ts.begin();
  auto pi = pts.begin();
  int depth_guard = 0;
  while (std::next(pi) != pts.end()) {
    auto tn = std::next(ti);
    auto pn = std::next(pi);
    if ((pn->surface_point - pi->surface_point).norm() > spacing * (1.0 + kSpacingSlack) &&
        depth_guard < kMaxSubdivisionDepth) {
      const double tm = 0.5 * (*ti + *tn);
      ts.insert(tn, tm);
      pts.insert(pn, project(mesh, start + tm * (end - start), indentation, axial_roll));
      ++depth_guard;
      continue;
    }
    depth_guard = 0;
    ++ti;
    ++pi;
  }

  SweepPath path;
  path.spacing = spacing;
  path.waypoints.assign(pts.begin(), pts.end());
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    if ((path.waypoints[i].surface_point - path.waypoints[i - 1].surface_point).norm() >
        spacing * (1.0 + kSpacingSlack))
      throw Error(ErrorCode::EmptyPath, "surface projection is discontinuous; spacing bound unattainable");
  return path;
}

double path_length(const SweepPath& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    len += (path.waypoints[i].surface_point - path.waypoints[i - 1].surface_point).norm();
  return len;
}

SweepPath resample(const SurfaceMesh& mesh, const SweepPath& path, std::size_t count) {
  if (path.waypoints.empty() || count == 0) throw Error(ErrorCode::EmptyPath, "nothing to resample");
  const auto& first = path.waypoints.front();
  const Vec3 a = first.surface_point;
  const Vec3 b = path.waypoints.back().surface_point;
  SweepPath out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.waypoints.push_back(project(mesh, a + t * (b - a), first.indentation, first.axial_roll));
  }
  for (std::size_t i = 1; i < out.waypoints.size(); ++i)
    out.spacing = std::max(out.spacing,
                           (out.waypoints[i].surface_point - out.waypoints[i - 1].surface_point).norm());
  return out;
}

}  // namespace ifind::surface
