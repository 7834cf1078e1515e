#pragma once

#include <vector>

#include "ifind/surface/mesh.hpp"

namespace ifind::surface {

/// Probe placement on the surface. The probe presses `indentation` metres
/// along -normal and is rolled by `axial_roll` about its own axis.
struct ContactPose {
  Vec3 surface_point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double indentation = 0.0;
  double axial_roll = 0.0;
};

struct SweepPath {
  std::vector<ContactPose> waypoints;
  double spacing = 0.0;
};

constexpr double kOnSurfaceTolerance = 1e-6;   // m
constexpr double kSweepEndpointReach = 0.05;   // m

/// Probe tip pose for a contact. The tool z axis is the probe axis and points
/// into the tissue (anti-parallel to the normal); roll 0 aligns the tool x
/// axis with the projection of world +x (world +y when the normal is along x).
/// Throws OffSurface when the contact point is not on the mesh.
Pose probe_pose_at(const SurfaceMesh& mesh, const ContactPose& contact);

/// Same construction without the on-surface check.
Pose probe_pose(const ContactPose& contact);

/// Projects uniform samples of the start->end segment onto the mesh and
/// subdivides until consecutive surface points are at most `spacing` apart.
/// Throws OffSurface (endpoint farther than 5 cm from the mesh) or EmptyPath.
SweepPath generate_sweep(const SurfaceMesh& mesh, const Vec3& start, const Vec3& end,
                         double spacing, double indentation, double axial_roll = 0.0);

/// Polyline length through the waypoint surface points.
double path_length(const SweepPath& path);

/// Resamples to exactly `count` waypoints by re-projecting uniform samples of
/// the original start->end chord. Used to pair up the two arms' paths.
SweepPath resample(const SurfaceMesh& mesh, const SweepPath& path, std::size_t count);

}  // namespace ifind::surface
