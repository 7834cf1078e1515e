#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace ifind {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Transform = Eigen::Isometry3d;

/// Position plus unit-quaternion orientation in a parent frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose from_transform(const Transform& t);
  Transform to_transform() const;
};

/// Rigid transform from translation and roll/pitch/yaw (fixed-axis x, y, z).
Transform make_transform(const Vec3& xyz, const Vec3& rpy);

/// Rotation vector (axis * angle, angle in [0, pi]) taking `from` onto `to`.
Vec3 rotation_error(const Quat& from, const Quat& to);

/// Angle between two orientations in [0, pi].
double angular_distance(const Quat& a, const Quat& b);

/// Deterministic orthonormal tangent pair for a unit normal.
void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2);

/// Quaternion with non-negative w; both signs encode the same rotation.
Quat canonical(const Quat& q);

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace ifind
