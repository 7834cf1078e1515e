#include "ifind/common/geometry.hpp"

#include <cmath>

#include "ifind/common/error.hpp"

namespace ifind {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LimitViolation: return "LimitViolation";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::OffSurface: return "OffSurface";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::ClearanceInfeasible: return "ClearanceInfeasible";
    case ErrorCode::PlanFailed: return "PlanFailed";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::InvalidAnswer: return "InvalidAnswer";
    case ErrorCode::TickRegression: return "TickRegression";
    case ErrorCode::RejectedInFault: return "RejectedInFault";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Pose Pose::from_transform(const Transform& t) {
  Pose p;
  p.position = t.translation();
  p.orientation = Quat(t.rotation());
  p.orientation.normalize();
  return p;
}

Transform Pose::to_transform() const {
  Transform t = Transform::Identity();
  t.linear() = orientation.normalized().toRotationMatrix();
  t.translation() = position;
  return t;
}

Transform make_transform(const Vec3& xyz, const Vec3& rpy) {
  Transform t = Transform::Identity();
  t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                   .toRotationMatrix();
  t.translation() = xyz;
  return t;
}

Vec3 rotation_error(const Quat& from, const Quat& to) {
  Quat d = to * from.conjugate();
  if (d.w() < 0.0) d.coeffs() = -d.coeffs();
  const double s = d.vec().norm();
  if (s < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, d.w());
  return d.vec() * (angle / s);
}

double angular_distance(const Quat& a, const Quat& b) {
  return rotation_error(a, b).norm();
}

void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  // Duff et al., branchless ONB.
  const double sign = std::copysign(1.0, n.z());
  const double a = -1.0 / (sign + n.z());
  const double b = n.x() * n.y() * a;
  t1 = Vec3(1.0 + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
  t2 = Vec3(b, sign + n.y() * n.y() * a, -n.y());
}

Quat canonical(const Quat& q) {
  Quat r = q.normalized();
  if (r.w() < 0.0) r.coeffs() = -r.coeffs();
  return r;
}

}  // namespace ifind
