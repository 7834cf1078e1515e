#include "ifind/dual/separation.hpp"

#include <algorithm>
#include <limits>

namespace ifind::dual {

SegmentClosest closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                       const Vec3& q2) {
  constexpr double kEps = 1e-18;
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= kEps && e <= kEps) {
    // both points
  } else if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  SegmentClosest out;
  out.on_first = p1 + d1 * s;
  out.on_second = p2 + d2 * t;
  out.distance = (out.on_first - out.on_second).norm();
  return out;
}

std::vector<WorldCapsule> world_capsules(const DualArmRig& rig, const RigState& state, Arm arm) {
  const auto& as = state.arm(arm);
  std::vector<WorldCapsule> out;
  out.reserve(rig.capsules.size());
  for (const auto& c : rig.capsules) {
    const Transform f = as.world_frame(c.frame);
    out.push_back({f * c.from, f * c.to, c.radius, c.frame});
  }
  return out;
}

SeparationReport separation(const DualArmRig& rig, const RigState& state) {
  const auto left = world_capsules(rig, state, Arm::Left);
  const auto right = world_capsules(rig, state, Arm::Right);
  SeparationReport rep;
  rep.min_distance = std::numeric_limits<double>::infinity();
  rep.pair_distances.reserve(left.size() * right.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      const auto sc = closest_segment_segment(left[i].a, left[i].b, right[j].a, right[j].b);
      const double d = sc.distance - left[i].radius - right[j].radius;
      rep.pair_distances.push_back(d);
      if (d < rep.min_distance) {
        rep.min_distance = d;
        rep.left = i;
        rep.right = j;
        rep.witness_left = sc.on_first;
        rep.witness_right = sc.on_second;
      }
    }
  }
  return rep;
}

SeparationReport min_separation(const DualArmRig& rig, const JointVector& q) {
  check_rig_limits(rig, q);
  return separation(rig, evaluate_rig(rig, q));
}

}  // namespace ifind::dual
