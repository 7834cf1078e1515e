#pragma once

#include <vector>

#include "ifind/dual/rig.hpp"

namespace ifind::dual {

struct SegmentClosest {
  Vec3 on_first = Vec3::Zero();
  Vec3 on_second = Vec3::Zero();
  double distance = 0.0;
};

/// Exact closest points between segments [p1, q1] and [p2, q2]
/// (Ericson, Real-Time Collision Detection 5.1.9); handles degenerate segments.
SegmentClosest closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                       const Vec3& q2);

/// A capsule placed in the world for one configuration.
struct WorldCapsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
  std::size_t frame = 0;
};

std::vector<WorldCapsule> world_capsules(const DualArmRig& rig, const RigState& state, Arm arm);

struct SeparationReport {
  double min_distance = 0.0;  // negative = penetration
  std::size_t left = 0;       // witness capsule ids
  std::size_t right = 0;
  Vec3 witness_left = Vec3::Zero();   // closest axis points of the witness pair
  Vec3 witness_right = Vec3::Zero();
  std::vector<double> pair_distances;  // row-major, left capsule x right capsule
};

SeparationReport separation(const DualArmRig& rig, const RigState& state);

/// Checked entry point. Throws LimitViolation.
SeparationReport min_separation(const DualArmRig& rig, const JointVector& q);

}  // namespace ifind::dual
