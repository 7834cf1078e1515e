#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ifind/dual/rig.hpp"
#include "ifind/kinematics/chain.hpp"
#include "ifind/kinematics/kinematics.hpp"

namespace ifind::testing {

/// Uniform in-limit joint vectors, kept `margin` away from every limit.
inline std::vector<kin::JointVector> random_configs(const std::vector<kin::JointSpec>& joints,
                                                    std::size_t n, std::uint64_t seed,
                                                    double margin = 0.0) {
  std::mt19937_64 rng(seed);
  std::vector<kin::JointVector> out(n, kin::JointVector(static_cast<Eigen::Index>(joints.size())));
  for (auto& q : out)
    for (std::size_t j = 0; j < joints.size(); ++j)
      q[static_cast<Eigen::Index>(j)] =
          std::uniform_real_distribution<double>(joints[j].min + margin, joints[j].max - margin)(rng);
  return out;
}

struct Segment {
  Vec3 a, b;
  double radius;
};

/// Capsule axes placed from the rig description with plain FK, independent of
/// the library's separation code.
inline std::vector<Segment> oracle_capsules(const dual::DualArmRig& rig, const kin::JointVector& q,
                                            dual::Arm arm) {
  const auto n = static_cast<Eigen::Index>(rig.arm_left.size());
  const Eigen::Index start = arm == dual::Arm::Left ? 1 : 1 + n;
  const kin::JointVector qa = q.segment(start, n);
  const Transform base = rig.gantry.origin * Eigen::Translation3d(rig.gantry.axis * q[0]) *
                         (arm == dual::Arm::Left ? rig.base_left : rig.base_right);
  const auto frames = kin::link_frames(rig.chain(arm), qa);
  std::vector<Segment> out;
  for (const auto& c : rig.capsules) {
    const Transform t = base * frames[c.frame].to_transform();
    out.push_back({t * c.from, t * c.to, c.radius});
  }
  return out;
}

/// Min over `samples` evenly spaced points per axis of the point-pair
/// distance, minus both radii. The nearest sample on the second axis is found
/// from the projected parameter: squared distance is a quadratic in the
/// sample index, so checking its floor and ceiling equals a full scan.
inline double sampled_clearance(const std::vector<Segment>& left, const std::vector<Segment>& right,
                                std::size_t samples) {
  const double last = static_cast<double>(samples - 1);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : left)
    for (const auto& r : right) {
      const Vec3 d = r.b - r.a;
      const double len2 = d.squaredNorm();
      double d2 = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 p = l.a + (static_cast<double>(i) / last) * (l.b - l.a);
        const double t = len2 > 0 ? std::clamp((p - r.a).dot(d) / len2, 0.0, 1.0) : 0.0;
        const double k = t * last;
        for (double kk : {std::floor(k), std::ceil(k)}) {
          const Vec3 s = r.a + (kk / last) * d;
          d2 = std::min(d2, (p - s).squaredNorm());
        }
      }
      best = std::min(best, std::sqrt(d2) - l.radius - r.radius);
    }
  return best;
}

inline double sampled_clearance(const dual::DualArmRig& rig, const kin::JointVector& q,
                                std::size_t samples = 10000) {
  return sampled_clearance(oracle_capsules(rig, q, dual::Arm::Left), oracle_capsules(rig, q, dual::Arm::Right),
                           samples);
}

/// Reflection of a rig configuration through the world plane x = 0 for the
/// bundled rig: arms swap, the gantry and every x- or z-axis joint change sign.
inline kin::JointVector mirrored(const dual::DualArmRig& rig, const kin::JointVector& q) {
  const auto n = static_cast<Eigen::Index>(rig.arm_left.size());
  kin::JointVector m(q.size());
  m[0] = -q[0];
  m.segment(1, n) = q.segment(1 + n, n);
  m.segment(1 + n, n) = q.segment(1, n);
  for (Eigen::Index side : {Eigen::Index{1}, 1 + n})
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(rig.arm_left.joints[static_cast<std::size_t>(j)].axis.y()) < 0.5) m[side + j] = -m[side + j];
  return m;
}

}  // namespace ifind::testing
