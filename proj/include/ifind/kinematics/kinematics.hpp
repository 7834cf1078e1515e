#pragma once

#include <vector>

#include "ifind/kinematics/chain.hpp"

namespace ifind::kin {

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// World (chain base) placement of every joint frame for one configuration.
// frames[i] is joint i's frame after its motion; frames.back() is the tool.
struct ChainState {
  std::vector<Transform> frames;
  // Axis of each joint in the base frame.
  std::vector<Vec3> axes;
  // Base-frame axis of each parallelogram compensation, indexed like
  // chain.parallelogram_pairs, and the origin it rotates about.
  std::vector<Vec3> compensation_axes;
  std::vector<Vec3> compensation_points;
};

/// Evaluates the chain without checking limits. Used by the checked entry
/// points and by finite-difference probes that straddle a limit.
ChainState evaluate(const KinematicChain& chain, const JointVector& q);

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q);

/// One pose per joint frame plus the tool frame (size n + 1).
std::vector<Pose> link_frames(const KinematicChain& chain, const JointVector& q);

/// Geometric Jacobian at the tool tip: rows 0-2 linear, rows 3-5 angular,
/// both in the chain base frame.
Jacobian jacobian(const KinematicChain& chain, const JointVector& q);

/// 3 x n Jacobian of a point rigidly attached to frame `frame_index`
/// (given in base coordinates). Columns of joints distal to that frame are zero.
Eigen::Matrix3Xd point_jacobian(const KinematicChain& chain, const ChainState& state,
                                std::size_t frame_index, const Vec3& point);

}  // namespace ifind::kin
