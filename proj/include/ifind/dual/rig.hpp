#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ifind/kinematics/kinematics.hpp"

namespace ifind::dual {

using kin::JointVector;

/// Capsule attached to a link frame: segment [from, to] in frame coordinates
/// swept by a sphere of `radius`.
struct Capsule {
  std::size_t frame = 0;
  Vec3 from = Vec3::Zero();
  Vec3 to = Vec3::Zero();
  double radius = 0.04;
};

using CapsuleSet = std::vector<Capsule>;

enum class Arm { Left, Right };

/// Two arms riding one gantry carriage. Joint layout of the stacked vector:
/// [J0, left J1..J8, right J1..J8].
struct DualArmRig {
  kin::JointSpec gantry;  // prismatic; origin is world -> carriage at J0 = 0
  kin::KinematicChain arm_left;
  kin::KinematicChain arm_right;
  Transform base_left = Transform::Identity();   // carriage -> left arm base
  Transform base_right = Transform::Identity();  // carriage -> right arm base
  CapsuleSet capsules;  // same envelope on both arms

  std::size_t dof() const { return 1 + arm_left.size() + arm_right.size(); }
  std::size_t offset(Arm arm) const { return arm == Arm::Left ? 1 : 1 + arm_left.size(); }
  const kin::KinematicChain& chain(Arm arm) const {
    return arm == Arm::Left ? arm_left : arm_right;
  }
};

/// Bundled "ifind-v3" rig or a rig config file. Throws UnknownPreset / InvalidConfig.
DualArmRig load_rig(std::string_view preset_or_path);
DualArmRig assemble_rig(const nlohmann::json& config);

/// All 17 joint specs with ids "J0", "L.J1".., "R.J1"..
std::vector<kin::JointSpec> rig_joints(const DualArmRig& rig);

JointVector rig_home(const DualArmRig& rig);
void check_rig_limits(const DualArmRig& rig, const JointVector& q);
JointVector clamp_rig(const DualArmRig& rig, JointVector q);

JointVector arm_joints(const DualArmRig& rig, const JointVector& q, Arm arm);

/// World placement of an arm's base for a gantry value.
Transform arm_base(const DualArmRig& rig, double gantry_value, Arm arm);

struct ArmState {
  Transform base = Transform::Identity();  // world <- arm base
  kin::ChainState chain;                   // in arm base coordinates
  Transform world_frame(std::size_t i) const { return base * chain.frames[i]; }
  Pose tip() const { return Pose::from_transform(base * chain.frames.back()); }
};

struct RigState {
  ArmState left;
  ArmState right;
  const ArmState& arm(Arm a) const { return a == Arm::Left ? left : right; }
};

RigState evaluate_rig(const DualArmRig& rig, const JointVector& q);

/// 6 x 17 world-frame Jacobian of one arm's probe tip.
Eigen::Matrix<double, 6, Eigen::Dynamic> tip_jacobian(const DualArmRig& rig, const RigState& state,
                                                      Arm arm);

/// 3 x 17 world-frame Jacobian of a world point rigidly attached to `frame` of an arm.
Eigen::Matrix3Xd point_jacobian(const DualArmRig& rig, const RigState& state, Arm arm,
                                std::size_t frame, const Vec3& world_point);

}  // namespace ifind::dual
