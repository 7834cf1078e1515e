#include "ifind/dual/rig.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ifind/common/bundled.hpp"
#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"

namespace ifind::dual {

namespace {

kin::JointSpec parse_gantry(const nlohmann::json& g) {
  // Reuse the chain parser on a one-joint chain.
  nlohmann::json wrapper = {{"name", "gantry"}, {"joints", nlohmann::json::array({g})}};
  auto chain = kin::parse_chain(wrapper);
  auto spec = chain.joints.front();
  if (spec.kind != kin::JointKind::Prismatic)
    throw Error(ErrorCode::InvalidConfig, "gantry joint must be prismatic");
  return spec;
}

kin::KinematicChain parse_arm(const nlohmann::json& a) {
  if (a.is_string()) return kin::load_chain(a.get<std::string>());
  return kin::parse_chain(a);
}

}  // namespace

DualArmRig assemble_rig(const nlohmann::json& config) {
  DualArmRig rig;
  try {
    rig.gantry = parse_gantry(config.at("gantry"));
    rig.arm_left = parse_arm(config.at("arm"));
    rig.arm_right = rig.arm_left;
    const auto& offsets = config.at("base_offsets");
    rig.base_left = json_util::transform(offsets.at("left"));
    rig.base_right = json_util::transform(offsets.at("right"));
    for (const auto& c : config.at("capsules")) {
      Capsule cap;
      cap.frame = c.at("frame").get<std::size_t>();
      cap.from = json_util::vec3(c.at("from"));
      cap.to = json_util::vec3(c.at("to"));
      cap.radius = c.at("radius").get<double>();
      if (!(cap.radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "capsule radius must be positive");
      if (cap.frame > rig.arm_left.size())
        throw Error(ErrorCode::InvalidConfig, "capsule attached to a missing link frame");
      rig.capsules.push_back(cap);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed rig config: ") + e.what());
  }
  if (rig.capsules.empty()) throw Error(ErrorCode::InvalidConfig, "rig has no collision capsules");
  return rig;
}

DualArmRig load_rig(std::string_view preset_or_path) {
  std::string text;
  if (preset_or_path == "ifind-v3") {
    text = std::string(bundled::lookup("presets/ifind-v3-rig.json"));
  } else {
    const std::filesystem::path path{std::string(preset_or_path)};
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
      throw Error(ErrorCode::UnknownPreset, "unknown rig preset or file '" + std::string(preset_or_path) + "'");
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("rig config is not valid JSON: ") + e.what());
  }
  return assemble_rig(j);
}

std::vector<kin::JointSpec> rig_joints(const DualArmRig& rig) {
  std::vector<kin::JointSpec> out;
  out.push_back(rig.gantry);
  for (auto [arm, prefix] : {std::pair{Arm::Left, "L."}, std::pair{Arm::Right, "R."}}) {
    for (auto spec : rig.chain(arm).joints) {
      spec.id = prefix + spec.id;
      out.push_back(std::move(spec));
    }
  }
  return out;
}

JointVector rig_home(const DualArmRig& rig) {
  JointVector q(static_cast<Eigen::Index>(rig.dof()));
  q[0] = rig.gantry.home;
  q.segment(1, static_cast<Eigen::Index>(rig.arm_left.size())) = kin::home(rig.arm_left);
  q.segment(static_cast<Eigen::Index>(rig.offset(Arm::Right)),
            static_cast<Eigen::Index>(rig.arm_right.size())) = kin::home(rig.arm_right);
  return q;
}

JointVector arm_joints(const DualArmRig& rig, const JointVector& q, Arm arm) {
  return q.segment(static_cast<Eigen::Index>(rig.offset(arm)),
                   static_cast<Eigen::Index>(rig.chain(arm).size()));
}

void check_rig_limits(const DualArmRig& rig, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != rig.dof())
    throw Error(ErrorCode::LimitViolation, "rig joint vector must have " + std::to_string(rig.dof()) + " values");
  if (!(q[0] >= rig.gantry.min - 1e-12 && q[0] <= rig.gantry.max + 1e-12))
    throw Error(ErrorCode::LimitViolation, "gantry J0 outside limits");
  kin::check_limits(rig.arm_left, arm_joints(rig, q, Arm::Left));
  kin::check_limits(rig.arm_right, arm_joints(rig, q, Arm::Right));
}

JointVector clamp_rig(const DualArmRig& rig, JointVector q) {
  q[0] = std::clamp(q[0], rig.gantry.min, rig.gantry.max);
  for (auto arm : {Arm::Left, Arm::Right})
    q.segment(static_cast<Eigen::Index>(rig.offset(arm)), static_cast<Eigen::Index>(rig.chain(arm).size())) =
        kin::clamp_to_limits(rig.chain(arm), arm_joints(rig, q, arm));
  return q;
}

Transform arm_base(const DualArmRig& rig, double gantry_value, Arm arm) {
  Transform carriage = rig.gantry.origin;
  carriage.translate(rig.gantry.axis * gantry_value);
  return carriage * (arm == Arm::Left ? rig.base_left : rig.base_right);
}

RigState evaluate_rig(const DualArmRig& rig, const JointVector& q) {
  RigState s;
  s.left.base = arm_base(rig, q[0], Arm::Left);
  s.right.base = arm_base(rig, q[0], Arm::Right);
  s.left.chain = kin::evaluate(rig.arm_left, arm_joints(rig, q, Arm::Left));
  s.right.chain = kin::evaluate(rig.arm_right, arm_joints(rig, q, Arm::Right));
  return s;
}

Eigen::Matrix3Xd point_jacobian(const DualArmRig& rig, const RigState& state, Arm arm,
                                std::size_t frame, const Vec3& world_point) {
  const auto& as = state.arm(arm);
  const auto& chain = rig.chain(arm);
  Eigen::Matrix3Xd jp = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(rig.dof()));
  jp.col(0) = rig.gantry.origin.linear() * rig.gantry.axis;
  const Vec3 local_point = as.base.inverse() * world_point;
  jp.middleCols(static_cast<Eigen::Index>(rig.offset(arm)), static_cast<Eigen::Index>(chain.size())) =
      as.base.linear() * kin::point_jacobian(chain, as.chain, frame, local_point);
  return jp;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> tip_jacobian(const DualArmRig& rig, const RigState& state,
                                                      Arm arm) {
  const auto& as = state.arm(arm);
  const auto& chain = rig.chain(arm);
  const std::size_t n = chain.size();
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac =
      Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, static_cast<Eigen::Index>(rig.dof()));
  jac.topRows<3>() = point_jacobian(rig, state, arm, n, as.tip().position);
  const auto off = static_cast<Eigen::Index>(rig.offset(arm));
  for (std::size_t i = 0; i < n; ++i)
    if (chain.joints[i].kind == kin::JointKind::Revolute)
      jac.block<3, 1>(3, off + static_cast<Eigen::Index>(i)) = as.base.linear() * as.chain.axes[i];
  for (std::size_t p = 0; p < chain.parallelogram_pairs.size(); ++p)
    jac.block<3, 1>(3, off + static_cast<Eigen::Index>(chain.parallelogram_pairs[p].driver)) -=
        as.base.linear() * as.chain.compensation_axes[p];
  return jac;
}

}  // namespace ifind::dual
