#include "ifind/kinematics/kinematics.hpp"

namespace ifind::kin {

namespace {

Transform joint_motion(const JointSpec& j, double value) {
  Transform m = Transform::Identity();
  if (j.kind == JointKind::Revolute)
    m.linear() = Eigen::AngleAxisd(value, j.axis).toRotationMatrix();
  else
    m.translation() = j.axis * value;
  return m;
}

}  // namespace

ChainState evaluate(const KinematicChain& chain, const JointVector& q) {
  const std::size_t n = chain.size();
  ChainState s;
  s.frames.reserve(n + 1);
  s.axes.reserve(n);
  s.compensation_axes.assign(chain.parallelogram_pairs.size(), Vec3::Zero());
  s.compensation_points.assign(chain.parallelogram_pairs.size(), Vec3::Zero());

  Transform t = Transform::Identity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& j = chain.joints[i];
    t = t * j.origin;
    for (std::size_t p = 0; p < chain.parallelogram_pairs.size(); ++p) {
      const auto& pair = chain.parallelogram_pairs[p];
      if (pair.compensated != i) continue;
      const auto& driver = chain.joints[pair.driver];
      s.compensation_axes[p] = t.linear() * driver.axis;
      s.compensation_points[p] = t.translation();
      Transform comp = Transform::Identity();
      comp.linear() =
          Eigen::AngleAxisd(-q[static_cast<Eigen::Index>(pair.driver)], driver.axis)
              .toRotationMatrix();
      t = t * comp;
    }
    t = t * joint_motion(j, q[static_cast<Eigen::Index>(i)]);
    s.axes.push_back(t.linear() * j.axis);
    s.frames.push_back(t);
  }
  s.frames.push_back(t * chain.tool);
  return s;
}

Pose forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  check_limits(chain, q);
  return Pose::from_transform(evaluate(chain, q).frames.back());
}

std::vector<Pose> link_frames(const KinematicChain& chain, const JointVector& q) {
  check_limits(chain, q);
  const auto state = evaluate(chain, q);
  std::vector<Pose> out;
  out.reserve(state.frames.size());
  for (const auto& f : state.frames) out.push_back(Pose::from_transform(f));
  return out;
}

Eigen::Matrix3Xd point_jacobian(const KinematicChain& chain, const ChainState& state,
                                std::size_t frame_index, const Vec3& point) {
  const std::size_t n = chain.size();
  Eigen::Matrix3Xd jp = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(n));
  const std::size_t last = std::min(frame_index, n - 1);
  for (std::size_t i = 0; i <= last; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (chain.joints[i].kind == JointKind::Revolute)
      jp.col(col) = state.axes[i].cross(point - state.frames[i].translation());
    else
      jp.col(col) = state.axes[i];
  }
  for (std::size_t p = 0; p < chain.parallelogram_pairs.size(); ++p) {
    const auto& pair = chain.parallelogram_pairs[p];
    if (pair.compensated > last) continue;
    jp.col(static_cast<Eigen::Index>(pair.driver)) -=
        state.compensation_axes[p].cross(point - state.compensation_points[p]);
  }
  return jp;
}

Jacobian jacobian(const KinematicChain& chain, const JointVector& q) {
  check_limits(chain, q);
  const auto state = evaluate(chain, q);
  const std::size_t n = chain.size();
  Jacobian jac = Jacobian::Zero(6, static_cast<Eigen::Index>(n));
  jac.topRows<3>() = point_jacobian(chain, state, n, state.frames.back().translation());
  for (std::size_t i = 0; i < n; ++i)
    if (chain.joints[i].kind == JointKind::Revolute)
      jac.block<3, 1>(3, static_cast<Eigen::Index>(i)) = state.axes[i];
  for (std::size_t p = 0; p < chain.parallelogram_pairs.size(); ++p)
    jac.block<3, 1>(3, static_cast<Eigen::Index>(chain.parallelogram_pairs[p].driver)) -=
        state.compensation_axes[p];
  return jac;
}

}  // namespace ifind::kin
