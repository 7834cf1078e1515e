#include "ifind/safety/supervisor.hpp"

#include <algorithm>
#include <cmath>

#include "ifind/common/error.hpp"

namespace ifind::safety {

ClutchState ClutchState::all_engaged(std::size_t joints) {
  ClutchState s;
  s.engaged.assign(joints, true);
  s.trip_tick.assign(joints, std::nullopt);
  return s;
}

bool ClutchState::any_disengaged() const {
  return std::find(engaged.begin(), engaged.end(), false) != engaged.end();
}

std::vector<std::size_t> ClutchState::disengaged() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < engaged.size(); ++i)
    if (!engaged[i]) out.push_back(i);
  return out;
}

std::vector<std::optional<double>> clutch_thresholds(const kin::KinematicChain& chain) {
  std::vector<std::optional<double>> t;
  for (const auto& j : chain.joints) t.push_back(j.clutch_threshold);
  return t;
}

ClutchState update_clutch(const ClutchState& state, const Eigen::VectorXd& loads,
                          std::span<const std::optional<double>> thresholds, std::uint64_t tick) {
  if (static_cast<std::size_t>(loads.size()) != state.engaged.size() ||
      thresholds.size() != state.engaged.size())
    throw Error(ErrorCode::InvalidArgument, "clutch update: load/threshold count mismatch");
  ClutchState next = state;
  for (std::size_t i = 0; i < next.engaged.size(); ++i) {
    if (!next.engaged[i] || !thresholds[i]) continue;
    if (std::abs(loads[static_cast<Eigen::Index>(i)]) > *thresholds[i]) {
      next.engaged[i] = false;
      next.trip_tick[i] = tick;
    }
  }
  return next;
}

ClutchState update_clutch(const ClutchState& state, const Eigen::VectorXd& loads,
                          const kin::KinematicChain& chain, std::uint64_t tick) {
  const auto t = clutch_thresholds(chain);
  return update_clutch(state, loads, t, tick);
}

std::string_view to_string(SafetyState s) {
  switch (s) {
    case SafetyState::Nominal: return "NOMINAL";
    case SafetyState::ForceLimit: return "FORCE_LIMIT";
    case SafetyState::ClutchTripped: return "CLUTCH_TRIPPED";
    case SafetyState::Retracted: return "RETRACTED";
    case SafetyState::EStop: return "ESTOP";
  }
  return "?";
}

std::optional<SafetyState> safety_state_from_string(std::string_view s) {
  for (auto st : {SafetyState::Nominal, SafetyState::ForceLimit, SafetyState::ClutchTripped,
                  SafetyState::Retracted, SafetyState::EStop})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

SafetyStatus supervisor_step(const SafetyStatus& status, std::span<const SensorReading> readings,
                             const ClutchState& clutch, const ForceLimits& limits,
                             OperatorInput input) {
  if (input == OperatorInput::EStop) return {SafetyState::EStop, "operator e-stop"};
  if (input == OperatorInput::Reset) return {SafetyState::Nominal, ""};

  switch (status.state) {
    case SafetyState::EStop:
    case SafetyState::Retracted:
      return status;
    case SafetyState::ClutchTripped:
      for (auto j : clutch.disengaged())
        if (std::find(limits.back_arm_joints.begin(), limits.back_arm_joints.end(), j) !=
            limits.back_arm_joints.end())
          return {SafetyState::Retracted, "gas-spring lift after back-arm clutch " + std::to_string(j)};
      return status;
    case SafetyState::Nominal:
    case SafetyState::ForceLimit:
      break;
  }

  if (const auto open = clutch.disengaged(); !open.empty())
    return {SafetyState::ClutchTripped, "clutch " + std::to_string(open.front()) + " disengaged"};

  for (const auto& r : readings)
    for (double f : r.forces)
      if (std::abs(f) > limits.soft_limit)
        return {SafetyState::ForceLimit, "sensed force above soft limit"};
  return {SafetyState::Nominal, ""};
}

}  // namespace ifind::safety
