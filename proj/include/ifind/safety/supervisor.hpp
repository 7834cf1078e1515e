#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifind/kinematics/chain.hpp"
#include "ifind/safety/contact.hpp"

namespace ifind::safety {

// Mechanical ball-spring clutches. Joints listed in `thresholds` with a value
// trip when |load| strictly exceeds it and stay open until reset.
struct ClutchState {
  std::vector<bool> engaged;
  std::vector<std::optional<std::uint64_t>> trip_tick;

  static ClutchState all_engaged(std::size_t joints);
  bool any_disengaged() const;
  std::vector<std::size_t> disengaged() const;
};

/// Per-joint thresholds from the chain's clutch_threshold fields.
std::vector<std::optional<double>> clutch_thresholds(const kin::KinematicChain& chain);

ClutchState update_clutch(const ClutchState& state, const Eigen::VectorXd& loads,
                          std::span<const std::optional<double>> thresholds, std::uint64_t tick);

ClutchState update_clutch(const ClutchState& state, const Eigen::VectorXd& loads,
                          const kin::KinematicChain& chain, std::uint64_t tick);

enum class SafetyState { Nominal, ForceLimit, ClutchTripped, Retracted, EStop };

std::string_view to_string(SafetyState s);
std::optional<SafetyState> safety_state_from_string(std::string_view s);

struct SafetyStatus {
  SafetyState state = SafetyState::Nominal;
  std::string cause;

  bool is_fault() const {
    return state == SafetyState::ClutchTripped || state == SafetyState::Retracted ||
           state == SafetyState::EStop;
  }
};

enum class OperatorInput { None, EStop, Reset };

struct ForceLimits {
  double soft_limit = 15.0;  // N, any sensed axis
  // Clutch indices whose trip fires the gas-spring lift (J2, J3 of each arm).
  std::vector<std::size_t> back_arm_joints;
};

/// One supervisor tick. Transition graph:
///   any            -> ESTOP          operator e-stop
///   any            -> NOMINAL        operator reset
///   ESTOP, RETRACTED               absorbing otherwise
///   CLUTCH_TRIPPED -> RETRACTED      a back-arm clutch is open
///   NOMINAL, FORCE_LIMIT -> CLUTCH_TRIPPED   any clutch open
///   NOMINAL <-> FORCE_LIMIT          sensed force above / within soft limit
SafetyStatus supervisor_step(const SafetyStatus& status, std::span<const SensorReading> readings,
                             const ClutchState& clutch, const ForceLimits& limits,
                             OperatorInput input = OperatorInput::None);

}  // namespace ifind::safety
