#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifind/dual/separation.hpp"
#include "ifind/safety/supervisor.hpp"
#include "ifind/session/log.hpp"
#include "ifind/session/views.hpp"
#include "ifind/sim/config.hpp"

namespace ifind::sim {

enum class Mode { Idle, Jogging, MoveTo, Following, Fault };
std::string_view to_string(Mode m);

/// Reply to one command, produced on the tick the command is dequeued.
struct Reply {
  nlohmann::json request_id;
  bool ok = true;
  std::string code;     // error code name when !ok
  std::string message;  // error text when !ok
  nlohmann::json result = nlohmann::json::object();

  nlohmann::json to_json(std::uint64_t tick) const;
};

/// A sweep being followed: joint targets with the contact each one realises
/// (none for approach and lift-off points).
struct ActiveSweep {
  std::string id;
  std::vector<kin::JointVector> targets;
  std::vector<std::vector<std::optional<surface::ContactPose>>> contacts;  // [waypoint][arm]
  std::size_t index = 0;
  std::size_t graded = 0;
};

struct ArmTelemetry {
  Pose tip;
  safety::ContactForce force;
  safety::SensorReading reading;
  safety::Proximity proximity;
};

struct SimState {
  std::uint64_t tick = 0;
  kin::JointVector q;
  kin::JointVector target;
  Mode mode = Mode::Idle;
  safety::SafetyStatus safety;
  safety::ClutchState clutch;
  std::vector<ArmTelemetry> arms;
  Eigen::VectorXd loads;
  std::optional<dual::SeparationReport> separation;
  std::optional<ActiveSweep> sweep;
  double indentation = 0.003;
};

struct StepOutput {
  std::vector<Reply> replies;
  std::vector<session::Event> events;  // log order: commands, safety, grades, questionnaire, telemetry
  nlohmann::json telemetry;
};

/// The authoritative single-threaded simulation. Deterministic given its config.
class Simulation {
 public:
  explicit Simulation(SimConfig config);  // throws UnknownPreset / InvalidConfig / ParseError

  void submit(Command c);
  std::size_t queued() const { return queue_.size(); }
  StepOutput step();

  const SimState& state() const { return state_; }
  const SimConfig& config() const { return config_; }
  bool dual() const { return rig_.has_value(); }
  std::size_t arm_count() const { return dual() ? 2 : 1; }
  const std::vector<kin::JointSpec>& joints() const { return joints_; }
  const surface::SurfaceMesh& mesh() const { return *mesh_; }
  const std::vector<session::StandardView>& views() const { return views_; }

  /// Static description: joints, capsules, views, sweeps, mesh.
  nlohmann::json describe() const;
  nlohmann::json telemetry() const;

  Transform arm_base(std::size_t arm, const kin::JointVector& q) const;
  Pose tip(std::size_t arm, const kin::JointVector& q) const;

 private:
  const kin::KinematicChain& chain(std::size_t arm) const;
  std::size_t arm_offset(std::size_t arm) const;
  kin::JointVector arm_q(std::size_t arm, const kin::JointVector& q) const;
  std::string arm_name(std::size_t arm) const;
  kin::JointVector home() const;
  kin::JointVector safe_pose() const;

  Reply apply(const Command& c, StepOutput& out);
  Reply handle_jog(const Command& c);
  Reply handle_move_to(const Command& c);
  Reply handle_follow(const Command& c);

  kin::JointVector solve_pose(std::size_t arm, const Pose& world_target, const kin::JointVector& seed) const;
  kin::JointVector integrate(const kin::JointVector& q, const kin::JointVector& target) const;
  void sense_all(const kin::JointVector& previous_q);
  session::GradeRecord grade_arm(const session::StandardView& view, std::size_t arm) const;

  SimConfig config_;
  std::shared_ptr<const surface::SurfaceMesh> mesh_;
  std::optional<kin::KinematicChain> single_;
  std::optional<dual::DualArmRig> rig_;
  Transform single_base_ = Transform::Identity();
  std::vector<kin::JointSpec> joints_;
  std::vector<std::optional<double>> thresholds_;
  safety::ForceLimits limits_;
  std::vector<session::StandardView> views_;
  safety::NoiseSource noise_;
  std::deque<Command> queue_;
  SimState state_;
};

/// Runs a scenario headless: commands are submitted on their tick, one
/// telemetry event per tick. Deterministic.
session::SessionLog run_scenario(const Scenario& scenario);

}  // namespace ifind::sim
