#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifind/common/geometry.hpp"
#include "ifind/safety/contact.hpp"
#include "ifind/surface/mesh.hpp"

namespace ifind::sim {

struct SweepLine {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double spacing = 0.01;  // m
  double axial_roll = 0.0;
};

/// Named sweep. Single-arm sweeps use `left` only; dual sweeps set both lines
/// and are resampled to `waypoints` each.
struct SweepSpec {
  SweepLine left;
  std::optional<SweepLine> right;
  std::size_t waypoints = 0;  // 0 keeps the natural spacing (single arm only)
};

struct SafetyConfig {
  double soft_limit = 15.0;                            // N
  std::vector<std::string> back_arm_joints{"J2", "J3"};
  std::map<std::string, double> clutch_thresholds;     // overrides by joint id
  std::optional<std::vector<double>> safe_pose;        // default: home
};

struct SimConfig {
  std::string preset = "ifind-v2";  // ifind-v1, ifind-v2, ifind-v3 or a chain/rig file
  std::string mesh = "phantom-abdomen";
  std::filesystem::path base_dir;   // relative paths resolve against this
  std::uint64_t seed = 1;
  double dt = 0.02;                 // s
  int port = 8765;
  std::optional<Transform> base;    // single-arm base placement in the world
  double stiffness = safety::kDefaultStiffness;
  double friction = safety::kDefaultFriction;
  safety::SensorModel sensor;
  double indentation = 0.003;       // m
  double clearance_margin = 0.02;   // m
  SafetyConfig safety;
  std::map<std::string, SweepSpec> sweeps;
};

/// Default world placement of a single arm: beside the bed, facing across it.
Transform default_single_base();

enum class CommandKind {
  Jog,
  MoveTo,
  FollowSweep,
  SetIndentation,
  EStop,
  Reset,
  Home,
  Grade,
  Questionnaire,
  Describe,
};

std::string_view to_string(CommandKind k);
std::optional<CommandKind> command_kind_from_string(std::string_view s);
/// Kinds refused while the mode is FAULT.
bool is_motion(CommandKind k);

struct Command {
  nlohmann::json request_id;  // echoed verbatim
  CommandKind kind = CommandKind::Describe;
  nlohmann::json params = nlohmann::json::object();
};

/// {"request_id", "kind", "params"}. Throws ParseError.
Command parse_command(const nlohmann::json& j);
Command parse_command_line(std::string_view line);
nlohmann::json to_json(const Command& c);

struct TimedCommand {
  std::uint64_t tick = 0;
  Command command;
};

struct Scenario {
  std::string name;
  SimConfig config;
  std::uint64_t ticks = 100;
  std::vector<TimedCommand> commands;
};

/// Throws ParseError for malformed input.
SimConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// A file path, or the name of a bundled scenario ("v2-surface-follow", "v3-dual-sweep").
Scenario load_scenario(std::string_view path_or_name);
std::vector<std::string> bundled_scenarios();
/// A config file, or a bundled scenario name standing for its config.
SimConfig load_config(std::string_view path_or_name);

/// "phantom-abdomen" (bundled) or an OFF path resolved against `base_dir`.
surface::SurfaceMesh load_mesh_source(std::string_view mesh, const std::filesystem::path& base_dir);

bool is_dual(const SimConfig& cfg);

}  // namespace ifind::sim
