#include "ifind/sim/config.hpp"

#include <fstream>
#include <sstream>

#include "ifind/common/bundled.hpp"
#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"

namespace ifind::sim {

namespace {

constexpr std::string_view kBundledMesh = "phantom-abdomen";
const std::vector<std::string> kScenarioNames{"v2-surface-follow", "v3-dual-sweep"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SweepLine parse_line(const nlohmann::json& j) {
  SweepLine l;
  l.start = json_util::vec3(j.at("start"));
  l.end = json_util::vec3(j.at("end"));
  l.spacing = j.value("spacing", 0.01);
  l.axial_roll = j.value("axial_roll", 0.0);
  return l;
}

SweepSpec parse_sweep(const nlohmann::json& j) {
  SweepSpec s;
  if (j.contains("left")) {
    s.left = parse_line(j.at("left"));
    s.right = parse_line(j.at("right"));
    s.waypoints = j.value("waypoints", std::size_t{10});
  } else {
    s.left = parse_line(j);
    s.waypoints = j.value("waypoints", std::size_t{0});
  }
  return s;
}

}  // namespace

Transform default_single_base() {
  return make_transform(Vec3(0.0, -0.62, 0.05), Vec3(0.0, 0.0, kPi / 2));
}

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Jog: return "jog";
    case CommandKind::MoveTo: return "move_to";
    case CommandKind::FollowSweep: return "follow_sweep";
    case CommandKind::SetIndentation: return "set_indentation";
    case CommandKind::EStop: return "estop";
    case CommandKind::Reset: return "reset";
    case CommandKind::Home: return "home";
    case CommandKind::Grade: return "grade";
    case CommandKind::Questionnaire: return "questionnaire";
    case CommandKind::Describe: return "describe";
  }
  return "?";
}

std::optional<CommandKind> command_kind_from_string(std::string_view s) {
  for (auto k : {CommandKind::Jog, CommandKind::MoveTo, CommandKind::FollowSweep,
                 CommandKind::SetIndentation, CommandKind::EStop, CommandKind::Reset,
                 CommandKind::Home, CommandKind::Grade, CommandKind::Questionnaire,
                 CommandKind::Describe})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

bool is_motion(CommandKind k) {
  switch (k) {
    case CommandKind::Jog:
    case CommandKind::MoveTo:
    case CommandKind::FollowSweep:
    case CommandKind::Home:
      return true;
    default:
      return false;
  }
}

Command parse_command(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "command must be an object");
  Command c;
  c.request_id = j.contains("request_id") ? j.at("request_id") : nlohmann::json();
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorCode::ParseError, "command needs a string 'kind'");
  const auto name = j.at("kind").get<std::string>();
  const auto kind = command_kind_from_string(name);
  if (!kind) throw Error(ErrorCode::ParseError, "unknown command kind '" + name + "'");
  c.kind = *kind;
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw Error(ErrorCode::ParseError, "'params' must be an object");
    c.params = j.at("params");
  }
  return c;
}

Command parse_command_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("command is not valid JSON: ") + e.what());
  }
  return parse_command(j);
}

nlohmann::json to_json(const Command& c) {
  return {{"request_id", c.request_id}, {"kind", std::string(to_string(c.kind))}, {"params", c.params}};
}

SimConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  SimConfig c;
  c.base_dir = base_dir;
  try {
    c.preset = j.value("preset", c.preset);
    c.mesh = j.value("mesh", c.mesh);
    c.seed = j.value("seed", c.seed);
    c.dt = j.value("dt", c.dt);
    c.port = j.value("port", c.port);
    if (j.contains("base")) c.base = json_util::transform(j.at("base"));
    if (j.contains("contact")) {
      c.stiffness = j.at("contact").value("stiffness", c.stiffness);
      c.friction = j.at("contact").value("friction", c.friction);
    }
    if (j.contains("sensor")) {
      c.sensor.quantization_step = j.at("sensor").value("quantization_step", c.sensor.quantization_step);
      c.sensor.noise_sigma = j.at("sensor").value("noise_sigma", c.sensor.noise_sigma);
    }
    c.indentation = j.value("indentation", c.indentation);
    c.clearance_margin = j.value("clearance_margin", c.clearance_margin);
    if (j.contains("safety")) {
      const auto& s = j.at("safety");
      c.safety.soft_limit = s.value("soft_limit", c.safety.soft_limit);
      if (s.contains("back_arm_joints"))
        c.safety.back_arm_joints = s.at("back_arm_joints").get<std::vector<std::string>>();
      if (s.contains("clutch_thresholds"))
        c.safety.clutch_thresholds = s.at("clutch_thresholds").get<std::map<std::string, double>>();
      if (s.contains("safe_pose")) c.safety.safe_pose = s.at("safe_pose").get<std::vector<double>>();
    }
    if (j.contains("sweeps"))
      for (const auto& [name, spec] : j.at("sweeps").items()) c.sweeps[name] = parse_sweep(spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed simulation config: ") + e.what());
  }
  if (!(c.dt > 0.0)) throw Error(ErrorCode::ParseError, "dt must be positive");
  if (!(c.stiffness > 0.0)) throw Error(ErrorCode::ParseError, "contact stiffness must be positive");
  if (!(c.sensor.quantization_step > 0.0) || c.sensor.noise_sigma < 0.0)
    throw Error(ErrorCode::ParseError, "sensor needs quantization_step > 0 and noise_sigma >= 0");
  if (c.indentation < 0.0) throw Error(ErrorCode::ParseError, "indentation must be non-negative");
  if (!(c.clearance_margin > 0.0)) throw Error(ErrorCode::ParseError, "clearance_margin must be positive");
  return c;
}

Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  Scenario s;
  s.config = parse_config(j, base_dir);
  try {
    s.name = j.value("name", std::string("scenario"));
    s.ticks = j.value("ticks", s.ticks);
    if (j.contains("commands")) {
      for (const auto& tc : j.at("commands")) {
        TimedCommand t;
        t.tick = tc.at("tick").get<std::uint64_t>();
        t.command = parse_command(tc);
        if (!s.commands.empty() && t.tick < s.commands.back().tick)
          throw Error(ErrorCode::ParseError, "scenario commands must be ordered by tick");
        s.commands.push_back(std::move(t));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(std::string_view path_or_name) {
  for (const auto& name : kScenarioNames) {
    if (name == path_or_name) {
      const auto text = bundled::lookup("scenarios/" + name + ".json");
      return parse_scenario(nlohmann::json::parse(text));
    }
  }
  const std::filesystem::path path{std::string(path_or_name)};
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

SimConfig load_config(std::string_view path_or_name) {
  for (const auto& name : kScenarioNames)
    if (name == path_or_name) return load_scenario(name).config;
  const std::filesystem::path path{std::string(path_or_name)};
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

std::vector<std::string> bundled_scenarios() { return kScenarioNames; }

surface::SurfaceMesh load_mesh_source(std::string_view mesh, const std::filesystem::path& base_dir) {
  if (mesh == kBundledMesh) return surface::parse_off(bundled::lookup("meshes/phantom-abdomen.off"));
  std::filesystem::path path{std::string(mesh)};
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return surface::load_mesh(path);
}

bool is_dual(const SimConfig& cfg) {
  if (cfg.preset == "ifind-v3") return true;
  if (cfg.preset.rfind("ifind-", 0) == 0) return false;
  std::filesystem::path path{cfg.preset};
  if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
  try {
    return nlohmann::json::parse(read_file(path)).contains("gantry");
  } catch (const nlohmann::json::exception&) {
    return false;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace ifind::sim
