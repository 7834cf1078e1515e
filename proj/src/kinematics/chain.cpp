#include "ifind/kinematics/chain.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ifind/common/bundled.hpp"
#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"

namespace ifind::kin {

namespace {

constexpr double kLimitSlack = 1e-12;

const std::map<std::string, std::size_t, std::less<>>& preset_joint_counts() {
  static const std::map<std::string, std::size_t, std::less<>> counts = {
      {"ifind-v1", 7}, {"ifind-v2", 8}, {"ifind-v3-arm", 8}};
  return counts;
}

JointKind parse_kind(const std::string& s) {
  if (s == "revolute") return JointKind::Revolute;
  if (s == "prismatic") return JointKind::Prismatic;
  throw Error(ErrorCode::InvalidConfig, "unknown joint kind '" + s + "'");
}

}  // namespace

bool JointSpec::full_circle() const {
  return kind == JointKind::Revolute && (max - min) >= 2.0 * kPi - 1e-9;
}

std::optional<std::size_t> KinematicChain::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (joints[i].id == id) return i;
  return std::nullopt;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"ifind-v1", "ifind-v2", "ifind-v3-arm"};
  return names;
}

std::string_view preset_config_text(std::string_view preset) {
  if (!preset_joint_counts().contains(preset)) return {};
  return bundled::lookup("presets/" + std::string(preset) + ".json");
}

KinematicChain load_chain(std::string_view preset_or_path) {
  if (auto text = preset_config_text(preset_or_path); !text.empty())
    return parse_chain_text(text);

  const std::filesystem::path path{std::string(preset_or_path)};
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::UnknownPreset,
                "unknown preset or missing chain config '" + std::string(preset_or_path) + "'");
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_chain_text(buf.str());
}

KinematicChain parse_chain_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("chain config is not valid JSON: ") + e.what());
  }
  return parse_chain(j);
}

KinematicChain parse_chain(const nlohmann::json& config) {
  KinematicChain chain;
  try {
    chain.name = config.value("name", std::string{});
    for (const auto& jj : config.at("joints")) {
      JointSpec spec;
      spec.id = jj.at("id").get<std::string>();
      spec.kind = parse_kind(jj.at("kind").get<std::string>());
      spec.axis = json_util::vec3(jj.at("axis"));
      const auto& lim = jj.at("limits");
      if (!lim.is_array() || lim.size() != 2)
        throw Error(ErrorCode::InvalidConfig, "joint " + spec.id + ": limits must be [min, max]");
      spec.min = lim[0].get<double>();
      spec.max = lim[1].get<double>();
      spec.home = jj.value("home", 0.0);
      if (jj.contains("clutch_threshold") && !jj["clutch_threshold"].is_null())
        spec.clutch_threshold = jj["clutch_threshold"].get<double>();
      spec.max_velocity =
          jj.value("max_velocity", spec.kind == JointKind::Revolute ? 0.5 : 0.1);
      if (jj.contains("origin")) spec.origin = json_util::transform(jj["origin"]);
      chain.joints.push_back(std::move(spec));
    }
    if (config.contains("tool")) chain.tool = json_util::transform(config["tool"]);
    if (config.contains("parallelogram")) {
      for (const auto& pair : config["parallelogram"]) {
        const auto driver = chain.index_of(pair.at(0).get<std::string>());
        const auto comp = chain.index_of(pair.at(1).get<std::string>());
        if (!driver || !comp)
          throw Error(ErrorCode::InvalidConfig, "parallelogram pair names an unknown joint");
        chain.parallelogram_pairs.push_back({*driver, *comp});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed chain config: ") + e.what());
  }
  validate(chain);
  return chain;
}

void validate(const KinematicChain& chain) {
  if (chain.joints.empty()) throw Error(ErrorCode::InvalidConfig, "chain has no joints");
  if (auto it = preset_joint_counts().find(chain.name); it != preset_joint_counts().end()) {
    if (chain.joints.size() != it->second)
      throw Error(ErrorCode::InvalidConfig,
                  "preset " + chain.name + " requires " + std::to_string(it->second) +
                      " joints, config has " + std::to_string(chain.joints.size()));
  }
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const auto& j = chain.joints[i];
    if (std::abs(j.axis.norm() - 1.0) >= 1e-9)
      throw Error(ErrorCode::InvalidConfig, "joint " + j.id + ": axis is not unit length");
    if (!(j.min <= j.max))
      throw Error(ErrorCode::InvalidConfig, "joint " + j.id + ": limit min exceeds max");
    if (!(j.min <= j.home && j.home <= j.max))
      throw Error(ErrorCode::InvalidConfig, "joint " + j.id + ": home outside limits");
    if (j.clutch_threshold && !(*j.clutch_threshold > 0.0))
      throw Error(ErrorCode::InvalidConfig, "joint " + j.id + ": clutch threshold must be positive");
    if (!(j.max_velocity > 0.0))
      throw Error(ErrorCode::InvalidConfig, "joint " + j.id + ": max_velocity must be positive");
    for (std::size_t k = 0; k < i; ++k)
      if (chain.joints[k].id == j.id)
        throw Error(ErrorCode::InvalidConfig, "duplicate joint id " + j.id);
  }
  for (const auto& p : chain.parallelogram_pairs) {
    if (p.driver >= chain.size() || p.compensated >= chain.size() || p.driver >= p.compensated)
      throw Error(ErrorCode::InvalidConfig, "parallelogram compensation must sit distal to its driver");
    if (chain.joints[p.driver].kind != JointKind::Revolute)
      throw Error(ErrorCode::InvalidConfig, "parallelogram driver must be revolute");
  }
}

void check_limits(const KinematicChain& chain, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != chain.size())
    throw Error(ErrorCode::LimitViolation,
                "joint vector has " + std::to_string(q.size()) + " values, chain has " +
                    std::to_string(chain.size()) + " joints");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& j = chain.joints[i];
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!(v >= j.min - kLimitSlack && v <= j.max + kLimitSlack)) {
      std::ostringstream msg;
      msg << "joint " << j.id << " value " << v << " outside [" << j.min << ", " << j.max << "]";
      throw Error(ErrorCode::LimitViolation, msg.str());
    }
  }
}

bool within_limits(const KinematicChain& chain, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != chain.size()) return false;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!(v >= chain.joints[i].min - kLimitSlack && v <= chain.joints[i].max + kLimitSlack))
      return false;
  }
  return true;
}

JointVector home(const KinematicChain& chain) {
  JointVector q(static_cast<Eigen::Index>(chain.size()));
  for (std::size_t i = 0; i < chain.size(); ++i)
    q[static_cast<Eigen::Index>(i)] = chain.joints[i].home;
  return q;
}

JointVector clamp_to_limits(const KinematicChain& chain, JointVector q) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& j = chain.joints[i];
    double& v = q[static_cast<Eigen::Index>(i)];
    if (j.full_circle()) {
      const double span = 2.0 * kPi;
      while (v > j.max) v -= span;
      while (v < j.min) v += span;
    }
    v = std::clamp(v, j.min, j.max);
  }
  return q;
}

}  // namespace ifind::kin
