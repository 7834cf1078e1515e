#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ifind/common/geometry.hpp"

namespace ifind::kin {

using JointVector = Eigen::VectorXd;

enum class JointKind { Revolute, Prismatic };

struct JointSpec {
  std::string id;
  JointKind kind = JointKind::Revolute;
  Vec3 axis = Vec3::UnitZ();
  double min = 0.0;
  double max = 0.0;
  double home = 0.0;
  std::optional<double> clutch_threshold;  // N*m for revolute, N for prismatic
  double max_velocity = 0.5;                // rad/s or m/s
  Transform origin = Transform::Identity();  // parent joint frame -> this frame

  // True when the limits cover a full turn; such joints wrap instead of clamp.
  bool full_circle() const;
};

// The compensated joint receives a passive rotation of -q(driver) about the
// driver's axis, applied in its own frame ahead of its joint motion.
struct ParallelogramPair {
  std::size_t driver = 0;
  std::size_t compensated = 0;
};

struct KinematicChain {
  std::string name;
  std::vector<JointSpec> joints;
  Transform tool = Transform::Identity();
  std::vector<ParallelogramPair> parallelogram_pairs;

  std::size_t size() const { return joints.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
};

/// Bundled preset ids: "ifind-v1", "ifind-v2", "ifind-v3-arm".
const std::vector<std::string>& preset_names();

/// Loads a bundled preset by id, or a chain config file by path.
/// Throws UnknownPreset when neither matches, InvalidConfig on bad content.
KinematicChain load_chain(std::string_view preset_or_path);

/// Raw bundled config text for a preset, bit-identical to the shipped file.
std::string_view preset_config_text(std::string_view preset);

KinematicChain parse_chain(const nlohmann::json& config);
KinematicChain parse_chain_text(std::string_view text);

/// Re-checks every chain invariant; throws InvalidConfig.
void validate(const KinematicChain& chain);

/// Throws LimitViolation when q has the wrong size or leaves the limits.
void check_limits(const KinematicChain& chain, const JointVector& q);

bool within_limits(const KinematicChain& chain, const JointVector& q);

JointVector home(const KinematicChain& chain);

/// Wraps full-circle joints into their range and clamps the rest.
JointVector clamp_to_limits(const KinematicChain& chain, JointVector q);

}  // namespace ifind::kin
