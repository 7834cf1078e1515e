#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ifind/safety/contact.hpp"
#include "ifind/surface/sweep.hpp"

namespace ifind::session {

struct StandardView {
  std::string name;
  surface::ContactPose target;
  double position_tolerance = 0.01;    // m
  double orientation_tolerance = 0.1;  // rad
  double force_min = 3.0;              // N
  double force_max = 12.0;             // N
};

/// The seven bundled abdominal views, authored on the phantom mesh.
std::vector<StandardView> standard_views();
std::vector<StandardView> parse_views(const nlohmann::json& j);
/// Throws InvalidArgument for an unknown name.
const StandardView& find_view(const std::vector<StandardView>& views, std::string_view name);

enum class Grade { Good, Acceptable, Poor };
enum class Operator { Sonographer, Robot };

std::string_view to_string(Grade g);
std::string_view to_string(Operator o);
Grade grade_from_string(std::string_view s);        // throws ParseError
Operator operator_from_string(std::string_view s);  // throws ParseError

struct GradeRecord {
  std::string view;
  Operator op = Operator::Robot;
  Grade grade = Grade::Poor;
  double position_error = 0.0;     // m
  double orientation_error = 0.0;  // rad
  double normal_force = 0.0;       // N
  std::uint64_t tick = 0;
};

nlohmann::json to_json(const GradeRecord& r);
GradeRecord grade_record_from_json(const nlohmann::json& j);

/// Slack on the force window for an acceptable grade, as a fraction of each bound.
constexpr double kForceSlack = 0.2;

Grade grade(const StandardView& view, double position_error, double orientation_error,
            double normal_force);

/// Grades an achieved probe tip pose and contact force against a view target.
GradeRecord grade_acquisition(const StandardView& view, const Pose& achieved_tip,
                              const safety::ContactForce& force, Operator op = Operator::Robot,
                              std::uint64_t tick = 0);

}  // namespace ifind::session
