#include "ifind/session/views.hpp"

#include <nlohmann/json.hpp>

#include "ifind/common/bundled.hpp"
#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"

namespace ifind::session {

std::vector<StandardView> parse_views(const nlohmann::json& j) {
  std::vector<StandardView> out;
  try {
    for (const auto& v : j.at("views")) {
      StandardView view;
      view.name = v.at("name").get<std::string>();
      view.target.surface_point = json_util::vec3(v.at("surface_point"));
      view.target.normal = json_util::vec3(v.at("normal")).normalized();
      view.target.indentation = v.value("indentation", 0.0);
      view.target.axial_roll = v.value("axial_roll", 0.0);
      view.position_tolerance = v.at("position_tolerance").get<double>();
      view.orientation_tolerance = v.at("orientation_tolerance").get<double>();
      const auto& w = v.at("force_window");
      view.force_min = w.at(0).get<double>();
      view.force_max = w.at(1).get<double>();
      if (!(view.position_tolerance > 0.0) || !(view.orientation_tolerance > 0.0))
        throw Error(ErrorCode::InvalidConfig, "view '" + view.name + "': tolerances must be positive");
      if (!(view.force_min >= 0.0 && view.force_min < view.force_max))
        throw Error(ErrorCode::InvalidConfig, "view '" + view.name + "': force window must satisfy 0 <= min < max");
      out.push_back(std::move(view));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed views config: ") + e.what());
  }
  return out;
}

std::vector<StandardView> standard_views() {
  return parse_views(nlohmann::json::parse(bundled::lookup("views.json")));
}

const StandardView& find_view(const std::vector<StandardView>& views, std::string_view name) {
  for (const auto& v : views)
    if (v.name == name) return v;
  throw Error(ErrorCode::InvalidArgument, "unknown view '" + std::string(name) + "'");
}

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::Good: return "good";
    case Grade::Acceptable: return "acceptable";
    case Grade::Poor: return "poor";
  }
  return "?";
}

std::string_view to_string(Operator o) {
  return o == Operator::Sonographer ? "sonographer" : "robot";
}

Grade grade_from_string(std::string_view s) {
  for (auto g : {Grade::Good, Grade::Acceptable, Grade::Poor})
    if (to_string(g) == s) return g;
  throw Error(ErrorCode::ParseError, "unknown grade '" + std::string(s) + "'");
}

Operator operator_from_string(std::string_view s) {
  for (auto o : {Operator::Sonographer, Operator::Robot})
    if (to_string(o) == s) return o;
  throw Error(ErrorCode::ParseError, "unknown operator '" + std::string(s) + "'");
}

nlohmann::json to_json(const GradeRecord& r) {
  return {{"view", r.view},
          {"operator", std::string(to_string(r.op))},
          {"grade", std::string(to_string(r.grade))},
          {"position_error_m", r.position_error},
          {"orientation_error_rad", r.orientation_error},
          {"normal_force_n", r.normal_force},
          {"tick", r.tick}};
}

GradeRecord grade_record_from_json(const nlohmann::json& j) {
  try {
    GradeRecord r;
    r.view = j.at("view").get<std::string>();
    r.op = operator_from_string(j.at("operator").get<std::string>());
    r.grade = grade_from_string(j.at("grade").get<std::string>());
    r.position_error = j.value("position_error_m", 0.0);
    r.orientation_error = j.value("orientation_error_rad", 0.0);
    r.normal_force = j.value("normal_force_n", 0.0);
    r.tick = j.value("tick", std::uint64_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed grade record: ") + e.what());
  }
}

Grade grade(const StandardView& view, double position_error, double orientation_error,
            double normal_force) {
  const bool in_window = normal_force > 0.0 && normal_force >= view.force_min && normal_force <= view.force_max;
  if (position_error <= 0.5 * view.position_tolerance &&
      orientation_error <= 0.5 * view.orientation_tolerance && in_window)
    return Grade::Good;
  const bool in_slack = normal_force > 0.0 && normal_force >= view.force_min * (1.0 - kForceSlack) &&
                        normal_force <= view.force_max * (1.0 + kForceSlack);
  if (position_error <= view.position_tolerance &&
      orientation_error <= view.orientation_tolerance && in_slack)
    return Grade::Acceptable;
  return Grade::Poor;
}

GradeRecord grade_acquisition(const StandardView& view, const Pose& achieved_tip,
                              const safety::ContactForce& force, Operator op, std::uint64_t tick) {
  const Pose target = surface::probe_pose(view.target);
  GradeRecord r;
  r.view = view.name;
  r.op = op;
  r.position_error = (achieved_tip.position - target.position).norm();
  r.orientation_error = angular_distance(achieved_tip.orientation, target.orientation);
  r.normal_force = force.in_contact() ? force.normal : 0.0;
  r.grade = grade(view, r.position_error, r.orientation_error, r.normal_force);
  r.tick = tick;
  return r;
}

}  // namespace ifind::session
