#include "ifind/common/json_util.hpp"

#include "ifind/common/error.hpp"

namespace ifind::json_util {

Vec3 vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::InvalidConfig, "expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Transform transform(const nlohmann::json& j) {
  const Vec3 xyz = j.contains("xyz") ? vec3(j["xyz"]) : Vec3::Zero();
  const Vec3 rpy = j.contains("rpy") ? vec3(j["rpy"]) : Vec3::Zero();
  return make_transform(xyz, rpy);
}

Pose pose(const nlohmann::json& j) {
  Pose p;
  p.position = vec3(j.at("position"));
  const auto& q = j.at("quaternion");
  if (!q.is_array() || q.size() != 4)
    throw Error(ErrorCode::InvalidConfig, "quaternion must be [w, x, y, z]");
  p.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                       q[3].get<double>());
  if (p.orientation.norm() < 1e-12) throw Error(ErrorCode::InvalidConfig, "zero quaternion");
  p.orientation.normalize();
  return p;
}

nlohmann::json to_json(const Pose& p) {
  const Quat q = canonical(p.orientation);
  return {{"position", to_json(p.position)},
          {"quaternion", nlohmann::json::array({q.w(), q.x(), q.y(), q.z()})}};
}

}  // namespace ifind::json_util
