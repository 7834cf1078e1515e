#pragma once

#include <nlohmann/json.hpp>

#include "ifind/common/geometry.hpp"

namespace ifind::json_util {

Vec3 vec3(const nlohmann::json& j);
nlohmann::json to_json(const Vec3& v);

// {"xyz": [..], "rpy": [..]} with either key optional.
Transform transform(const nlohmann::json& j);

// {"position": [x,y,z], "quaternion": [w,x,y,z]}
Pose pose(const nlohmann::json& j);
nlohmann::json to_json(const Pose& p);

}  // namespace ifind::json_util
