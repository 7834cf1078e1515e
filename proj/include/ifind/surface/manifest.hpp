#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "ifind/surface/mesh.hpp"

namespace ifind::surface {

// Shipped next to a bundled mesh so consumers can verify they loaded the
// intended file.
struct MeshManifest {
  std::string name;
  std::size_t vertex_count = 0;
  std::size_t triangle_count = 0;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  std::string sha256;  // of the OFF file bytes, lowercase hex
};

std::string sha256_hex(std::string_view bytes);

MeshManifest make_manifest(std::string name, const SurfaceMesh& mesh, std::string_view off_bytes);

nlohmann::json to_json(const MeshManifest& m);
MeshManifest manifest_from_json(const nlohmann::json& j);

}  // namespace ifind::surface
