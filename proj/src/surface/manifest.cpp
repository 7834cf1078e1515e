#include "ifind/surface/manifest.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"

namespace ifind::surface {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

MeshManifest make_manifest(std::string name, const SurfaceMesh& mesh, std::string_view off_bytes) {
  MeshManifest m;
  m.name = std::move(name);
  m.vertex_count = mesh.vertices().size();
  m.triangle_count = mesh.triangles().size();
  m.bbox_min = m.bbox_max = mesh.vertices().front();
  for (const auto& v : mesh.vertices()) {
    m.bbox_min = m.bbox_min.cwiseMin(v);
    m.bbox_max = m.bbox_max.cwiseMax(v);
  }
  m.sha256 = sha256_hex(off_bytes);
  return m;
}

nlohmann::json to_json(const MeshManifest& m) {
  return {{"name", m.name},
          {"vertex_count", m.vertex_count},
          {"triangle_count", m.triangle_count},
          {"bbox_min", json_util::to_json(m.bbox_min)},
          {"bbox_max", json_util::to_json(m.bbox_max)},
          {"sha256", m.sha256}};
}

MeshManifest manifest_from_json(const nlohmann::json& j) {
  MeshManifest m;
  m.name = j.at("name").get<std::string>();
  m.vertex_count = j.at("vertex_count").get<std::size_t>();
  m.triangle_count = j.at("triangle_count").get<std::size_t>();
  m.bbox_min = json_util::vec3(j.at("bbox_min"));
  m.bbox_max = json_util::vec3(j.at("bbox_max"));
  m.sha256 = j.at("sha256").get<std::string>();
  return m;
}

}  // namespace ifind::surface
