#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "ifind/common/bundled.hpp"
#include "ifind/common/error.hpp"
#include "ifind/parallel/batch.hpp"
#include "ifind/surface/manifest.hpp"
#include "ifind/surface/mesh.hpp"
#include "ifind/surface/shapes.hpp"
#include "ifind/surface/sweep.hpp"

using namespace ifind;
using namespace ifind::surface;

namespace {

const SurfaceMesh& phantom() {
  static const SurfaceMesh mesh = parse_off(bundled::lookup("meshes/phantom-abdomen.off"));
  return mesh;
}

Vec3 segment_closest(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return a + t * ab;
}

// Plane projection when it lands inside, else the nearest edge point. A
// different construction from the Voronoi-region walk used by the library.
Vec3 oracle_triangle_closest(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a).normalized();
  const Vec3 q = p - (p - a).dot(n) * n;
  const bool inside = (b - a).cross(q - a).dot(n) >= 0 && (c - b).cross(q - b).dot(n) >= 0 &&
                      (a - c).cross(q - c).dot(n) >= 0;
  if (inside) return q;
  Vec3 best = segment_closest(p, a, b);
  for (const Vec3& e : {segment_closest(p, b, c), segment_closest(p, c, a)})
    if ((e - p).squaredNorm() < (best - p).squaredNorm()) best = e;
  return best;
}

double oracle_distance(const SurfaceMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  Vec3 a, b, c;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    mesh.triangle_corners(t, a, b, c);
    best = std::min(best, (oracle_triangle_closest(p, a, b, c) - p).norm());
  }
  return best;
}

// Ray-plane intersection followed by an inside test on edge cross products.
std::optional<double> oracle_raycast(const SurfaceMesh& mesh, const Vec3& o, const Vec3& d) {
  std::optional<double> best;
  Vec3 a, b, c;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    mesh.triangle_corners(t, a, b, c);
    const Vec3 n = (b - a).cross(c - a);
    const double denom = n.dot(d);
    if (std::abs(denom) < 1e-15) continue;
    const double s = n.dot(a - o) / denom;
    if (s <= 0) continue;
    const Vec3 q = o + s * d;
    if ((b - a).cross(q - a).dot(n) >= 0 && (c - b).cross(q - b).dot(n) >= 0 &&
        (a - c).cross(q - c).dot(n) >= 0 && (!best || s < *best))
      best = s;
  }
  return best;
}

// Subdivided icosahedron projected onto the unit sphere.
SurfaceMesh icosphere(int levels) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                         {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      return mid[key] = static_cast<std::uint32_t>(v.size() - 1);
    };
    std::vector<Triangle> next;
    for (const auto& t : f) {
      const auto a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      next.insert(next.end(), {Triangle{t[0], a, c}, Triangle{t[1], b, a}, Triangle{t[2], c, b}, Triangle{a, b, c}});
    }
    f = std::move(next);
  }
  return SurfaceMesh(std::move(v), std::move(f));
}

std::vector<Vec3> random_points(std::size_t n, unsigned seed, const Vec3& lo, const Vec3& hi) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out(n);
  for (auto& p : out)
    for (int i = 0; i < 3; ++i) p[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("unit sphere mesh file has normals along the vertex positions") {
  const auto mesh = parse_off(to_off(icosphere(7)));
  for (std::size_t i = 0; i < mesh.vertices().size(); ++i) {
    CHECK((mesh.vertex_normals()[i] - mesh.vertices()[i].normalized()).norm() < 1e-3);
    CHECK(mesh.vertex_normals()[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("out-of-range index and zero-area triangles are degenerate") {
  std::string off = "OFF\n100 1 0\n";
  for (int i = 0; i < 100; ++i) off += std::to_string(i) + " 0 " + std::to_string(i % 7) + "\n";
  CHECK(code_of([&] { parse_off(off + "3 0 1 99999\n"); }) == ErrorCode::DegenerateMesh);
  CHECK(code_of([] {
          SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {Triangle{0, 1, 2}});
        }) == ErrorCode::DegenerateMesh);
  CHECK(code_of([] { parse_off("PLY\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_mesh("/nonexistent/mesh.off"); }) == ErrorCode::ParseError);
}

TEST_CASE("bundled phantom matches its manifest") {
  const auto manifest = manifest_from_json(
      nlohmann::json::parse(std::ifstream(std::filesystem::path(IFIND_DATA_DIR) / "meshes/phantom-abdomen.manifest.json")));
  const auto& mesh = phantom();
  CHECK(manifest.name == "phantom-abdomen");
  CHECK(mesh.vertices().size() == manifest.vertex_count);
  CHECK(mesh.triangle_count() == manifest.triangle_count);
  Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
  for (const auto& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  CHECK((lo - manifest.bbox_min).norm() < 1e-12);
  CHECK((hi - manifest.bbox_max).norm() < 1e-12);
  CHECK((hi - Vec3(0.18, 0.14, 0.10)).norm() < 1e-12);
  CHECK(sha256_hex(bundled::lookup("meshes/phantom-abdomen.off")) == manifest.sha256);
}

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("phantom normals point away from the centroid") {
  const auto& mesh = phantom();
  for (std::size_t i = 0; i < mesh.vertices().size(); ++i) {
    CHECK(mesh.vertex_normals()[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh.vertex_normals()[i].dot(mesh.vertices()[i] - mesh.centroid()) > 0);
  }
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec3 a, b, c;
    mesh.triangle_corners(t, a, b, c);
    CHECK(mesh.face_normals()[t].dot((a + b + c) / 3 - mesh.centroid()) > 0);
  }
}

TEST_CASE("inward-wound input is reoriented outward") {
  const auto sphere = make_sphere(0.5, 6, 12);
  auto tris = sphere.triangles();
  for (auto& t : tris) std::swap(t[1], t[2]);
  const SurfaceMesh flipped(sphere.vertices(), tris);
  for (std::size_t t = 0; t < flipped.triangle_count(); ++t)
    CHECK((flipped.face_normals()[t] - sphere.face_normals()[t]).norm() < 1e-12);
}

TEST_CASE("closest point") {
  SUBCASE("on a triangle interior") {
    const auto patch = make_patch(0.2, 0.2, 4, 4);
    const Vec3 p(0.013, -0.021, 0.0);
    const auto sp = closest_point(patch, p);
    CHECK((sp.point - p).norm() < 1e-15);
    CHECK(sp.distance < 1e-15);
    CHECK((sp.normal - Vec3::UnitZ()).norm() < 1e-12);
  }
  SUBCASE("sphere centre lands at radius 1") {
    const auto sphere = make_sphere(1.0, 20, 40);
    const auto sp = closest_point(sphere, Vec3::Zero());
    CHECK(sp.distance == doctest::Approx(1.0).epsilon(0.01));
    CHECK(sp.distance <= 1.0);
  }
  SUBCASE("random points against an independent all-triangle scan") {
    const auto pts = random_points(100, 1, Vec3(-0.25, -0.2, -0.05), Vec3(0.25, 0.2, 0.2));
    for (const auto& p : pts) {
      const auto sp = closest_point(phantom(), p);
      CHECK(sp.distance == doctest::Approx(oracle_distance(phantom(), p)).epsilon(1e-12));
      CHECK((sp.point - p).norm() == doctest::Approx(sp.distance).epsilon(1e-12));
      Vec3 a, b, c;
      phantom().triangle_corners(sp.triangle, a, b, c);
      CHECK((oracle_triangle_closest(p, a, b, c) - sp.point).norm() < 1e-12);
    }
  }
  SUBCASE("never farther than the nearest vertex") {
    const auto pts = random_points(1000, 2, Vec3(-0.3, -0.3, -0.1), Vec3(0.3, 0.3, 0.3));
    const auto res = parallel::closest_points(phantom(), pts, parallel::Exec::Parallel);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& v : phantom().vertices()) nearest = std::min(nearest, (v - pts[i]).norm());
      CHECK(res[i].distance <= nearest + 1e-15);
    }
  }
  SUBCASE("ties go to the lowest triangle id") {
    // The shared vertex of a fan is equidistant from every triangle touching it.
    const auto patch = make_patch(0.2, 0.2, 2, 2);
    const auto sp = closest_point(patch, Vec3(0, 0, 0.1));
    std::size_t first = patch.triangle_count();
    for (std::size_t t = 0; t < patch.triangle_count(); ++t) {
      Vec3 a, b, c;
      patch.triangle_corners(t, a, b, c);
      if ((closest_point_on_triangle(Vec3(0, 0, 0.1), a, b, c) - Vec3(0, 0, 0)).norm() < 1e-15) {
        first = t;
        break;
      }
    }
    CHECK(sp.triangle == first);
  }
}

TEST_CASE("probe pose") {
  const auto patch = make_patch(0.2, 0.2, 4, 4);
  const Vec3 s(0.02, 0.03, 0.0);
  SUBCASE("indentation 0, roll 0") {
    const Pose p = probe_pose_at(patch, {s, Vec3::UnitZ(), 0.0, 0.0});
    CHECK((p.position - s).norm() < 1e-15);
    const Eigen::Matrix3d r = p.orientation.toRotationMatrix();
    CHECK((r.col(2) + Vec3::UnitZ()).norm() < 1e-12);
    CHECK((r.col(0) - Vec3::UnitX()).norm() < 1e-12);
  }
  SUBCASE("indentation displaces along -normal") {
    const Pose p = probe_pose_at(patch, {s, Vec3::UnitZ(), 0.01, 0.0});
    CHECK((p.position - (s - 0.01 * Vec3::UnitZ())).norm() < 1e-15);
  }
  SUBCASE("roll pi/2 is a quarter turn about the probe axis") {
    const Pose a = probe_pose_at(patch, {s, Vec3::UnitZ(), 0.0, 0.0});
    const Pose b = probe_pose_at(patch, {s, Vec3::UnitZ(), 0.0, kPi / 2});
    const Vec3 err = rotation_error(a.orientation, b.orientation);
    CHECK(err.norm() == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK((err.normalized() - a.orientation.toRotationMatrix().col(2)).norm() < 1e-12);
  }
  SUBCASE("normal along x uses world y as the roll reference") {
    const Pose p = probe_pose({Vec3::Zero(), Vec3::UnitX(), 0.0, 0.0});
    const Eigen::Matrix3d r = p.orientation.toRotationMatrix();
    CHECK((r.col(2) + Vec3::UnitX()).norm() < 1e-12);
    CHECK((r.col(0) - Vec3::UnitY()).norm() < 1e-12);
  }
  SUBCASE("off surface") {
    CHECK(code_of([&] { probe_pose_at(patch, {Vec3(0, 0, 1e-5), Vec3::UnitZ(), 0.0, 0.0}); }) ==
          ErrorCode::OffSurface);
  }
}

TEST_CASE("sweep generation") {
  const auto patch = make_patch(0.4, 0.4, 8, 8);
  SUBCASE("start = end") {
    CHECK(code_of([&] { generate_sweep(patch, Vec3(0.01, 0, 0), Vec3(0.01, 0, 0), 0.02, 0.0); }) ==
          ErrorCode::EmptyPath);
  }
  SUBCASE("far endpoint") {
    CHECK(code_of([&] { generate_sweep(patch, Vec3(0, 0, 0.06), Vec3(0.1, 0, 0), 0.02, 0.0); }) ==
          ErrorCode::OffSurface);
  }
  SUBCASE("bad arguments") {
    CHECK(code_of([&] { generate_sweep(patch, Vec3(0, 0, 0), Vec3(0.1, 0, 0), 0.0, 0.0); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { generate_sweep(patch, Vec3(0, 0, 0), Vec3(0.1, 0, 0), 0.02, -0.001); }) ==
          ErrorCode::InvalidArgument);
  }
  SUBCASE("flat 0.10 m at 0.02 m spacing gives 6 colinear waypoints") {
    const auto path = generate_sweep(patch, Vec3(-0.05, 0.01, 0), Vec3(0.05, 0.01, 0), 0.02, 0.0);
    REQUIRE(path.waypoints.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      const Vec3 expected(-0.05 + 0.02 * static_cast<double>(i), 0.01, 0.0);
      CHECK((path.waypoints[i].surface_point - expected).norm() < 1e-12);
    }
    CHECK(path.spacing == 0.02);
    CHECK(path_length(path) == doctest::Approx(0.10).epsilon(1e-12));
  }
  SUBCASE("apex to flank on the phantom") {
    const auto& mesh = phantom();
    const auto path = generate_sweep(mesh, Vec3(0, 0, 0.1), Vec3(0.17, 0.02, 0.03), 0.005, 0.002, 0.4);
    REQUIRE(path.waypoints.size() >= 2);
    CHECK(static_cast<double>(path.waypoints.size()) >= std::ceil(path_length(path) / 0.005));
    for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
      const auto& w = path.waypoints[i];
      CHECK(w.normal.dot(w.surface_point - mesh.centroid()) > 0);
      CHECK(w.indentation == 0.002);
      CHECK(oracle_distance(mesh, w.surface_point) < 1e-12);
      if (i > 0) CHECK((w.surface_point - path.waypoints[i - 1].surface_point).norm() <= 0.005);
      const Pose p = probe_pose_at(mesh, w);
      CHECK(p.orientation.toRotationMatrix().col(2).dot(w.normal) == doctest::Approx(-1.0).epsilon(1e-9));
    }
  }
  SUBCASE("random sweeps keep the anti-parallel axis and spacing bound") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 25; ++k) {
      const Vec3 a = closest_point(phantom(), Vec3(0.2 * u(rng), 0.15 * u(rng), 0.12)).point;
      const Vec3 b = closest_point(phantom(), Vec3(0.2 * u(rng), 0.15 * u(rng), 0.12)).point;
      const double spacing = 0.004 + 0.01 * (u(rng) + 1.0);
      const auto path = generate_sweep(phantom(), a, b, spacing, 0.003, u(rng));
      for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
        const auto& w = path.waypoints[i];
        const Eigen::Matrix3d r = probe_pose_at(phantom(), w).orientation.toRotationMatrix();
        CHECK(std::abs(r.col(2).dot(w.normal) + 1.0) < 1e-9);
        if (i > 0) CHECK((w.surface_point - path.waypoints[i - 1].surface_point).norm() <= spacing);
      }
    }
  }
  SUBCASE("resample") {
    const auto path = generate_sweep(phantom(), Vec3(-0.05, -0.1, 0.1), Vec3(-0.05, 0.1, 0.1), 0.01, 0.0);
    const auto r = resample(phantom(), path, 10);
    REQUIRE(r.waypoints.size() == 10);
    CHECK((r.waypoints.front().surface_point - path.waypoints.front().surface_point).norm() < 1e-12);
    CHECK((r.waypoints.back().surface_point - path.waypoints.back().surface_point).norm() < 1e-12);
  }
}

TEST_CASE("raycast") {
  const auto patch = make_patch(0.2, 0.2, 4, 4);
  SUBCASE("0.05 m above the patch") {
    const auto hit = raycast(patch, Vec3(0.01, 0.02, 0.05), -Vec3::UnitZ());
    REQUIRE(hit);
    CHECK(*hit == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("pointing away misses") { CHECK_FALSE(raycast(patch, Vec3(0.01, 0.02, 0.05), Vec3::UnitZ())); }
  SUBCASE("random rays against an independent scan") {
    const auto origins = random_points(100, 4, Vec3(-0.25, -0.2, 0.0), Vec3(0.25, 0.2, 0.3));
    const auto targets = random_points(100, 5, Vec3(-0.15, -0.1, 0.0), Vec3(0.15, 0.1, 0.08));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < origins.size(); ++i) {
      const Vec3 d = (targets[i] - origins[i]).normalized();
      const auto got = raycast(phantom(), origins[i], d);
      const auto want = oracle_raycast(phantom(), origins[i], d);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        ++hits;
        CHECK(*got == doctest::Approx(*want).epsilon(1e-9));
      }
    }
    CHECK(hits > 50);
  }
  SUBCASE("just above the surface along -normal") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int k = 0; k < 200; ++k) {
      const auto t = static_cast<std::size_t>(rng() % phantom().triangle_count());
      Vec3 a, b, c;
      phantom().triangle_corners(t, a, b, c);
      double s = u(rng), r = u(rng);
      if (s + r > 0.95) {
        s *= 0.5;
        r *= 0.5;
      }
      const Vec3 p = a + s * (b - a) + r * (c - a);
      const Vec3 n = phantom().face_normals()[t];
      for (double eps : {1e-4, 1e-3}) {
        const auto hit = raycast(phantom(), p + eps * n, -n);
        REQUIRE(hit);
        CHECK(*hit <= 2 * eps);
      }
    }
  }
}

TEST_CASE("mesh save and load round trip is bit-identical") {
  const auto path = std::filesystem::temp_directory_path() / "ifind_surface_roundtrip.off";
  save_mesh(phantom(), path);
  const auto once = load_mesh(path);
  save_mesh(once, path);
  const auto twice = load_mesh(path);
  std::filesystem::remove(path);
  REQUIRE(once.vertices().size() == phantom().vertices().size());
  for (std::size_t i = 0; i < once.vertices().size(); ++i) {
    CHECK(once.vertices()[i] == phantom().vertices()[i]);
    CHECK(twice.vertices()[i] == once.vertices()[i]);
  }
  CHECK(once.triangles() == phantom().triangles());
  CHECK(to_off(once) == to_off(twice));
}

TEST_CASE("serial and parallel raycasts agree") {
  const auto origins = random_points(300, 8, Vec3(-0.2, -0.15, 0.15), Vec3(0.2, 0.15, 0.3));
  const auto a = parallel::raycasts(phantom(), origins, -Vec3::UnitZ(), parallel::Exec::Serial);
  const auto b = parallel::raycasts(phantom(), origins, -Vec3::UnitZ(), parallel::Exec::Parallel);
  CHECK(a == b);
}
