#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "ifind/common/bundled.hpp"
#include "ifind/dual/dual_ik.hpp"
#include "ifind/parallel/batch.hpp"
#include "ifind/surface/sweep.hpp"
#include "support.hpp"

using namespace ifind;
using namespace ifind::dual;

namespace {

const DualArmRig& rig() {
  static const DualArmRig r = load_rig("ifind-v3");
  return r;
}

const surface::SurfaceMesh& phantom() {
  static const auto mesh = surface::parse_off(bundled::lookup("meshes/phantom-abdomen.off"));
  return mesh;
}

surface::ContactPose contact_near(const Vec3& p, double indentation = 0.003) {
  const auto sp = surface::closest_point(phantom(), p);
  return {sp.point, sp.normal, indentation, 0.0};
}

Pose target_near(const Vec3& p) { return surface::probe_pose_at(phantom(), contact_near(p)); }

}  // namespace

TEST_CASE("rig structure") {
  CHECK(rig().dof() == 17);
  CHECK(rig_joints(rig()).size() == 17);
  CHECK(rig_joints(rig())[0].id == "J0");
  CHECK(rig_joints(rig())[1].id == "L.J1");
  CHECK(rig_joints(rig())[9].id == "R.J1");
  CHECK(rig().gantry.kind == kin::JointKind::Prismatic);
  CHECK(rig().arm_left.size() == 8);
  CHECK(rig().arm_right.size() == 8);
  CHECK(rig_home(rig()).size() == 17);
  CHECK_THROWS_AS(load_rig("ifind-v9"), Error);
}

TEST_CASE("malformed rig config") {
  auto j = nlohmann::json::parse(bundled::lookup("presets/ifind-v3-rig.json"));
  auto code_of = [](const nlohmann::json& cfg) {
    try {
      assemble_rig(cfg);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  auto bad = j;
  bad["capsules"][0]["radius"] = 0.0;
  CHECK(code_of(bad) == ErrorCode::InvalidConfig);
  bad = j;
  bad["capsules"][0]["frame"] = 42;
  CHECK(code_of(bad) == ErrorCode::InvalidConfig);
  bad = j;
  bad.erase("gantry");
  CHECK(code_of(bad) == ErrorCode::InvalidConfig);
}

TEST_CASE("gantry displacement translates both tips rigidly") {
  for (const auto& q : testing::random_configs(rig_joints(rig()), 50, 1)) {
    auto moved = q;
    moved[0] = std::clamp(q[0] + 0.07, rig().gantry.min, rig().gantry.max);
    const double delta = moved[0] - q[0];
    const auto a = evaluate_rig(rig(), q);
    const auto b = evaluate_rig(rig(), moved);
    for (Arm arm : {Arm::Left, Arm::Right}) {
      CHECK((b.arm(arm).tip().position - a.arm(arm).tip().position - delta * Vec3::UnitX()).norm() < 1e-12);
      CHECK(angular_distance(b.arm(arm).tip().orientation, a.arm(arm).tip().orientation) < 1e-12);
    }
    CHECK(min_separation(rig(), moved).min_distance == doctest::Approx(min_separation(rig(), q).min_distance).epsilon(1e-12));
  }
}

TEST_CASE("mirrored bases give mirrored home tips") {
  const auto s = evaluate_rig(rig(), rig_home(rig()));
  const Vec3 l = s.left.tip().position, r = s.right.tip().position;
  CHECK(l.x() == doctest::Approx(-r.x()).epsilon(1e-12));
  CHECK(l.y() == doctest::Approx(r.y()).epsilon(1e-12));
  CHECK(l.z() == doctest::Approx(r.z()).epsilon(1e-12));
  const Eigen::Matrix3d mirror = Eigen::Vector3d(-1, 1, 1).asDiagonal();
  const Eigen::Matrix3d rl = s.left.tip().orientation.toRotationMatrix();
  const Eigen::Matrix3d rr = s.right.tip().orientation.toRotationMatrix();
  // Reflected frames keep their axis directions up to handedness.
  CHECK((mirror * rl * mirror).cwiseAbs().isApprox(rr.cwiseAbs(), 1e-12));
}

TEST_CASE("segment-segment distance") {
  SUBCASE("crossing") {
    const auto c = closest_segment_segment(Vec3(-1, 0, 0), Vec3(1, 0, 0), Vec3(0, -1, 0.3), Vec3(0, 1, 0.3));
    CHECK(c.distance == doctest::Approx(0.3));
    CHECK((c.on_first - Vec3::Zero()).norm() < 1e-15);
  }
  SUBCASE("parallel overlapping") {
    const auto c = closest_segment_segment(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.2, 0), Vec3(2, 0.2, 0));
    CHECK(c.distance == doctest::Approx(0.2));
  }
  SUBCASE("degenerate points") {
    const auto c = closest_segment_segment(Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(3, 4, 0), Vec3(3, 4, 0));
    CHECK(c.distance == doctest::Approx(5.0));
  }
  SUBCASE("endpoint regions") {
    const auto c = closest_segment_segment(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1, 0), Vec3(3, 5, 0));
    CHECK(c.distance == doctest::Approx(std::sqrt(2.0)));
  }
}

TEST_CASE("capsule separation against the sampling oracle") {
  SUBCASE("symmetric spread home") {
    const auto q = rig_home(rig());
    const double oracle = testing::sampled_clearance(rig(), q);
    const auto r = min_separation(rig(), q);
    CHECK(r.min_distance <= oracle + 1e-12);
    CHECK(std::abs(r.min_distance - oracle) < 1e-3);
  }
  SUBCASE("random configurations") {
    const auto qs = testing::random_configs(rig_joints(rig()), 200, 2);
    const auto reports = parallel::separations(rig(), qs, parallel::Exec::Parallel);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double oracle = testing::sampled_clearance(rig(), qs[i]);
      CHECK(reports[i].min_distance <= oracle + 1e-12);
      CHECK(std::abs(reports[i].min_distance - oracle) < 1e-3);
      CHECK(reports[i].min_distance == *std::min_element(reports[i].pair_distances.begin(),
                                                          reports[i].pair_distances.end()));
      const auto n = rig().capsules.size();
      CHECK(reports[i].pair_distances[reports[i].left * n + reports[i].right] == reports[i].min_distance);
    }
  }
  SUBCASE("mirrored configuration has the same clearance") {
    for (const auto& q : testing::random_configs(rig_joints(rig()), 100, 3)) {
      const auto m = testing::mirrored(rig(), q);
      CHECK(min_separation(rig(), m).min_distance ==
            doctest::Approx(min_separation(rig(), q).min_distance).epsilon(1e-9));
    }
  }
  SUBCASE("limits") {
    auto q = rig_home(rig());
    q[0] = 1.0;
    CHECK_THROWS_AS(min_separation(rig(), q), Error);
  }
}

TEST_CASE("probes at the same point penetrate") {
  const Pose t = target_near(Vec3(0, 0, 0.12));
  DualIkOptions opts;
  opts.clearance_margin = 0.0;
  try {
    const auto r = solve_dual_ik(rig(), t, t, default_seed(rig()), opts);
    CHECK(min_separation(rig(), r.q).min_distance <= 0.0);
  } catch (const ClearanceInfeasible& e) {
    CHECK(e.best().position_residual < 1e-6);
    CHECK(min_separation(rig(), e.best().q).min_distance <= 0.0);
  }
}

TEST_CASE("dual IK") {
  SUBCASE("fixed point") {
    const auto seed = default_seed(rig());
    const auto s = evaluate_rig(rig(), seed);
    REQUIRE(min_separation(rig(), seed).min_distance >= 0.02);
    const auto r = solve_dual_ik(rig(), s.left.tip(), s.right.tip(), seed);
    CHECK(r.q == seed);
    CHECK(r.iterations == 0);
  }
  SUBCASE("targets 8 cm apart on the midline, margin 2 cm") {
    const Pose tl = target_near(Vec3(-0.04, 0, 0.12));
    const Pose tr = target_near(Vec3(0.04, 0, 0.12));
    const auto r = solve_dual_ik(rig(), tl, tr, default_seed(rig()));
    const auto s = evaluate_rig(rig(), r.q);
    CHECK((s.left.tip().position - tl.position).norm() < 1e-6);
    CHECK((s.right.tip().position - tr.position).norm() < 1e-6);
    CHECK(angular_distance(s.left.tip().orientation, tl.orientation) < 1e-6);
    CHECK(angular_distance(s.right.tip().orientation, tr.orientation) < 1e-6);
    CHECK(min_separation(rig(), r.q).min_distance >= 0.02);
    CHECK(testing::sampled_clearance(rig(), r.q) >= 0.02);
    CHECK_NOTHROW(check_rig_limits(rig(), r.q));
  }
  SUBCASE("targets 1 cm apart, margin 5 cm") {
    DualIkOptions opts;
    opts.clearance_margin = 0.05;
    try {
      solve_dual_ik(rig(), target_near(Vec3(-0.005, 0, 0.12)), target_near(Vec3(0.005, 0, 0.12)),
                    default_seed(rig()), opts);
      FAIL("expected ClearanceInfeasible");
    } catch (const ClearanceInfeasible& e) {
      CHECK(e.code() == ErrorCode::ClearanceInfeasible);
      CHECK(e.best().clearance < 0.05);
      CHECK(e.best().position_residual < 1e-6);
      CHECK_NOTHROW(check_rig_limits(rig(), e.best().q));
    }
  }
  SUBCASE("out-of-limit seed") {
    auto seed = default_seed(rig());
    seed[2] = 5.0;
    CHECK_THROWS_AS(solve_dual_ik(rig(), Pose{}, Pose{}, seed), Error);
  }
  SUBCASE("unreachable target") {
    const Pose far{Vec3(3.0, 0, 0), Quat::Identity()};
    try {
      solve_dual_ik(rig(), far, target_near(Vec3(0.04, 0, 0.12)), default_seed(rig()));
      FAIL("expected NotConverged");
    } catch (const DualNotConverged& e) {
      CHECK(e.code() == ErrorCode::NotConverged);
      CHECK(e.best().position_residual > 1.0);
      CHECK_NOTHROW(check_rig_limits(rig(), e.best().q));
    }
  }
}

TEST_CASE("dual sweep planning") {
  SUBCASE("single waypoints far apart") {
    surface::SweepPath l{{contact_near(Vec3(-0.08, 0, 0.1))}, 0.01};
    surface::SweepPath r{{contact_near(Vec3(0.08, 0, 0.1))}, 0.01};
    const auto traj = plan_dual_sweep(rig(), l, r, 0.02);
    CHECK(traj.size() == 1);
  }
  SUBCASE("parallel 10-waypoint paths 10 cm apart") {
    const auto l = surface::resample(
        phantom(), surface::generate_sweep(phantom(), Vec3(-0.05, -0.1, 0.08), Vec3(-0.05, 0.1, 0.08), 0.01, 0.003), 10);
    const auto r = surface::resample(
        phantom(), surface::generate_sweep(phantom(), Vec3(0.05, -0.1, 0.08), Vec3(0.05, 0.1, 0.08), 0.01, 0.003), 10);
    const auto traj = plan_dual_sweep(rig(), l, r, 0.02);
    REQUIRE(traj.size() == 10);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto rep = min_separation(rig(), traj[k].q);
      CHECK(rep.min_distance >= 0.02);
      CHECK(rep.min_distance == doctest::Approx(traj[k].clearance).epsilon(1e-12));
      const auto s = evaluate_rig(rig(), traj[k].q);
      CHECK((s.left.tip().position - surface::probe_pose(l.waypoints[k]).position).norm() < 1e-6);
      CHECK((s.right.tip().position - surface::probe_pose(r.waypoints[k]).position).norm() < 1e-6);
      if (k > 0) CHECK((traj[k].q - traj[k - 1].q).cwiseAbs().maxCoeff() <= 0.5);
    }
    const auto records = trajectory_records(traj);
    std::istringstream in(records);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.at("tick") == n);
      CHECK(j.at("q").size() == 17);
      CHECK(j.at("clearance").get<double>() == traj[n].clearance);
      ++n;
    }
    CHECK(n == 10);
  }
  SUBCASE("paths forced to coincide at waypoint 5") {
    surface::SweepPath l, r;
    for (int k = 0; k < 10; ++k) {
      const double y = -0.09 + 0.02 * k;
      const double x = k == 5 ? 0.0 : 0.07;
      l.waypoints.push_back(contact_near(Vec3(-x, y, 0.1)));
      r.waypoints.push_back(contact_near(Vec3(x, y, 0.1)));
    }
    l.spacing = r.spacing = 0.08;
    try {
      plan_dual_sweep(rig(), l, r, 0.02);
      FAIL("expected PlanFailed");
    } catch (const PlanFailed& e) {
      CHECK(e.code() == ErrorCode::PlanFailed);
      CHECK(e.index() == 5);
      CHECK(e.partial().size() == 5);
      for (const auto& p : e.partial()) CHECK(p.clearance >= 0.02);
    }
  }
  SUBCASE("argument checks") {
    surface::SweepPath one{{contact_near(Vec3(-0.08, 0, 0.1))}, 0.01};
    surface::SweepPath two{{contact_near(Vec3(0.08, 0, 0.1)), contact_near(Vec3(0.08, 0.01, 0.1))}, 0.01};
    CHECK_THROWS_AS(plan_dual_sweep(rig(), one, two, 0.02), Error);
    CHECK_THROWS_AS(plan_dual_sweep(rig(), one, one, 0.0), Error);
  }
}

TEST_CASE("serial and parallel separations agree") {
  const auto qs = testing::random_configs(rig_joints(rig()), 300, 9);
  const auto a = parallel::separations(rig(), qs, parallel::Exec::Serial);
  const auto b = parallel::separations(rig(), qs, parallel::Exec::Parallel);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(a[i].min_distance == b[i].min_distance);
    CHECK(a[i].pair_distances == b[i].pair_distances);
  }
}
