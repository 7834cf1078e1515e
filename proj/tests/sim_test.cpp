#include <doctest.h>

#include <map>

#include "ifind/dual/dual_ik.hpp"
#include "ifind/kinematics/kinematics.hpp"
#include "ifind/safety/supervisor.hpp"
#include "ifind/sim/simulation.hpp"

using namespace ifind;
using namespace ifind::sim;

namespace {

Command cmd(CommandKind kind, nlohmann::json params = nlohmann::json::object(), nlohmann::json id = 1) {
  return {std::move(id), kind, std::move(params)};
}

SimConfig v2_config() {
  SimConfig c;
  c.preset = "ifind-v2";
  c.seed = 5;
  c.sweeps["midline"].left = {Vec3(-0.08, 0, 0.09), Vec3(0.08, 0, 0.09), 0.01, 0.0};
  return c;
}

std::vector<nlohmann::json> telemetry_of(const session::SessionLog& log) {
  std::vector<nlohmann::json> out;
  for (const auto& e : log.events())
    if (e.kind == session::EventKind::Telemetry) out.push_back(e.payload);
  return out;
}

kin::JointVector q_of(const nlohmann::json& frame) {
  const auto v = frame.at("q").get<std::vector<double>>();
  return Eigen::Map<const kin::JointVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Every joint of every consecutive telemetry pair moves at most cap * dt.
void check_rate_caps(const std::vector<kin::JointSpec>& joints, const std::vector<nlohmann::json>& frames, double dt) {
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const auto a = q_of(frames[t - 1]), b = q_of(frames[t]);
    for (std::size_t j = 0; j < joints.size(); ++j)
      CHECK(std::abs(b[static_cast<Eigen::Index>(j)] - a[static_cast<Eigen::Index>(j)]) <=
            joints[j].max_velocity * dt * (1 + 1e-12));
  }
}

}  // namespace

TEST_CASE("idle ticks change nothing but the tick") {
  Simulation sim(v2_config());
  sim.step();
  const auto q = sim.state().q;
  for (int i = 0; i < 20; ++i) {
    const auto out = sim.step();
    CHECK(out.replies.empty());
    CHECK(sim.state().q == q);
    CHECK(sim.state().mode == Mode::Idle);
    CHECK(out.telemetry.at("tick") == sim.state().tick);
  }
  CHECK(sim.state().tick == 21);
}

TEST_CASE("jog is rate limited") {
  Simulation sim(v2_config());
  const auto& j4 = sim.joints()[3];
  REQUIRE(j4.id == "J4");
  REQUIRE(j4.max_velocity == 0.5);
  REQUIRE(sim.config().dt == 0.02);
  const double start = sim.state().q[3];
  sim.submit(cmd(CommandKind::Jog, {{"joint", "J4"}, {"delta", 0.1}}, "jog-1"));
  auto out = sim.step();
  REQUIRE(out.replies.size() == 1);
  CHECK(out.replies[0].ok);
  CHECK(out.replies[0].request_id == "jog-1");
  CHECK(out.replies[0].result.at("target").get<double>() == doctest::Approx(start + 0.1));
  CHECK(sim.state().q[3] == doctest::Approx(start + 0.01).epsilon(1e-12));
  for (int k = 2; k <= 10; ++k) {
    sim.step();
    CHECK(sim.state().q[3] == doctest::Approx(start + 0.01 * k).epsilon(1e-12));
  }
  sim.step();
  CHECK(sim.state().q[3] == doctest::Approx(start + 0.1).epsilon(1e-12));
  CHECK(sim.state().mode == Mode::Idle);
}

TEST_CASE("command errors are replies, not exceptions") {
  Simulation sim(v2_config());
  sim.submit(cmd(CommandKind::Jog, {{"joint", "J99"}, {"delta", 0.1}}, 7));
  auto out = sim.step();
  REQUIRE(out.replies.size() == 1);
  CHECK_FALSE(out.replies[0].ok);
  CHECK(out.replies[0].code == "InvalidArgument");
  CHECK(out.replies[0].to_json(out.telemetry.at("tick")).at("type") == "error");
  sim.submit(cmd(CommandKind::SetIndentation, {{"indentation", 0.2}}));
  CHECK(sim.step().replies[0].code == "InvalidArgument");
  sim.submit(cmd(CommandKind::FollowSweep, {{"sweep", "nope"}}));
  CHECK(sim.step().replies[0].code == "InvalidArgument");
  sim.submit(cmd(CommandKind::Grade, {{"view", "spleen"}}));
  CHECK(sim.step().replies[0].code == "InvalidArgument");
  sim.submit(cmd(CommandKind::Questionnaire, {{"volunteer", "a"}, {"version", "v2"}, {"answers", {1, 2, 3, 4, 5, 0, 0}}}));
  CHECK(sim.step().replies[0].code == "InvalidAnswer");
}

TEST_CASE("estop and fault handling") {
  Simulation sim(v2_config());
  sim.step();
  sim.submit(cmd(CommandKind::EStop, {}, "stop"));
  auto out = sim.step();
  CHECK(sim.state().safety.state == safety::SafetyState::EStop);
  CHECK(sim.state().mode == Mode::Fault);
  CHECK(out.telemetry.at("safety") == "ESTOP");
  CHECK(out.replies.at(0).ok);

  sim.submit(cmd(CommandKind::MoveTo, {{"view", "pancreas TS"}}, "m"));
  out = sim.step();
  CHECK(out.replies.at(0).code == "RejectedInFault");
  for (auto kind : {CommandKind::Jog, CommandKind::FollowSweep, CommandKind::Home}) {
    sim.submit(cmd(kind, {{"joint", "J1"}, {"delta", 0.1}, {"sweep", "midline"}}));
    CHECK(sim.step().replies.at(0).code == "RejectedInFault");
  }
  sim.submit(cmd(CommandKind::Describe));
  CHECK(sim.step().replies.at(0).ok);
  sim.submit(cmd(CommandKind::Reset));
  sim.step();
  CHECK(sim.state().safety.state == safety::SafetyState::Nominal);
  CHECK(sim.state().mode == Mode::Idle);
  sim.submit(cmd(CommandKind::Jog, {{"joint", "J1"}, {"delta", 0.05}}));
  CHECK(sim.step().replies.at(0).ok);
}

TEST_CASE("every command is acknowledged within queue length + 1 ticks") {
  Simulation sim(v2_config());
  for (int i = 0; i < 12; ++i) sim.submit(cmd(CommandKind::Describe, {}, i));
  std::map<int, std::uint64_t> acked;
  for (int t = 0; t < 13; ++t)
    for (const auto& r : sim.step().replies) acked[r.request_id.get<int>()] = sim.state().tick;
  REQUIRE(acked.size() == 12);
  for (const auto& [id, tick] : acked) CHECK(tick == static_cast<std::uint64_t>(id + 1));
}

TEST_CASE("a clutch exceedance while following faults within one tick") {
  auto cfg = v2_config();
  cfg.safety.clutch_thresholds["J3"] = 1.0;
  Simulation sim(cfg);
  const auto chain = kin::load_chain("ifind-v2");
  const Transform base = default_single_base();
  sim.submit(cmd(CommandKind::FollowSweep, {{"sweep", "midline"}}));
  std::optional<std::uint64_t> exceeded;
  std::optional<std::uint64_t> faulted;
  kin::JointVector previous = sim.state().q;
  for (int t = 0; t < 600 && !faulted; ++t) {
    const auto out = sim.step();
    const auto& s = sim.state();
    // Oracle: contact force at the tip, motion since the last tick, mapped to joint loads.
    const Pose tip_now = Pose::from_transform(base * kin::forward_kinematics(chain, s.q).to_transform());
    const Pose tip_then = Pose::from_transform(base * kin::forward_kinematics(chain, previous).to_transform());
    const auto f = safety::contact_force(sim.mesh(), tip_now, cfg.stiffness, cfg.friction,
                                         tip_now.position - tip_then.position);
    Eigen::Matrix<double, 6, 1> w = Eigen::Matrix<double, 6, 1>::Zero();
    w.head<3>() = base.linear().transpose() * -f.world_force();
    const auto loads = safety::joint_torques(chain, s.q, w);
    CHECK(loads[2] == doctest::Approx(s.loads[2]).epsilon(1e-9));
    previous = s.q;
    if (!exceeded && std::abs(s.loads[2]) > 1.0) {
      exceeded = s.tick;
      CHECK(out.telemetry.at("clutch_open") == nlohmann::json::array({"J3"}));
    }
    if (s.mode == Mode::Fault) faulted = s.tick;
  }
  REQUIRE(exceeded);
  REQUIRE(faulted);
  CHECK(*faulted - *exceeded <= 1);
  CHECK(sim.state().safety.state == safety::SafetyState::ClutchTripped);
  sim.step();
  CHECK(sim.state().safety.state == safety::SafetyState::Retracted);
}

TEST_CASE("fault wins over a motion command on the same tick") {
  auto cfg = v2_config();
  cfg.safety.clutch_thresholds["J3"] = 1.0;
  Simulation sim(cfg);
  sim.submit(cmd(CommandKind::FollowSweep, {{"sweep", "midline"}}));
  for (int t = 0; t < 600 && !sim.state().clutch.any_disengaged(); ++t) sim.step();
  REQUIRE(sim.state().clutch.any_disengaged());
  REQUIRE(sim.state().mode != Mode::Fault);
  const auto q = sim.state().q;
  sim.submit(cmd(CommandKind::Jog, {{"joint", "J1"}, {"delta", 0.2}}, "late"));
  const auto out = sim.step();
  CHECK(out.replies.at(0).code == "RejectedInFault");
  CHECK(sim.state().mode == Mode::Fault);
  CHECK(sim.state().q == q);
}

TEST_CASE("empty scenario, 100 ticks") {
  Scenario s;
  s.config = v2_config();
  s.ticks = 100;
  const auto log = run_scenario(s);
  const auto frames = telemetry_of(log);
  CHECK(log.size() == 100);
  REQUIRE(frames.size() == 100);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].at("safety") == "NOMINAL");
    CHECK(frames[i].at("tick") == i + 1);
  }
}

TEST_CASE("bundled v2 surface-follow scenario") {
  const auto scenario = load_scenario("v2-surface-follow");
  const auto log = run_scenario(scenario);
  std::size_t sweep_grades = 0;
  std::optional<std::size_t> announced;
  for (const auto& e : log.events()) {
    if (e.kind == session::EventKind::Safety) CHECK(e.payload.at("to") != "CLUTCH_TRIPPED");
    if (e.kind == session::EventKind::Grade && e.payload.at("view").get<std::string>().rfind("midline#", 0) == 0)
      ++sweep_grades;
    if (e.kind == session::EventKind::Command && e.payload.at("kind") == "follow_sweep") {
      CHECK(e.payload.at("status") == "ack");
    }
  }
  const auto frames = telemetry_of(log);
  for (const auto& f : frames) {
    CHECK(f.at("mode") != "FAULT");
    CHECK(f.at("clutch_open").empty());
  }
  // Every contact waypoint of the sweep was graded and the sweep finished.
  Simulation sim(scenario.config);
  sim.submit(scenario.commands.front().command);
  announced = sim.step().replies.at(0).result.at("waypoints").get<std::size_t>();
  CHECK(sweep_grades == *announced);
  CHECK(sweep_grades >= 17);
  check_rate_caps(sim.joints(), frames, scenario.config.dt);
}

TEST_CASE("bundled v3 dual-sweep scenario") {
  const auto scenario = load_scenario("v3-dual-sweep");
  const auto log = run_scenario(scenario);
  const auto rig = dual::load_rig("ifind-v3");
  std::size_t grades = 0;
  for (const auto& e : log.events()) {
    if (e.kind == session::EventKind::Grade) {
      ++grades;
      const auto frame_q = [&] {
        for (const auto& f : log.events())
          if (f.kind == session::EventKind::Telemetry && f.tick == e.tick) return q_of(f.payload);
        return kin::JointVector();
      }();
      CHECK(dual::min_separation(rig, frame_q).min_distance >= 0.02);
    }
    if (e.kind == session::EventKind::Command) CHECK(e.payload.at("status") == "ack");
  }
  CHECK(grades == 20);
  const auto frames = telemetry_of(log);
  for (const auto& f : frames) {
    CHECK(f.at("safety") != "CLUTCH_TRIPPED");
    CHECK(f.at("mode") != "FAULT");
    CHECK(f.at("clearance_m").get<double>() >= 0.02);
  }
  check_rate_caps(dual::rig_joints(rig), frames, scenario.config.dt);
}

TEST_CASE("scenario runs are deterministic") {
  for (const auto& name : bundled_scenarios()) {
    const auto s = load_scenario(name);
    CHECK(session::to_ndjson(run_scenario(s)) == session::to_ndjson(run_scenario(s)));
  }
  auto s = load_scenario("v2-surface-follow");
  const auto a = session::to_ndjson(run_scenario(s));
  s.config.seed += 1;
  CHECK(session::to_ndjson(run_scenario(s)) != a);
}

TEST_CASE("commands on the wire") {
  const auto c = parse_command_line(R"({"request_id": "r1", "kind": "jog", "params": {"joint": "J2", "delta": 0.1}})");
  CHECK(c.kind == CommandKind::Jog);
  CHECK(c.request_id == "r1");
  CHECK(c.params.at("joint") == "J2");
  CHECK(parse_command(to_json(c)).params == c.params);
  CHECK(parse_command_line(R"({"kind": "estop"})").kind == CommandKind::EStop);
  auto code_of = [](std::string_view line) {
    try {
      parse_command_line(line);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("{") == ErrorCode::ParseError);
  CHECK(code_of(R"({"kind": "fly"})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"kind": "jog", "params": 3})") == ErrorCode::ParseError);
  CHECK(code_of("[1,2]") == ErrorCode::ParseError);
  for (auto k : {CommandKind::Jog, CommandKind::MoveTo, CommandKind::FollowSweep, CommandKind::Home})
    CHECK(is_motion(k));
  for (auto k : {CommandKind::EStop, CommandKind::Reset, CommandKind::Describe, CommandKind::Questionnaire})
    CHECK_FALSE(is_motion(k));
}

TEST_CASE("configs") {
  SimConfig bad;
  bad.preset = "ifind-v0";
  CHECK_THROWS_AS(Simulation{bad}, Error);
  try {
    Simulation{bad};
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownPreset);
  }
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"dt": -1})")), Error);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"sweeps": {"x": {"start": [0, 0]}}})")), Error);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
  const auto cfg = parse_config(nlohmann::json::parse(
      R"({"preset": "ifind-v1", "seed": 9, "contact": {"stiffness": 1500, "friction": 0.2},
          "safety": {"soft_limit": 10, "clutch_thresholds": {"J2": 12}}})"));
  CHECK(cfg.preset == "ifind-v1");
  CHECK(cfg.seed == 9);
  CHECK(cfg.stiffness == 1500);
  CHECK(cfg.friction == 0.2);
  CHECK(cfg.safety.soft_limit == 10);
  CHECK(cfg.safety.clutch_thresholds.at("J2") == 12);
  Simulation v1(cfg);
  CHECK(v1.joints().size() == 7);
  CHECK_FALSE(v1.dual());
  Simulation v3(load_config("v3-dual-sweep"));
  CHECK(v3.dual());
  CHECK(v3.joints().size() == 17);
  const auto d = v3.describe();
  CHECK(d.at("joints").size() == 17);
  CHECK(d.at("views").size() == 7);
}
