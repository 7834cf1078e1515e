#include "ifind/sim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "ifind/common/error.hpp"
#include "ifind/common/json_util.hpp"
#include "ifind/dual/dual_ik.hpp"
#include "ifind/kinematics/ik.hpp"
#include "ifind/session/stats.hpp"
#include "ifind/surface/sweep.hpp"

namespace ifind::sim {

namespace {

constexpr double kHover = 0.03;  // m above the surface for approach and lift-off
constexpr double kArrivalSlack = 1e-9;

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

surface::ContactPose hover(surface::ContactPose c) {
  c.indentation = -kHover;
  return c;
}

std::string bare_id(const std::string& id) {
  const auto dot = id.find('.');
  return dot == std::string::npos ? id : id.substr(dot + 1);
}

double param_double(const nlohmann::json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number())
    throw Error(ErrorCode::InvalidArgument, std::string("missing numeric parameter '") + key + "'");
  return p.at(key).get<double>();
}

std::string param_string(const nlohmann::json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("missing string parameter '") + key + "'");
  return p.at(key).get<std::string>();
}

surface::ContactPose contact_from_json(const nlohmann::json& j, double indentation) {
  surface::ContactPose c;
  c.surface_point = json_util::vec3(j.at("surface_point"));
  c.normal = json_util::vec3(j.at("normal")).normalized();
  c.indentation = j.value("indentation", indentation);
  c.axial_roll = j.value("axial_roll", 0.0);
  return c;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Idle: return "IDLE";
    case Mode::Jogging: return "JOGGING";
    case Mode::MoveTo: return "MOVE_TO";
    case Mode::Following: return "FOLLOWING";
    case Mode::Fault: return "FAULT";
  }
  return "?";
}

nlohmann::json Reply::to_json(std::uint64_t tick) const {
  nlohmann::json j = {{"type", ok ? "ack" : "error"}, {"request_id", request_id}, {"tick", tick}};
  if (ok) {
    j["result"] = result;
  } else {
    j["code"] = code;
    j["message"] = message;
  }
  return j;
}

Simulation::Simulation(SimConfig config)
    : config_(std::move(config)), noise_(config_.seed) {
  mesh_ = std::make_shared<const surface::SurfaceMesh>(load_mesh_source(config_.mesh, config_.base_dir));
  if (is_dual(config_)) {
    std::filesystem::path p{config_.preset};
    if (config_.preset != "ifind-v3" && p.is_relative() && !config_.base_dir.empty())
      p = config_.base_dir / p;
    rig_ = dual::load_rig(config_.preset == "ifind-v3" ? config_.preset : p.string());
    joints_ = dual::rig_joints(*rig_);
  } else {
    std::string name = config_.preset;
    if (name.rfind("ifind-", 0) != 0 && !config_.base_dir.empty() &&
        std::filesystem::path(name).is_relative())
      name = (config_.base_dir / name).string();
    single_ = kin::load_chain(name);
    single_base_ = config_.base.value_or(default_single_base());
    joints_ = single_->joints;
  }

  for (auto& j : joints_) {
    std::optional<double> t = j.clutch_threshold;
    if (auto it = config_.safety.clutch_thresholds.find(j.id); it != config_.safety.clutch_thresholds.end())
      t = it->second;
    else if (auto it2 = config_.safety.clutch_thresholds.find(bare_id(j.id));
             it2 != config_.safety.clutch_thresholds.end())
      t = it2->second;
    if (t && !(*t > 0.0)) throw Error(ErrorCode::InvalidConfig, "clutch threshold for " + j.id + " must be positive");
    thresholds_.push_back(t);
  }
  limits_.soft_limit = config_.safety.soft_limit;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& back = config_.safety.back_arm_joints;
    if (std::find(back.begin(), back.end(), bare_id(joints_[i].id)) != back.end() ||
        std::find(back.begin(), back.end(), joints_[i].id) != back.end())
      limits_.back_arm_joints.push_back(i);
  }
  if (config_.safety.safe_pose && config_.safety.safe_pose->size() != joints_.size())
    throw Error(ErrorCode::InvalidConfig, "safe_pose must list " + std::to_string(joints_.size()) + " values");

  views_ = session::standard_views();
  state_.q = home();
  state_.target = state_.q;
  state_.clutch = safety::ClutchState::all_engaged(joints_.size());
  state_.indentation = config_.indentation;
  sense_all(state_.q);
}

const kin::KinematicChain& Simulation::chain(std::size_t arm) const {
  if (rig_) return rig_->chain(arm == 0 ? dual::Arm::Left : dual::Arm::Right);
  return *single_;
}

std::size_t Simulation::arm_offset(std::size_t arm) const {
  if (rig_) return rig_->offset(arm == 0 ? dual::Arm::Left : dual::Arm::Right);
  return 0;
}

kin::JointVector Simulation::arm_q(std::size_t arm, const kin::JointVector& q) const {
  return q.segment(static_cast<Eigen::Index>(arm_offset(arm)), static_cast<Eigen::Index>(chain(arm).size()));
}

std::string Simulation::arm_name(std::size_t arm) const {
  if (!rig_) return "main";
  return arm == 0 ? "left" : "right";
}

Transform Simulation::arm_base(std::size_t arm, const kin::JointVector& q) const {
  if (rig_) return dual::arm_base(*rig_, q[0], arm == 0 ? dual::Arm::Left : dual::Arm::Right);
  return single_base_;
}

Pose Simulation::tip(std::size_t arm, const kin::JointVector& q) const {
  const auto st = kin::evaluate(chain(arm), arm_q(arm, q));
  return Pose::from_transform(arm_base(arm, q) * st.frames.back());
}

kin::JointVector Simulation::home() const {
  return rig_ ? dual::default_seed(*rig_) : kin::home(*single_);
}

kin::JointVector Simulation::safe_pose() const {
  if (!config_.safety.safe_pose) return home();
  const auto& v = *config_.safety.safe_pose;
  kin::JointVector q = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return q;
}

void Simulation::submit(Command c) { queue_.push_back(std::move(c)); }

kin::JointVector Simulation::solve_pose(std::size_t arm, const Pose& world_target,
                                        const kin::JointVector& seed) const {
  if (rig_) {
    const Pose other = tip(1 - arm, seed);
    const Pose& left = arm == 0 ? world_target : other;
    const Pose& right = arm == 0 ? other : world_target;
    dual::DualIkOptions o;
    o.clearance_margin = config_.clearance_margin;
    return dual::solve_dual_ik(*rig_, left, right, seed, o).q;
  }
  const Pose local = Pose::from_transform(single_base_.inverse() * world_target.to_transform());
  return kin::solve_ik(*single_, local, seed).q;
}

kin::JointVector Simulation::integrate(const kin::JointVector& q, const kin::JointVector& target) const {
  // Synchronised motion: every free joint covers its remaining distance in
  // the same number of ticks, so no joint exceeds its cap.
  double ratio = 0.0;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (!state_.clutch.engaged[i]) continue;
    const double cap = joints_[i].max_velocity * config_.dt;
    ratio = std::max(ratio, std::abs(target[k] - q[k]) / cap);
  }
  kin::JointVector next = q;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (!state_.clutch.engaged[i]) continue;
    next[k] = ratio <= 1.0 + kArrivalSlack ? target[k] : q[k] + (target[k] - q[k]) / ratio;
  }
  return next;
}

void Simulation::sense_all(const kin::JointVector& previous_q) {
  const auto n = arm_count();
  state_.arms.resize(n);
  state_.loads = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(joints_.size()));
  for (std::size_t a = 0; a < n; ++a) {
    auto& t = state_.arms[a];
    t.tip = tip(a, state_.q);
    const Vec3 motion = t.tip.position - tip(a, previous_q).position;
    t.force = safety::contact_force(*mesh_, t.tip, config_.stiffness, config_.friction, motion);
    t.reading = safety::sense(t.force, config_.sensor, noise_, state_.tick);
    t.proximity = safety::proximity(*mesh_, t.tip);
    Eigen::Matrix<double, 6, 1> wrench = Eigen::Matrix<double, 6, 1>::Zero();
    wrench.head<3>() = arm_base(a, state_.q).linear().transpose() * -t.force.world_force();
    state_.loads.segment(static_cast<Eigen::Index>(arm_offset(a)), static_cast<Eigen::Index>(chain(a).size())) =
        safety::joint_torques(chain(a), arm_q(a, state_.q), wrench);
    if (rig_) state_.loads[0] += (rig_->gantry.origin.linear() * rig_->gantry.axis).dot(-t.force.world_force());
  }
  if (rig_) state_.separation = dual::separation(*rig_, dual::evaluate_rig(*rig_, state_.q));
}

session::GradeRecord Simulation::grade_arm(const session::StandardView& view, std::size_t arm) const {
  const auto& t = state_.arms.at(arm);
  return session::grade_acquisition(view, t.tip, t.force, session::Operator::Robot, state_.tick);
}

Reply Simulation::handle_jog(const Command& c) {
  const auto id = param_string(c.params, "joint");
  const double delta = param_double(c.params, "delta");
  std::optional<std::size_t> idx;
  for (std::size_t i = 0; i < joints_.size(); ++i)
    if (joints_[i].id == id) idx = i;
  if (!idx) throw Error(ErrorCode::InvalidArgument, "unknown joint '" + id + "'");
  const auto k = static_cast<Eigen::Index>(*idx);
  const auto& spec = joints_[*idx];
  state_.target = state_.q;
  state_.target[k] = std::clamp(state_.q[k] + delta, spec.min, spec.max);
  state_.sweep.reset();
  state_.mode = Mode::Jogging;
  Reply r;
  r.result = {{"joint", id}, {"target", state_.target[k]}};
  return r;
}

Reply Simulation::handle_move_to(const Command& c) {
  const auto& p = c.params;
  std::size_t arm = 0;
  if (p.contains("arm")) {
    const auto name = param_string(p, "arm");
    if (name == "right" && rig_) arm = 1;
    else if (name != arm_name(0)) throw Error(ErrorCode::InvalidArgument, "unknown arm '" + name + "'");
  }
  std::optional<surface::ContactPose> contact;
  std::optional<Pose> pose;
  std::string label = "move_to";
  try {
    if (p.contains("view")) {
      const auto& v = session::find_view(views_, param_string(p, "view"));
      contact = v.target;
      contact->indentation = state_.indentation;
      label = v.name;
    } else if (p.contains("contact")) {
      contact = contact_from_json(p.at("contact"), state_.indentation);
    } else if (p.contains("pose")) {
      pose = json_util::pose(p.at("pose"));
    } else {
      throw Error(ErrorCode::InvalidArgument, "move_to needs 'view', 'contact' or 'pose'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed move_to target: ") + e.what());
  }

  ActiveSweep route;
  route.id = label;
  auto push = [&](const kin::JointVector& q) {
    route.targets.push_back(q);
    route.contacts.emplace_back(arm_count());
  };
  if (contact) {
    // Approach along the normal so the probe never ploughs through the surface.
    const auto q_hover = solve_pose(arm, surface::probe_pose(hover(*contact)), state_.q);
    push(q_hover);
    push(solve_pose(arm, surface::probe_pose(*contact), q_hover));
  } else {
    push(solve_pose(arm, *pose, state_.q));
  }
  state_.target = route.targets.front();
  state_.sweep = std::move(route);
  state_.mode = Mode::MoveTo;
  Reply r;
  r.result = {{"target_q", vec_json(state_.sweep->targets.back())}, {"arm", arm_name(arm)}};
  return r;
}

Reply Simulation::handle_follow(const Command& c) {
  const auto id = param_string(c.params, "sweep");
  const auto it = config_.sweeps.find(id);
  if (it == config_.sweeps.end()) throw Error(ErrorCode::InvalidArgument, "unknown sweep '" + id + "'");
  const auto& spec = it->second;
  auto make_path = [&](const SweepLine& l, std::size_t count) {
    auto path = surface::generate_sweep(*mesh_, l.start, l.end, l.spacing, state_.indentation, l.axial_roll);
    return count > 0 ? surface::resample(*mesh_, path, count) : path;
  };

  ActiveSweep route;
  route.id = id;
  if (rig_) {
    if (!spec.right) throw Error(ErrorCode::InvalidArgument, "sweep '" + id + "' is single-arm; the rig needs a dual sweep");
    const auto left = make_path(spec.left, spec.waypoints);
    const auto right = make_path(*spec.right, spec.waypoints);
    dual::DualIkOptions o;
    o.clearance_margin = config_.clearance_margin;
    const auto approach = dual::solve_dual_ik(*rig_, surface::probe_pose(hover(left.waypoints.front())),
                                              surface::probe_pose(hover(right.waypoints.front())), state_.q, o);
    const auto plan = dual::plan_dual_sweep(*rig_, left, right, config_.clearance_margin, approach.q);
    const auto lift = dual::solve_dual_ik(*rig_, surface::probe_pose(hover(left.waypoints.back())),
                                          surface::probe_pose(hover(right.waypoints.back())), plan.back().q, o);
    route.targets.push_back(approach.q);
    route.contacts.emplace_back(2);
    for (std::size_t k = 0; k < plan.size(); ++k) {
      route.targets.push_back(plan[k].q);
      route.contacts.push_back({left.waypoints[k], right.waypoints[k]});
    }
    route.targets.push_back(lift.q);
    route.contacts.emplace_back(2);
  } else {
    if (spec.right) throw Error(ErrorCode::InvalidArgument, "sweep '" + id + "' is a dual sweep; this preset has one arm");
    const auto path = make_path(spec.left, spec.waypoints);
    auto solve = [&](const surface::ContactPose& cp, const kin::JointVector& seed) {
      const Pose local = Pose::from_transform(single_base_.inverse() * surface::probe_pose(cp).to_transform());
      return kin::solve_ik(*single_, local, seed).q;
    };
    kin::JointVector q = solve(hover(path.waypoints.front()), state_.q);
    route.targets.push_back(q);
    route.contacts.emplace_back(1);
    for (std::size_t k = 0; k < path.waypoints.size(); ++k) {
      try {
        q = solve(path.waypoints[k], q);
      } catch (const kin::NotConverged& e) {
        throw Error(ErrorCode::NotConverged, "sweep waypoint " + std::to_string(k) + ": " + e.what());
      }
      route.targets.push_back(q);
      route.contacts.push_back({path.waypoints[k]});
    }
    route.targets.push_back(solve(hover(path.waypoints.back()), q));
    route.contacts.emplace_back(1);
  }
  const std::size_t graded_points = route.targets.size() - 2;
  state_.target = route.targets.front();
  state_.sweep = std::move(route);
  state_.mode = Mode::Following;
  Reply r;
  r.result = {{"sweep", id}, {"waypoints", graded_points}};
  return r;
}

Reply Simulation::apply(const Command& c, StepOutput& out) {
  switch (c.kind) {
    case CommandKind::Jog: return handle_jog(c);
    case CommandKind::MoveTo: return handle_move_to(c);
    case CommandKind::FollowSweep: return handle_follow(c);
    case CommandKind::Home: {
      state_.sweep.reset();
      state_.target = home();
      state_.mode = Mode::MoveTo;
      Reply r;
      r.result = {{"target_q", vec_json(state_.target)}};
      return r;
    }
    case CommandKind::SetIndentation: {
      const double d = param_double(c.params, "indentation");
      if (d < 0.0 || d > 0.05) throw Error(ErrorCode::InvalidArgument, "indentation must lie in [0, 0.05] m");
      state_.indentation = d;
      Reply r;
      r.result = {{"indentation", d}};
      return r;
    }
    case CommandKind::Grade: {
      const auto& view = session::find_view(views_, param_string(c.params, "view"));
      std::size_t arm = 0;
      if (c.params.contains("arm") && c.params.at("arm") == "right" && rig_) arm = 1;
      const auto rec = grade_arm(view, arm);
      out.events.push_back({state_.tick, session::EventKind::Grade, session::to_json(rec)});
      Reply r;
      r.result = session::to_json(rec);
      return r;
    }
    case CommandKind::Questionnaire: {
      auto resp = session::questionnaire_from_json(c.params);
      const auto j = session::to_json(resp);
      out.events.push_back({state_.tick, session::EventKind::Questionnaire, j});
      Reply r;
      r.result = j;
      return r;
    }
    case CommandKind::Describe: {
      Reply r;
      r.result = describe();
      return r;
    }
    case CommandKind::EStop:
    case CommandKind::Reset:
      return {};
  }
  return {};
}

StepOutput Simulation::step() {
  StepOutput out;
  ++state_.tick;

  std::optional<Command> cmd;
  if (!queue_.empty()) {
    cmd = std::move(queue_.front());
    queue_.pop_front();
  }
  safety::OperatorInput input = safety::OperatorInput::None;
  if (cmd && cmd->kind == CommandKind::EStop) input = safety::OperatorInput::EStop;
  if (cmd && cmd->kind == CommandKind::Reset) input = safety::OperatorInput::Reset;

  // Safety first: the supervisor sees the readings and clutch state from the
  // end of the previous tick before any command can move the arm.
  const auto before = state_.safety;
  std::vector<safety::SensorReading> readings;
  for (const auto& a : state_.arms) readings.push_back(a.reading);
  state_.safety = safety::supervisor_step(state_.safety, readings, state_.clutch, limits_, input);
  if (input == safety::OperatorInput::Reset) {
    state_.clutch = safety::ClutchState::all_engaged(joints_.size());
    state_.target = state_.q;
    state_.sweep.reset();
    state_.mode = Mode::Idle;
  }
  if (state_.safety.is_fault()) {
    if (state_.mode != Mode::Fault) state_.target = state_.q;
    state_.mode = Mode::Fault;
    state_.sweep.reset();
  }
  if (state_.safety.state != before.state || state_.safety.cause != before.cause)
    out.events.push_back({state_.tick, session::EventKind::Safety,
                          {{"from", std::string(safety::to_string(before.state))},
                           {"to", std::string(safety::to_string(state_.safety.state))},
                           {"cause", state_.safety.cause}}});

  if (cmd) {
    Reply reply;
    try {
      if (state_.mode == Mode::Fault && is_motion(cmd->kind))
        throw Error(ErrorCode::RejectedInFault,
                    std::string(to_string(cmd->kind)) + " rejected while in " +
                        std::string(safety::to_string(state_.safety.state)));
      reply = apply(*cmd, out);
    } catch (const Error& e) {
      reply.ok = false;
      reply.code = std::string(ifind::to_string(e.code()));
      reply.message = e.what();
    }
    reply.request_id = cmd->request_id;
    auto payload = to_json(*cmd);
    payload["status"] = reply.ok ? "ack" : "error";
    if (!reply.ok) payload["code"] = reply.code;
    // Command events precede the grade/questionnaire events they caused.
    out.events.insert(out.events.begin(), {state_.tick, session::EventKind::Command, payload});
    out.replies.push_back(std::move(reply));
  }

  const kin::JointVector previous = state_.q;
  if (state_.safety.state == safety::SafetyState::Retracted) {
    state_.target = safe_pose();
    state_.q = integrate(state_.q, state_.target);
  } else if (state_.mode != Mode::Fault && state_.mode != Mode::Idle) {
    kin::JointVector next = integrate(state_.q, state_.target);
    bool deeper = false;
    if (state_.safety.state == safety::SafetyState::ForceLimit) {
      for (std::size_t a = 0; a < arm_count(); ++a) {
        const auto now = safety::contact_force(*mesh_, tip(a, state_.q), config_.stiffness, 0.0);
        const auto then = safety::contact_force(*mesh_, tip(a, next), config_.stiffness, 0.0);
        deeper = deeper || then.indentation > now.indentation;
      }
    }
    if (!deeper) state_.q = next;
  }

  sense_all(previous);
  state_.clutch = safety::update_clutch(state_.clutch, state_.loads, thresholds_, state_.tick);

  if (state_.mode != Mode::Fault && state_.mode != Mode::Idle && state_.q == state_.target) {
    if (state_.sweep) {
      auto& sw = *state_.sweep;
      const auto& contacts = sw.contacts[sw.index];
      for (std::size_t a = 0; a < contacts.size(); ++a) {
        if (!contacts[a]) continue;
        session::StandardView v;
        v.name = sw.id + "#" + std::to_string(sw.index - 1) + (rig_ ? "/" + arm_name(a) : "");
        v.target = *contacts[a];
        const auto rec = grade_arm(v, a);
        out.events.push_back({state_.tick, session::EventKind::Grade, session::to_json(rec)});
        ++sw.graded;
      }
      if (++sw.index < sw.targets.size()) {
        state_.target = sw.targets[sw.index];
      } else {
        state_.sweep.reset();
        state_.mode = Mode::Idle;
      }
    } else {
      state_.mode = Mode::Idle;
    }
  }

  out.telemetry = telemetry();
  out.events.push_back({state_.tick, session::EventKind::Telemetry, out.telemetry});
  return out;
}

nlohmann::json Simulation::telemetry() const {
  nlohmann::json tips = nlohmann::json::array(), forces = nlohmann::json::array();
  for (std::size_t a = 0; a < state_.arms.size(); ++a) {
    const auto& t = state_.arms[a];
    const Quat qn = canonical(t.tip.orientation);
    const Transform base = arm_base(a, state_.q);
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : kin::evaluate(chain(a), arm_q(a, state_.q)).frames)
      frames.push_back(json_util::to_json(Vec3(base * f.translation())));
    tips.push_back({{"arm", arm_name(a)},
                    {"position_m", {t.tip.position.x(), t.tip.position.y(), t.tip.position.z()}},
                    {"quaternion_wxyz", {qn.w(), qn.x(), qn.y(), qn.z()}},
                    {"base_m", json_util::to_json(Vec3(base.translation()))},
                    {"frames_m", frames}});
    nlohmann::json prox;
    switch (t.proximity.kind) {
      case safety::Proximity::Kind::Contact: prox = "contact"; break;
      case safety::Proximity::Kind::Clear: prox = nullptr; break;
      case safety::Proximity::Kind::Distance: prox = t.proximity.distance; break;
    }
    forces.push_back({{"arm", arm_name(a)},
                      {"normal_n", t.force.normal},
                      {"lateral_n", {t.force.lateral.x(), t.force.lateral.y()}},
                      {"sensed_n", t.reading.forces},
                      {"indentation_m", t.force.indentation},
                      {"proximity_m", prox}});
  }
  nlohmann::json open = nlohmann::json::array();
  for (auto i : state_.clutch.disengaged()) open.push_back(joints_[i].id);
  nlohmann::json j = {{"type", "telemetry"},
                      {"tick", state_.tick},
                      {"time_s", static_cast<double>(state_.tick) * config_.dt},
                      {"mode", std::string(to_string(state_.mode))},
                      {"safety", std::string(safety::to_string(state_.safety.state))},
                      {"cause", state_.safety.cause},
                      {"q", vec_json(state_.q)},
                      {"tips", tips},
                      {"forces", forces},
                      {"loads", vec_json(state_.loads)},
                      {"clutch_open", open}};
  if (state_.separation) {
    j["clearance_m"] = state_.separation->min_distance;
    j["witness"] = {state_.separation->left, state_.separation->right};
  } else {
    j["clearance_m"] = nullptr;
    j["witness"] = nullptr;
  }
  if (state_.sweep)
    j["route"] = {{"id", state_.sweep->id}, {"index", state_.sweep->index}, {"count", state_.sweep->targets.size()}};
  else
    j["route"] = nullptr;
  return j;
}

nlohmann::json Simulation::describe() const {
  nlohmann::json joints = nlohmann::json::array();
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& s = joints_[i];
    joints.push_back({{"id", s.id},
                      {"kind", s.kind == kin::JointKind::Revolute ? "revolute" : "prismatic"},
                      {"min", s.min},
                      {"max", s.max},
                      {"max_velocity", s.max_velocity},
                      {"clutch_threshold", thresholds_[i] ? nlohmann::json(*thresholds_[i]) : nlohmann::json()}});
  }
  nlohmann::json arms = nlohmann::json::array();
  for (std::size_t a = 0; a < arm_count(); ++a) {
    arms.push_back({{"name", arm_name(a)}, {"offset", arm_offset(a)}, {"joints", chain(a).size()}});
  }
  nlohmann::json capsules = nlohmann::json::array();
  if (rig_)
    for (const auto& c : rig_->capsules)
      capsules.push_back({{"frame", c.frame}, {"from", json_util::to_json(c.from)},
                          {"to", json_util::to_json(c.to)}, {"radius_m", c.radius}});
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : views_) {
    const Pose p = surface::probe_pose(v.target);
    views.push_back({{"name", v.name}, {"pose", json_util::to_json(p)},
                     {"position_tolerance_m", v.position_tolerance},
                     {"orientation_tolerance_rad", v.orientation_tolerance},
                     {"force_window_n", {v.force_min, v.force_max}}});
  }
  nlohmann::json sweeps = nlohmann::json::array();
  for (const auto& [id, s] : config_.sweeps) sweeps.push_back({{"id", id}, {"dual", s.right.has_value()}});
  nlohmann::json verts = nlohmann::json::array(), tris = nlohmann::json::array();
  for (const auto& v : mesh_->vertices()) verts.push_back({v.x(), v.y(), v.z()});
  for (const auto& t : mesh_->triangles()) tris.push_back({t[0], t[1], t[2]});
  return {{"preset", config_.preset},
          {"dt_s", config_.dt},
          {"dual", dual()},
          {"joints", joints},
          {"arms", arms},
          {"capsules", capsules},
          {"clearance_margin_m", config_.clearance_margin},
          {"soft_limit_n", limits_.soft_limit},
          {"views", views},
          {"sweeps", sweeps},
          {"indentation_m", state_.indentation},
          {"mesh", {{"vertices", verts}, {"triangles", tris}}}};
}

session::SessionLog run_scenario(const Scenario& scenario) {
  Simulation sim(scenario.config);
  session::SessionLog log;
  std::size_t next = 0;
  for (std::uint64_t t = 1; t <= scenario.ticks; ++t) {
    while (next < scenario.commands.size() && scenario.commands[next].tick <= t)
      sim.submit(scenario.commands[next++].command);
    auto out = sim.step();
    for (auto& e : out.events) log.append(std::move(e));
  }
  return log;
}

}  // namespace ifind::sim
