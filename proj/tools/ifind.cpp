// ifind: headless entry point.
//
//   fk      forward kinematics of a preset or chain file
//   ik      inverse kinematics (single arm, or both arms of the rig)
//   plan    dual-arm sweep plan over a mesh
//   run     execute a scenario into a session log
//   report  grade / questionnaire tables from a session log
//   serve   host the simulation over TCP / WebSocket
//
// Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ifind/dual/dual_ik.hpp"
#include "ifind/kinematics/chain.hpp"
#include "ifind/kinematics/ik.hpp"
#include "ifind/session/report.hpp"
#include "ifind/sim/config.hpp"
#include "ifind/sim/server.hpp"
#include "ifind/sim/simulation.hpp"

using namespace ifind;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownPreset:
    case ErrorCode::InvalidConfig:
    case ErrorCode::DegenerateMesh:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidAnswer:
    case ErrorCode::TickRegression:
      return kUsage;
    default:
      return kDomainFailure;
  }
}

std::vector<double> parse_numbers(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": expected a comma-separated list of numbers");
  return out;
}

Vec3 parse_vec3(const std::string& flag, const std::string& text) {
  const auto v = parse_numbers(flag, text);
  if (v.size() != 3) throw UsageError(flag + ": expected 3 numbers, got " + std::to_string(v.size()));
  return {v[0], v[1], v[2]};
}

Quat parse_quat(const std::string& flag, const std::string& text) {
  const auto v = parse_numbers(flag, text);
  if (v.size() != 4) throw UsageError(flag + ": expected 4 numbers (w,x,y,z), got " + std::to_string(v.size()));
  Quat q(v[0], v[1], v[2], v[3]);
  if (q.norm() < 1e-12) throw UsageError(flag + ": zero quaternion");
  return q.normalized();
}

kin::JointVector parse_q(const std::string& flag, const std::string& text, std::size_t dof) {
  const auto v = parse_numbers(flag, text);
  if (v.size() != dof)
    throw UsageError(flag + ": expected " + std::to_string(dof) + " joint values, got " + std::to_string(v.size()));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_rig(const std::string& preset) {
  if (preset == "ifind-v3") return true;
  if (preset.rfind("ifind-", 0) == 0) return false;
  std::ifstream in(preset);
  if (!in) return false;
  const auto j = json::parse(in, nullptr, false);
  return j.is_object() && j.contains("gantry");
}

std::string join(const Eigen::VectorXd& v) {
  std::ostringstream o;
  o.precision(12);
  for (Eigen::Index i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
  return o.str();
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json pose_record(const std::string& arm, const Pose& p) {
  const Quat q = canonical(p.orientation);
  return {{"arm", arm},
          {"position_m", {p.position.x(), p.position.y(), p.position.z()}},
          {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

void print_pose(const std::string& arm, const Pose& p, bool records) {
  if (records) {
    std::cout << pose_record(arm, p).dump() << "\n";
    return;
  }
  const Quat q = canonical(p.orientation);
  std::printf("%s position_m %.9f %.9f %.9f quaternion_wxyz %.9f %.9f %.9f %.9f\n", arm.c_str(),
              p.position.x(), p.position.y(), p.position.z(), q.w(), q.x(), q.y(), q.z());
}

struct Common {
  std::string format = "text";
  bool records() const { return format == "records"; }
};

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "records"}));
}

// fk ----------------------------------------------------------------------

struct FkArgs {
  Common common;
  std::string preset;
  std::string q;
};

int cmd_fk(const FkArgs& a) {
  if (is_rig(a.preset)) {
    const auto rig = dual::load_rig(a.preset);
    const auto q = parse_q("--q", a.q, rig.dof());
    dual::check_rig_limits(rig, q);
    const auto state = dual::evaluate_rig(rig, q);
    print_pose("left", state.left.tip(), a.common.records());
    print_pose("right", state.right.tip(), a.common.records());
    return kOk;
  }
  const auto chain = kin::load_chain(a.preset);
  const auto q = parse_q("--q", a.q, chain.size());
  print_pose("main", kin::forward_kinematics(chain, q), a.common.records());
  return kOk;
}

// ik ----------------------------------------------------------------------

struct IkArgs {
  Common common;
  std::string preset;
  std::string position;
  std::string quaternion = "1,0,0,0";
  std::string right_position;
  std::string right_quaternion = "1,0,0,0";
  std::string seed;
  double margin = 0.02;
  int max_iterations = 0;
};

int cmd_ik(const IkArgs& a) {
  const Pose target{parse_vec3("--position", a.position), parse_quat("--quaternion", a.quaternion)};
  json out;
  if (is_rig(a.preset)) {
    if (a.right_position.empty()) throw UsageError("the dual-arm rig needs --right-position");
    const Pose right{parse_vec3("--right-position", a.right_position),
                     parse_quat("--right-quaternion", a.right_quaternion)};
    const auto rig = dual::load_rig(a.preset);
    const auto seed = a.seed.empty() ? dual::default_seed(rig) : parse_q("--seed", a.seed, rig.dof());
    dual::DualIkOptions o;
    o.clearance_margin = a.margin;
    if (a.max_iterations > 0) o.ik.max_iterations = a.max_iterations;
    try {
      const auto r = dual::solve_dual_ik(rig, target, right, seed, o);
      out = {{"q", vec_json(r.q)}, {"position_residual_m", r.position_residual},
             {"orientation_residual_rad", r.orientation_residual}, {"clearance_m", r.clearance},
             {"iterations", r.iterations}};
    } catch (const dual::DualNotConverged& e) {
      std::cerr << "ik: " << e.what() << " (residual " << e.best().position_residual << " m, "
                << e.best().orientation_residual << " rad)\n";
      return kDomainFailure;
    } catch (const dual::ClearanceInfeasible& e) {
      std::cerr << "ik: " << e.what() << " (best clearance " << e.best().clearance << " m)\n";
      return kDomainFailure;
    }
  } else {
    if (!a.right_position.empty()) throw UsageError("--right-position applies only to the dual-arm rig");
    const auto chain = kin::load_chain(a.preset);
    const auto seed = a.seed.empty() ? kin::home(chain) : parse_q("--seed", a.seed, chain.size());
    kin::IkOptions o;
    if (a.max_iterations > 0) o.max_iterations = a.max_iterations;
    try {
      const auto r = kin::solve_ik(chain, target, seed, o);
      out = {{"q", vec_json(r.q)}, {"position_residual_m", r.position_residual},
             {"orientation_residual_rad", r.orientation_residual}, {"iterations", r.iterations}};
    } catch (const kin::NotConverged& e) {
      std::cerr << "ik: " << e.what() << "\n";
      return kDomainFailure;
    }
  }
  if (a.common.records()) {
    std::cout << out.dump() << "\n";
  } else {
    const auto q = out.at("q").get<std::vector<double>>();
    std::cout << "q " << join(Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())))
              << "\n";
    std::printf("residual_m %.3g residual_rad %.3g iterations %d\n", out.at("position_residual_m").get<double>(),
                out.at("orientation_residual_rad").get<double>(), out.at("iterations").get<int>());
    if (out.contains("clearance_m")) std::printf("clearance_m %.6f\n", out.at("clearance_m").get<double>());
  }
  return kOk;
}

// plan --------------------------------------------------------------------

struct PlanArgs {
  Common common;
  std::string mesh = "phantom-abdomen";
  std::string rig = "ifind-v3";
  std::string left_start, left_end, right_start, right_end;
  double left_roll = 0.0, right_roll = 0.0;
  std::size_t waypoints = 10;
  double spacing = 0.01;
  double indentation = 0.003;
  double margin = 0.02;
  std::string out;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

int cmd_plan(const PlanArgs& a) {
  const Vec3 ls = parse_vec3("--left-start", a.left_start), le = parse_vec3("--left-end", a.left_end);
  const Vec3 rs = parse_vec3("--right-start", a.right_start), re = parse_vec3("--right-end", a.right_end);
  if (a.waypoints < 1) throw UsageError("--waypoints must be at least 1");
  if (!(a.margin > 0.0)) throw UsageError("--margin must be positive");
  const auto mesh = sim::load_mesh_source(a.mesh, {});
  const auto rig = dual::load_rig(a.rig);
  const auto left = surface::resample(
      mesh, surface::generate_sweep(mesh, ls, le, a.spacing, a.indentation, a.left_roll), a.waypoints);
  const auto right = surface::resample(
      mesh, surface::generate_sweep(mesh, rs, re, a.spacing, a.indentation, a.right_roll), a.waypoints);

  auto report = [&](const std::vector<dual::TrajectoryPoint>& traj, std::optional<std::size_t> failed) {
    double min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& p : traj) min_clearance = std::min(min_clearance, p.clearance);
    json r = {{"status", failed ? "failed" : "complete"},
              {"waypoints", a.waypoints},
              {"planned", traj.size()},
              {"margin_m", a.margin},
              {"min_clearance_m", traj.empty() ? json() : json(min_clearance)},
              {"trajectory", a.out}};
    if (failed) r["failed_index"] = *failed;
    if (a.common.records()) {
      std::cout << r.dump() << "\n";
      return;
    }
    std::cout << "status " << r["status"].get<std::string>() << "\n";
    if (failed) std::cout << "failed_index " << *failed << "\n";
    std::cout << "waypoints " << traj.size() << "/" << a.waypoints << "\n";
    if (!traj.empty()) std::printf("min_clearance_m %.6f\n", min_clearance);
    std::printf("margin_m %.6f\n", a.margin);
    std::cout << "trajectory " << a.out << "\n";
  };

  try {
    const auto traj = dual::plan_dual_sweep(rig, left, right, a.margin);
    write_file(a.out, dual::trajectory_records(traj));
    report(traj, std::nullopt);
    return kOk;
  } catch (const dual::PlanFailed& e) {
    write_file(a.out, dual::trajectory_records(e.partial()));
    std::cerr << "plan: failed at waypoint " << e.index() << ": " << e.what() << "\n";
    report(e.partial(), e.index());
    return kDomainFailure;
  }
}

// run ---------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> ticks;
};

int cmd_run(const RunArgs& a) {
  auto scenario = sim::load_scenario(a.scenario);
  if (a.seed) scenario.config.seed = *a.seed;
  if (a.ticks) scenario.ticks = *a.ticks;
  const auto log = sim::run_scenario(scenario);
  session::save_session(log, a.out);
  std::size_t grades = 0, safety = 0, faults = 0;
  for (const auto& e : log.events()) {
    if (e.kind == session::EventKind::Grade) ++grades;
    if (e.kind == session::EventKind::Safety) {
      ++safety;
      if (e.payload.value("to", std::string()) != "NOMINAL" && e.payload.value("to", std::string()) != "FORCE_LIMIT")
        ++faults;
    }
  }
  const json r = {{"scenario", scenario.name}, {"ticks", scenario.ticks}, {"events", log.size()},
                  {"grades", grades}, {"safety_transitions", safety}, {"faults", faults}, {"log", a.out}};
  if (a.common.records()) {
    std::cout << r.dump() << "\n";
  } else {
    std::cout << "scenario " << scenario.name << "\nticks " << scenario.ticks << "\nevents " << log.size()
              << "\ngrades " << grades << "\nsafety_transitions " << safety << "\nfaults " << faults
              << "\nlog " << a.out << "\n";
  }
  return kOk;
}

// report ------------------------------------------------------------------

struct ReportArgs {
  Common common;
  std::string log;
};

int cmd_report(const ReportArgs& a) {
  const auto r = session::build_report(session::load_session(a.log));
  if (a.common.records())
    std::cout << session::report_json(r).dump() << "\n";
  else
    std::cout << session::format_report(r);
  return kOk;
}

// serve -------------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::string preset;
  std::optional<int> port;
  std::string bind = "127.0.0.1";
  std::string static_dir;
  std::string log;
  std::size_t capacity = 256;
};

int cmd_serve(const ServeArgs& a) {
  sim::SimConfig cfg = a.config.empty() ? sim::parse_config(json::object()) : sim::load_config(a.config);
  if (!a.preset.empty()) cfg.preset = a.preset;
  sim::ServerOptions opts;
  opts.bind_address = a.bind;
  opts.port = a.port.value_or(cfg.port);
  opts.subscriber_capacity = a.capacity;
  if (!a.static_dir.empty()) {
    if (!std::filesystem::is_directory(a.static_dir)) throw UsageError("--static-dir: not a directory: " + a.static_dir);
    opts.static_dir = a.static_dir;
  }

  // Signals are taken synchronously; every thread inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::optional<std::filesystem::path> log_path;
  if (!a.log.empty()) log_path = a.log;
  sim::SimService service(cfg, log_path);
  sim::Server server(service, opts);
  try {
    server.start();
  } catch (const std::system_error& e) {
    std::cerr << "serve: " << e.what() << "\n";
    return kDomainFailure;
  }
  service.start();
  std::cout << "listening " << a.bind << ":" << server.port() << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  service.stop();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robotic ultrasound kinematics, planning and simulation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.failure_message(CLI::FailureMessage::help);

  FkArgs fk;
  auto* c_fk = app.add_subcommand("fk", "Forward kinematics: probe tip pose for a joint vector");
  c_fk->add_option("--preset", fk.preset, "Preset id (ifind-v1, ifind-v2, ifind-v3-arm, ifind-v3) or chain file")->required();
  c_fk->add_option("--q", fk.q, "Joint values, comma-separated (rad / m)")->required();
  add_format(c_fk, fk.common);

  IkArgs ik;
  auto* c_ik = app.add_subcommand("ik", "Inverse kinematics for a probe tip pose");
  c_ik->add_option("--preset", ik.preset, "Preset id or chain / rig file")->required();
  c_ik->add_option("--position", ik.position, "Target position x,y,z (m); left arm on the rig")->required();
  c_ik->add_option("--quaternion", ik.quaternion, "Target orientation w,x,y,z");
  c_ik->add_option("--right-position", ik.right_position, "Right arm target position (rig only)");
  c_ik->add_option("--right-quaternion", ik.right_quaternion, "Right arm target orientation (rig only)");
  c_ik->add_option("--seed", ik.seed, "Seed joint vector (default: home)");
  c_ik->add_option("--margin", ik.margin, "Arm clearance margin (m, rig only)");
  c_ik->add_option("--max-iterations", ik.max_iterations, "Iteration cap per descent");
  add_format(c_ik, ik.common);

  PlanArgs plan;
  auto* c_plan = app.add_subcommand("plan", "Plan a dual-arm sweep and write the trajectory");
  c_plan->add_option("--mesh", plan.mesh, "OFF mesh file or 'phantom-abdomen'");
  c_plan->add_option("--rig", plan.rig, "Rig preset or file");
  c_plan->add_option("--left-start", plan.left_start, "Left path start x,y,z (m)")->required();
  c_plan->add_option("--left-end", plan.left_end, "Left path end x,y,z (m)")->required();
  c_plan->add_option("--right-start", plan.right_start, "Right path start x,y,z (m)")->required();
  c_plan->add_option("--right-end", plan.right_end, "Right path end x,y,z (m)")->required();
  c_plan->add_option("--left-roll", plan.left_roll, "Left probe axial roll (rad)");
  c_plan->add_option("--right-roll", plan.right_roll, "Right probe axial roll (rad)");
  c_plan->add_option("--waypoints", plan.waypoints, "Waypoints per path");
  c_plan->add_option("--spacing", plan.spacing, "Surface sampling bound before resampling (m)");
  c_plan->add_option("--indentation", plan.indentation, "Probe indentation (m)");
  c_plan->add_option("--margin", plan.margin, "Minimum arm clearance (m)");
  c_plan->add_option("--out", plan.out, "Trajectory file (one record per waypoint)")->required();
  add_format(c_plan, plan.common);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run a scenario headless and write its session log");
  c_run->add_option("--scenario", run.scenario, "Scenario file or bundled name")->required();
  c_run->add_option("--out", run.out, "Session log file")->required();
  c_run->add_option("--seed", run.seed, "Override the scenario seed");
  c_run->add_option("--ticks", run.ticks, "Override the tick count");
  add_format(c_run, run.common);

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Grade, chi-square and questionnaire tables of a session log");
  c_report->add_option("--log", report.log, "Session log file")->required();
  add_format(c_report, report.common);

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve the simulation until interrupted");
  c_serve->add_option("--config", serve.config, "Simulation config file or bundled scenario name");
  c_serve->add_option("--preset", serve.preset, "Override the config preset");
  c_serve->add_option("--port", serve.port, "TCP port (0 picks one)");
  c_serve->add_option("--bind", serve.bind, "Bind address");
  c_serve->add_option("--static-dir", serve.static_dir, "Directory served over HTTP");
  c_serve->add_option("--log", serve.log, "Append session events to this file");
  c_serve->add_option("--queue", serve.capacity, "Telemetry frames buffered per client");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_fk) return cmd_fk(fk);
    if (*c_ik) return cmd_ik(ik);
    if (*c_plan) return cmd_plan(plan);
    if (*c_run) return cmd_run(run);
    if (*c_report) return cmd_report(report);
    if (*c_serve) return cmd_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    for (const auto* sub : app.get_subcommands()) std::cerr << sub->help();
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  }
  return kUsage;
}
