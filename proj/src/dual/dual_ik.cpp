#include "ifind/dual/dual_ik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ifind::dual {

namespace {

struct Evaluation {
  RigState state;
  Eigen::Matrix<double, 12, 1> error;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  SeparationReport separation;
};

Evaluation evaluate(const DualArmRig& rig, const JointVector& q, const Pose& tl, const Pose& tr) {
  Evaluation ev;
  ev.state = evaluate_rig(rig, q);
  ev.error.head<6>() = kin::pose_error(ev.state.left.tip(), tl);
  ev.error.tail<6>() = kin::pose_error(ev.state.right.tip(), tr);
  ev.position_residual = std::max(ev.error.segment<3>(0).norm(), ev.error.segment<3>(6).norm());
  ev.orientation_residual = std::max(ev.error.segment<3>(3).norm(), ev.error.segment<3>(9).norm());
  ev.separation = separation(rig, ev.state);
  return ev;
}

bool task_met(const Evaluation& ev, const kin::IkOptions& o) {
  return ev.position_residual <= o.position_tolerance &&
         ev.orientation_residual <= o.orientation_tolerance;
}

DualIkResult result_of(const JointVector& q, const Evaluation& ev, int iterations) {
  return {q, ev.position_residual, ev.orientation_residual, ev.separation.min_distance, iterations};
}

Eigen::VectorXd limited_step(const std::vector<kin::JointSpec>& joints, const JointVector& q,
                             Eigen::MatrixXd jac, const Eigen::VectorXd& err, double damping) {
  Eigen::VectorXd dq = kin::dls_step(jac, err, damping);
  for (std::size_t pass = 0; pass < joints.size(); ++pass) {
    bool blocked = false;
    for (std::size_t i = 0; i < joints.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (joints[i].full_circle() || jac.col(k).isZero(0.0)) continue;
      if ((q[k] >= joints[i].max && dq[k] > 0.0) || (q[k] <= joints[i].min && dq[k] < 0.0)) {
        jac.col(k).setZero();
        blocked = true;
      }
    }
    if (!blocked) break;
    dq = kin::dls_step(jac, err, damping);
  }
  return dq;
}

// Descent direction of sum over close pairs of max(0, activation - d)^2.
Eigen::VectorXd repulsion(const DualArmRig& rig, const RigState& state, double activation) {
  const auto left = world_capsules(rig, state, Arm::Left);
  const auto right = world_capsules(rig, state, Arm::Right);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rig.dof()));
  for (const auto& cl : left) {
    for (const auto& cr : right) {
      const auto sc = closest_segment_segment(cl.a, cl.b, cr.a, cr.b);
      const double d = sc.distance - cl.radius - cr.radius;
      if (d >= activation) continue;
      Vec3 n = sc.on_second - sc.on_first;
      if (n.norm() < 1e-9) n = state.right.base.translation() - state.left.base.translation();
      n.normalize();
      const Eigen::RowVectorXd dd =
          n.transpose() * (point_jacobian(rig, state, Arm::Right, cr.frame, sc.on_second) -
                           point_jacobian(rig, state, Arm::Left, cl.frame, sc.on_first));
      g += 2.0 * (activation - d) * dd.transpose();
    }
  }
  return g;
}

void cap_norm(Eigen::VectorXd& v, double cap) {
  const double n = v.norm();
  if (n > cap) v *= cap / n;
}

// Independent per-arm solves bring both tips near their targets before the
// coupled iteration starts.
JointVector per_arm_seed(const DualArmRig& rig, JointVector q, const Pose& tl, const Pose& tr,
                         const kin::IkOptions& o) {
  for (auto [arm, target] : {std::pair{Arm::Left, tl}, std::pair{Arm::Right, tr}}) {
    const auto& chain = rig.chain(arm);
    const Transform base = arm_base(rig, q[0], arm);
    const Pose local = Pose::from_transform(base.inverse() * target.to_transform());
    JointVector qa;
    try {
      qa = kin::solve_ik(chain, local, arm_joints(rig, q, arm), o).q;
    } catch (const kin::NotConverged& e) {
      qa = e.best().q;
    }
    q.segment(static_cast<Eigen::Index>(rig.offset(arm)), static_cast<Eigen::Index>(chain.size())) = qa;
  }
  return q;
}

double wrapped_step(const kin::JointSpec& j, double a, double b) {
  double d = b - a;
  if (j.full_circle()) d = std::remainder(d, 2.0 * kPi);
  return std::abs(d);
}

}  // namespace

DualIkResult solve_dual_ik(const DualArmRig& rig, const Pose& target_left, const Pose& target_right,
                           const JointVector& seed, const DualIkOptions& opts) {
  check_rig_limits(rig, seed);
  const auto& o = opts.ik;
  const double margin = opts.clearance_margin;
  {
    const auto ev = evaluate(rig, seed, target_left, target_right);
    if (task_met(ev, o) && ev.separation.min_distance >= margin) return result_of(seed, ev, 0);
  }

  const auto joints = rig_joints(rig);
  const auto n = static_cast<Eigen::Index>(rig.dof());
  JointVector q = per_arm_seed(rig, seed, target_left, target_right, o);

  std::optional<DualIkResult> best_feasible_task;  // task met, best clearance
  DualIkResult best_task;                           // smallest task residual
  double best_task_score = std::numeric_limits<double>::infinity();
  int stall = 0;

  int it = 0;
  for (; it < o.max_iterations; ++it) {
    const auto ev = evaluate(rig, q, target_left, target_right);
    const double clearance = ev.separation.min_distance;
    if (task_met(ev, o)) {
      if (clearance >= margin) return result_of(q, ev, it);
      if (!best_feasible_task || clearance > best_feasible_task->clearance + 1e-9) {
        best_feasible_task = result_of(q, ev, it);
        stall = 0;
      } else if (++stall >= opts.stall_iterations) {
        break;
      }
    }
    const double score = ev.position_residual + ev.orientation_residual;
    if (score < best_task_score) {
      best_task_score = score;
      best_task = result_of(q, ev, it);
    }

    Eigen::MatrixXd jac(12, n);
    jac.topRows<6>() = tip_jacobian(rig, ev.state, Arm::Left);
    jac.bottomRows<6>() = tip_jacobian(rig, ev.state, Arm::Right);
    Eigen::VectorXd dq = limited_step(joints, q, jac, ev.error, o.damping);

    Eigen::VectorXd push = opts.repulsion_gain *
                           repulsion(rig, ev.state, margin + opts.repulsion_buffer);
    if (!push.isZero(0.0)) {
      const Eigen::MatrixXd pinv = jac.completeOrthogonalDecomposition().pseudoInverse();
      Eigen::VectorXd null_push = push - pinv * (jac * push);
      cap_norm(null_push, 0.5 * o.max_step);
      dq += null_push;
    }
    cap_norm(dq, o.max_step);
    q = clamp_rig(rig, q + dq);
  }

  std::ostringstream msg;
  if (best_feasible_task) {
    best_feasible_task->iterations = it;
    msg << "dual IK reached both targets but clearance " << best_feasible_task->clearance
        << " m stays below margin " << margin << " m";
    throw ClearanceInfeasible(msg.str(), *best_feasible_task);
  }
  best_task.iterations = it;
  msg << "dual IK did not converge: position residual " << best_task.position_residual
      << " m, orientation residual " << best_task.orientation_residual << " rad";
  throw DualNotConverged(msg.str(), best_task);
}

JointVector default_seed(const DualArmRig& rig) {
  JointVector q = rig_home(rig);
  q[0] = std::clamp(0.0, rig.gantry.min, rig.gantry.max);
  return q;
}

std::vector<TrajectoryPoint> plan_dual_sweep(const DualArmRig& rig, const surface::SweepPath& left,
                                             const surface::SweepPath& right, double margin,
                                             const JointVector& seed, DualPlanOptions opts) {
  if (left.waypoints.size() != right.waypoints.size())
    throw Error(ErrorCode::InvalidArgument, "dual sweep paths must have equal waypoint counts");
  if (left.waypoints.empty()) throw Error(ErrorCode::EmptyPath, "dual sweep paths are empty");
  if (!(margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "clearance margin must be positive");
  opts.ik.clearance_margin = margin;
  const auto joints = rig_joints(rig);

  std::vector<TrajectoryPoint> traj;
  JointVector q = seed;
  for (std::size_t k = 0; k < left.waypoints.size(); ++k) {
    const Pose tl = surface::probe_pose(left.waypoints[k]);
    const Pose tr = surface::probe_pose(right.waypoints[k]);
    DualIkResult r;
    try {
      r = solve_dual_ik(rig, tl, tr, q, opts.ik);
    } catch (const Error& e) {
      throw PlanFailed("waypoint " + std::to_string(k) + ": " + e.what(), k, traj);
    }
    if (k > 0) {
      for (std::size_t i = 0; i < joints.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double step = wrapped_step(joints[i], q[idx], r.q[idx]);
        if (step > opts.max_joint_step) {
          std::ostringstream msg;
          msg << "waypoint " << k << ": joint " << joints[i].id << " steps " << step
              << " beyond the continuity bound " << opts.max_joint_step;
          throw PlanFailed(msg.str(), k, traj);
        }
      }
    }
    q = r.q;
    traj.push_back({r.q, r.clearance});
  }
  return traj;
}

std::vector<TrajectoryPoint> plan_dual_sweep(const DualArmRig& rig, const surface::SweepPath& left,
                                             const surface::SweepPath& right, double margin) {
  return plan_dual_sweep(rig, left, right, margin, default_seed(rig));
}

std::string trajectory_records(const std::vector<TrajectoryPoint>& traj) {
  std::string out;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    nlohmann::json rec;
    rec["tick"] = k;
    rec["q"] = std::vector<double>(traj[k].q.data(), traj[k].q.data() + traj[k].q.size());
    rec["clearance"] = traj[k].clearance;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ifind::dual
