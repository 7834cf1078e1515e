#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ifind/dual/separation.hpp"
#include "ifind/kinematics/ik.hpp"
#include "ifind/surface/sweep.hpp"

namespace ifind::dual {

struct DualIkOptions {
  kin::IkOptions ik{.max_iterations = 400};
  double clearance_margin = 0.02;  // m
  // Repulsion acts on every capsule pair closer than margin + buffer.
  double repulsion_buffer = 0.01;
  double repulsion_gain = 20.0;
  // Clearance iterations without improvement before giving up.
  int stall_iterations = 40;
};

struct DualIkResult {
  JointVector q;
  double position_residual = 0.0;     // max over both arms
  double orientation_residual = 0.0;  // max over both arms
  double clearance = 0.0;
  int iterations = 0;
};

class DualNotConverged : public Error {
 public:
  DualNotConverged(const std::string& what, DualIkResult best)
      : Error(ErrorCode::NotConverged, what), best_(std::move(best)) {}
  const DualIkResult& best() const noexcept { return best_; }

 private:
  DualIkResult best_;
};

/// Both targets reached but the clearance margin could not be met.
class ClearanceInfeasible : public Error {
 public:
  ClearanceInfeasible(const std::string& what, DualIkResult best)
      : Error(ErrorCode::ClearanceInfeasible, what), best_(std::move(best)) {}
  const DualIkResult& best() const noexcept { return best_; }

 private:
  DualIkResult best_;
};

/// Coordinated IK for both probes. Throws LimitViolation for an out-of-limit
/// seed, DualNotConverged or ClearanceInfeasible.
DualIkResult solve_dual_ik(const DualArmRig& rig, const Pose& target_left, const Pose& target_right,
                           const JointVector& seed, const DualIkOptions& opts = {});

struct TrajectoryPoint {
  JointVector q;
  double clearance = 0.0;
};

struct DualPlanOptions {
  DualIkOptions ik;
  double max_joint_step = 0.5;  // rad or m between consecutive waypoints
};

class PlanFailed : public Error {
 public:
  PlanFailed(const std::string& what, std::size_t index, std::vector<TrajectoryPoint> partial)
      : Error(ErrorCode::PlanFailed, what), index_(index), partial_(std::move(partial)) {}
  std::size_t index() const noexcept { return index_; }
  const std::vector<TrajectoryPoint>& partial() const noexcept { return partial_; }

 private:
  std::size_t index_;
  std::vector<TrajectoryPoint> partial_;
};

/// Waypoint-by-waypoint plan, each solve seeded from the previous solution.
std::vector<TrajectoryPoint> plan_dual_sweep(const DualArmRig& rig, const surface::SweepPath& left,
                                             const surface::SweepPath& right, double margin,
                                             const JointVector& seed, DualPlanOptions opts = {});
std::vector<TrajectoryPoint> plan_dual_sweep(const DualArmRig& rig, const surface::SweepPath& left,
                                             const surface::SweepPath& right, double margin);

/// Home with the gantry centred; the default planning seed.
JointVector default_seed(const DualArmRig& rig);

/// One line per waypoint: {"tick", "q", "clearance"}.
std::string trajectory_records(const std::vector<TrajectoryPoint>& traj);

}  // namespace ifind::dual
