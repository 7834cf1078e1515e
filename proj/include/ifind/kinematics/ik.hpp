#pragma once

#include <cstdint>

#include "ifind/common/error.hpp"
#include "ifind/kinematics/kinematics.hpp"

namespace ifind::kin {

struct IkOptions {
  int max_iterations = 200;
  double damping = 0.05;               // lambda of the damped least-squares step
  double position_tolerance = 1e-7;    // m
  double orientation_tolerance = 1e-7; // rad
  double max_step = 0.2;               // cap on the joint-step norm per iteration
  // Extra descents from seeded random in-limit starts when the seed stalls in
  // a local minimum. 0 disables them.
  int restarts = 4;
  std::uint64_t restart_seed = 0x1f1d5eedULL;
};

struct IkResult {
  JointVector q;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  int iterations = 0;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, IkResult best)
      : Error(ErrorCode::NotConverged, what), best_(std::move(best)) {}
  const IkResult& best() const noexcept { return best_; }

 private:
  IkResult best_;
};

/// 6-vector task error (position, rotation vector) from `current` to `target`.
Eigen::Matrix<double, 6, 1> pose_error(const Pose& current, const Pose& target);

/// Damped least-squares step J^T (J J^T + lambda^2 I)^-1 e.
Eigen::VectorXd dls_step(const Eigen::MatrixXd& jac, const Eigen::VectorXd& err, double damping);

/// Damped least-squares IK from `seed`. Deterministic; the returned vector is
/// always within limits. Throws NotConverged carrying the best iterate.
IkResult solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkOptions& opts = {});

}  // namespace ifind::kin
