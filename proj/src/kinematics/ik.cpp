#include "ifind/kinematics/ik.hpp"

#include <limits>
#include <random>
#include <sstream>

namespace ifind::kin {

Eigen::Matrix<double, 6, 1> pose_error(const Pose& current, const Pose& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_error(current.orientation, target.orientation);
  return e;
}

Eigen::VectorXd dls_step(const Eigen::MatrixXd& jac, const Eigen::VectorXd& err, double damping) {
  Eigen::MatrixXd jjt = jac * jac.transpose();
  jjt.diagonal().array() += damping * damping;
  return jac.transpose() * jjt.ldlt().solve(err);
}

namespace {

// Joints pinned at a limit whose step would push further out are dropped from
// the Jacobian and the step is recomputed, so the free joints absorb the task.
Eigen::VectorXd limited_step(const KinematicChain& chain, const JointVector& q,
                             Eigen::MatrixXd jac, const Eigen::VectorXd& err, double damping) {
  Eigen::VectorXd dq = dls_step(jac, err, damping);
  for (std::size_t pass = 0; pass < chain.size(); ++pass) {
    bool blocked = false;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto& j = chain.joints[i];
      const auto k = static_cast<Eigen::Index>(i);
      if (j.full_circle() || jac.col(k).isZero(0.0)) continue;
      const bool at_max = q[k] >= j.max && dq[k] > 0.0;
      const bool at_min = q[k] <= j.min && dq[k] < 0.0;
      if (at_max || at_min) {
        jac.col(k).setZero();
        blocked = true;
      }
    }
    if (!blocked) break;
    dq = dls_step(jac, err, damping);
  }
  return dq;
}

struct Attempt {
  IkResult best;
  bool converged = false;
};

Attempt descend(const KinematicChain& chain, const Pose& target, JointVector q,
                const IkOptions& opts, int iteration_offset) {
  Attempt out;
  double best_score = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const auto state = evaluate(chain, q);
    const Pose current = Pose::from_transform(state.frames.back());
    const auto e = pose_error(current, target);
    const double ep = e.head<3>().norm();
    const double er = e.tail<3>().norm();
    const double score = ep + er;
    if (score < best_score) {
      best_score = score;
      out.best = {q, ep, er, iteration_offset + it};
    }
    if (ep < opts.position_tolerance && er < opts.orientation_tolerance) {
      out.best = {q, ep, er, iteration_offset + it};
      out.converged = true;
      return out;
    }
    if (it >= opts.max_iterations) return out;

    Eigen::VectorXd dq = limited_step(chain, q, jacobian(chain, q), e, opts.damping);
    const double norm = dq.norm();
    if (norm > opts.max_step) dq *= opts.max_step / norm;
    q = clamp_to_limits(chain, q + dq);
  }
}

}  // namespace

IkResult solve_ik(const KinematicChain& chain, const Pose& target, const JointVector& seed,
                  const IkOptions& opts) {
  check_limits(chain, seed);
  Attempt attempt = descend(chain, target, seed, opts, 0);
  IkResult best = attempt.best;
  std::mt19937_64 rng(opts.restart_seed);
  for (int r = 0; r < opts.restarts && !attempt.converged; ++r) {
    JointVector start(static_cast<Eigen::Index>(chain.size()));
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto& j = chain.joints[i];
      start[static_cast<Eigen::Index>(i)] =
          j.min + (j.max - j.min) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    attempt = descend(chain, target, start, opts, (r + 1) * (opts.max_iterations + 1));
    if (attempt.converged ||
        attempt.best.position_residual + attempt.best.orientation_residual <
            best.position_residual + best.orientation_residual)
      best = attempt.best;
  }
  if (attempt.converged) return attempt.best;

  std::ostringstream msg;
  msg << "IK did not converge after " << opts.max_iterations << " iterations (residual "
      << best.position_residual << " m, " << best.orientation_residual << " rad)";
  throw NotConverged(msg.str(), best);
}

}  // namespace ifind::kin
