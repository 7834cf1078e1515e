#include "ifind/parallel/batch.hpp"

#include <omp.h>

#include <exception>
#include <limits>
#include <mutex>

#include "ifind/kinematics/chain.hpp"

namespace ifind::parallel {

namespace {

// Runs body(i) for i in [0, n). Exceptions cannot cross an OpenMP region, so
// the one from the lowest index is kept and rethrown afterwards, matching
// what the serial loop would have thrown.
template <class Body>
void for_each(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(mu);
      if (i < failed_at) {
        failed_at = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::vector<surface::SurfacePoint> closest_points(const surface::SurfaceMesh& mesh,
                                                  std::span<const Vec3> points, Exec exec) {
  std::vector<surface::SurfacePoint> out(points.size());
  for_each(points.size(), exec, [&](std::size_t i) { out[i] = surface::closest_point(mesh, points[i]); });
  return out;
}

std::vector<std::optional<double>> raycasts(const surface::SurfaceMesh& mesh,
                                            std::span<const Vec3> origins, const Vec3& direction,
                                            Exec exec) {
  std::vector<std::optional<double>> out(origins.size());
  for_each(origins.size(), exec, [&](std::size_t i) { out[i] = surface::raycast(mesh, origins[i], direction); });
  return out;
}

std::vector<Pose> forward_kinematics(const kin::KinematicChain& chain,
                                     std::span<const kin::JointVector> qs, Exec exec) {
  std::vector<Pose> out(qs.size());
  for_each(qs.size(), exec, [&](std::size_t i) { out[i] = kin::forward_kinematics(chain, qs[i]); });
  return out;
}

std::vector<double> jacobian_errors(const kin::KinematicChain& chain,
                                    std::span<const kin::JointVector> qs, double h, Exec exec) {
  std::vector<double> out(qs.size());
  for_each(qs.size(), exec, [&](std::size_t i) {
    const auto& q = qs[i];
    const kin::Jacobian analytic = kin::jacobian(chain, q);
    kin::Jacobian numeric(6, q.size());
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      kin::JointVector lo = q, hi = q;
      lo[j] -= h;
      hi[j] += h;
      const Pose a = kin::forward_kinematics(chain, lo);
      const Pose b = kin::forward_kinematics(chain, hi);
      numeric.block<3, 1>(0, j) = (b.position - a.position) / (2.0 * h);
      numeric.block<3, 1>(3, j) = rotation_error(a.orientation, b.orientation) / (2.0 * h);
    }
    const double scale = numeric.cwiseAbs().maxCoeff();
    out[i] = (analytic - numeric).cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
  });
  return out;
}

std::vector<RoundTrip> ik_round_trips(const kin::KinematicChain& chain,
                                      std::span<const kin::JointVector> truths,
                                      std::span<const kin::JointVector> seeds,
                                      const kin::IkOptions& opts, Exec exec) {
  std::vector<RoundTrip> out(truths.size());
  for_each(truths.size(), exec, [&](std::size_t i) {
    const Pose target = kin::forward_kinematics(chain, truths[i]);
    RoundTrip r;
    kin::JointVector q;
    try {
      q = kin::solve_ik(chain, target, seeds[i], opts).q;
      r.converged = true;
    } catch (const kin::NotConverged& e) {
      q = e.best().q;
    }
    const Pose reached = kin::forward_kinematics(chain, q);
    r.position_residual = (reached.position - target.position).norm();
    r.orientation_residual = angular_distance(reached.orientation, target.orientation);
    r.within_limits = kin::within_limits(chain, q);
    out[i] = r;
  });
  return out;
}

std::vector<dual::SeparationReport> separations(const dual::DualArmRig& rig,
                                                std::span<const kin::JointVector> qs, Exec exec) {
  std::vector<dual::SeparationReport> out(qs.size());
  for_each(qs.size(), exec, [&](std::size_t i) { out[i] = dual::min_separation(rig, qs[i]); });
  return out;
}

std::vector<double> sampled_separations(const dual::DualArmRig& rig,
                                        std::span<const kin::JointVector> qs,
                                        std::size_t samples, Exec exec) {
  std::vector<double> out(qs.size());
  for_each(qs.size(), exec, [&](std::size_t i) {
    dual::check_rig_limits(rig, qs[i]);
    const auto state = dual::evaluate_rig(rig, qs[i]);
    const auto left = dual::world_capsules(rig, state, dual::Arm::Left);
    const auto right = dual::world_capsules(rig, state, dual::Arm::Right);
    auto points = [&](const dual::WorldCapsule& c) {
      std::vector<Vec3> p(samples);
      for (std::size_t k = 0; k < samples; ++k) {
        const double t = samples == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(samples - 1);
        p[k] = c.a + t * (c.b - c.a);
      }
      return p;
    };
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : left) {
      const auto lp = points(l);
      for (const auto& r : right) {
        const auto rp = points(r);
        double d2 = std::numeric_limits<double>::infinity();
        for (const auto& a : lp)
          for (const auto& b : rp) d2 = std::min(d2, (a - b).squaredNorm());
        best = std::min(best, std::sqrt(d2) - l.radius - r.radius);
      }
    }
    out[i] = best;
  });
  return out;
}

}  // namespace ifind::parallel
