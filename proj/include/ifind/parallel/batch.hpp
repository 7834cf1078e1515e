#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ifind/dual/separation.hpp"
#include "ifind/kinematics/ik.hpp"
#include "ifind/surface/mesh.hpp"

// Batch versions of the hot kernels. Every element is computed by the same
// scalar code in both modes, so Serial and Parallel results are bit-identical;
// Serial is the reference the OpenMP path is tested against.
namespace ifind::parallel {

enum class Exec { Serial, Parallel };

/// Threads OpenMP would use for a Parallel batch.
int max_threads();

std::vector<surface::SurfacePoint> closest_points(const surface::SurfaceMesh& mesh,
                                                  std::span<const Vec3> points, Exec exec);

std::vector<std::optional<double>> raycasts(const surface::SurfaceMesh& mesh,
                                            std::span<const Vec3> origins, const Vec3& direction,
                                            Exec exec);

std::vector<Pose> forward_kinematics(const kin::KinematicChain& chain,
                                     std::span<const kin::JointVector> qs, Exec exec);

/// Max-norm of (J - J_fd) over max-norm of J_fd, with J_fd from central
/// differences of step `h`. Each q must stay within limits at q +- h.
std::vector<double> jacobian_errors(const kin::KinematicChain& chain,
                                    std::span<const kin::JointVector> qs, double h, Exec exec);

struct RoundTrip {
  bool converged = false;
  double position_residual = 0.0;     // m, against the FK target
  double orientation_residual = 0.0;  // rad
  bool within_limits = false;
};

/// FK of each `truth`, then IK back from the matching `seed`.
std::vector<RoundTrip> ik_round_trips(const kin::KinematicChain& chain,
                                      std::span<const kin::JointVector> truths,
                                      std::span<const kin::JointVector> seeds,
                                      const kin::IkOptions& opts, Exec exec);

std::vector<dual::SeparationReport> separations(const dual::DualArmRig& rig,
                                                std::span<const kin::JointVector> qs, Exec exec);

/// Brute-force arm-to-arm clearance: `samples` evenly spaced points on each
/// capsule axis, every left/right point pair, minus both radii.
std::vector<double> sampled_separations(const dual::DualArmRig& rig,
                                        std::span<const kin::JointVector> qs,
                                        std::size_t samples, Exec exec);

}  // namespace ifind::parallel
