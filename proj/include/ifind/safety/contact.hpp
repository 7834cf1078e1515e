#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include "ifind/kinematics/chain.hpp"
#include "ifind/surface/mesh.hpp"

namespace ifind::safety {

/// Force applied by the probe to the tissue: `normal` pushes along -n,
/// `lateral` is expressed in tangent_basis(n).
struct ContactForce {
  double normal = 0.0;
  Eigen::Vector2d lateral = Eigen::Vector2d::Zero();
  Vec3 surface_normal = Vec3::UnitZ();
  double indentation = 0.0;

  Vec3 world_force() const;
  bool in_contact() const { return indentation > 0.0; }
};

constexpr double kDefaultStiffness = 2000.0;  // N/m
constexpr double kDefaultFriction = 0.3;

/// Linear spring contact. `motion` is the commanded tip velocity (any scale);
/// friction acts along its tangential component and vanishes when stationary.
ContactForce contact_force(const surface::SurfaceMesh& mesh, const Pose& probe, double stiffness,
                           double friction_coeff, const Vec3& motion = Vec3::Zero());

struct SensorModel {
  double quantization_step = 0.01;  // N
  double noise_sigma = 0.0;         // N
};

struct SensorReading {
  // normal, lateral[0], lateral[1]; each an exact multiple of `step`.
  std::array<double, 3> forces{};
  std::array<std::int64_t, 3> counts{};
  double step = 0.01;
  double sigma = 0.0;
  std::uint64_t tick = 0;
};

/// Seeded Gaussian source. Box-Muller over mt19937_64 so sequences are
/// identical across standard libraries.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}
  double gaussian(double sigma);

 private:
  double uniform_open();  // (0, 1]
  std::mt19937_64 engine_;
};

SensorReading sense(const ContactForce& force, const SensorModel& model, NoiseSource& noise,
                    std::uint64_t tick = 0);

/// Joint loads for a tip wrench (force; moment) in the chain base frame:
/// N for prismatic joints, N*m for revolute.
Eigen::VectorXd joint_torques(const kin::KinematicChain& chain, const kin::JointVector& q,
                              const Eigen::Matrix<double, 6, 1>& wrench);

struct Proximity {
  enum class Kind { Distance, Contact, Clear };
  Kind kind = Kind::Clear;
  double distance = 0.0;  // m, meaningful for Kind::Distance
};

/// Probe-axis range finder: contact when the tip penetrates, otherwise the
/// raycast distance along the tool z axis, or Clear on a miss.
Proximity proximity(const surface::SurfaceMesh& mesh, const Pose& probe);

}  // namespace ifind::safety
