#include "ifind/safety/contact.hpp"

#include <cmath>

#include "ifind/common/error.hpp"
#include "ifind/kinematics/kinematics.hpp"

namespace ifind::safety {

Vec3 ContactForce::world_force() const {
  Vec3 t1, t2;
  tangent_basis(surface_normal, t1, t2);
  return -normal * surface_normal + lateral.x() * t1 + lateral.y() * t2;
}

ContactForce contact_force(const surface::SurfaceMesh& mesh, const Pose& probe, double stiffness,
                           double friction_coeff, const Vec3& motion) {
  if (!(stiffness > 0.0)) throw Error(ErrorCode::InvalidArgument, "stiffness must be positive");
  const auto sp = surface::closest_point(mesh, probe.position);
  ContactForce f;
  f.surface_normal = sp.normal;
  f.indentation = std::max(0.0, (sp.point - probe.position).dot(sp.normal));
  f.normal = stiffness * f.indentation;
  if (f.normal > 0.0) {
    const Vec3 tangential = motion - motion.dot(sp.normal) * sp.normal;
    const double len = tangential.norm();
    if (len > 1e-12) {
      Vec3 t1, t2;
      tangent_basis(sp.normal, t1, t2);
      const Vec3 dir = tangential / len;
      f.lateral = friction_coeff * f.normal * Eigen::Vector2d(dir.dot(t1), dir.dot(t2));
    }
  }
  return f;
}

double NoiseSource::uniform_open() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NoiseSource::gaussian(double sigma) {
  if (sigma == 0.0) return 0.0;
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

SensorReading sense(const ContactForce& force, const SensorModel& model, NoiseSource& noise,
                    std::uint64_t tick) {
  if (!(model.quantization_step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "quantization step must be positive");
  const std::array<double, 3> raw = {force.normal, force.lateral.x(), force.lateral.y()};
  SensorReading r;
  r.step = model.quantization_step;
  r.sigma = model.noise_sigma;
  r.tick = tick;
  for (std::size_t i = 0; i < 3; ++i) {
    const double noisy = raw[i] + noise.gaussian(model.noise_sigma);
    r.counts[i] = static_cast<std::int64_t>(std::llround(noisy / model.quantization_step));
    r.forces[i] = static_cast<double>(r.counts[i]) * model.quantization_step;
  }
  return r;
}

Eigen::VectorXd joint_torques(const kin::KinematicChain& chain, const kin::JointVector& q,
                              const Eigen::Matrix<double, 6, 1>& wrench) {
  return kin::jacobian(chain, q).transpose() * wrench;
}

Proximity proximity(const surface::SurfaceMesh& mesh, const Pose& probe) {
  const auto sp = surface::closest_point(mesh, probe.position);
  if ((sp.point - probe.position).dot(sp.normal) > 0.0) return {Proximity::Kind::Contact, 0.0};
  const Vec3 axis = probe.orientation * Vec3::UnitZ();
  if (auto hit = surface::raycast(mesh, probe.position, axis)) return {Proximity::Kind::Distance, *hit};
  return {Proximity::Kind::Clear, 0.0};
}

}  // namespace ifind::safety
