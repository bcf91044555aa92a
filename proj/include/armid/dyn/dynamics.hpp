#pragma once

#include <vector>

#include "armid/dyn/chain.hpp"
#include "armid/model/types.hpp"

namespace armid::dyn {

struct JointState {
  VectorJ q;
  VectorJ qd;
};

struct LinkPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct DynTerms {
  MatrixJ mass;      // M(q)
  VectorJ bias;      // C(q, qd) qd + G(q)
  VectorJ gravity;   // G(q)
};

/// World poses of the base (index 0) and every body (1..n).
std::vector<LinkPose> forward_kinematics(const Chain& chain, const VectorJ& q);

/// Geometric Jacobian of a frame origin; rows are [linear xyz; angular xyz].
/// frame_index 0 is the fixed base and yields a zero matrix.
Jacobian jacobian(const Chain& chain, const VectorJ& q, int frame_index);

/// Geometric Jacobian of a point fixed in frame `frame_index`.
Jacobian point_jacobian(const Chain& chain, const VectorJ& q, int frame_index,
                        const Eigen::Vector3d& point);

/// Jacobian of the distal tip of the last link (the tool point).
Jacobian end_effector_jacobian(const Chain& chain, const VectorJ& q);

/// Joint-space inertia by the composite-rigid-body algorithm (includes armature).
MatrixJ mass_matrix(const Chain& chain, const VectorJ& q);

/// Recursive Newton-Euler: M qdd + C qd + G for the given gravity. Friction excluded.
VectorJ inverse_dynamics(const Chain& chain, const VectorJ& q, const VectorJ& qd,
                         const VectorJ& qdd, const Eigen::Vector3d& gravity);
VectorJ inverse_dynamics(const Chain& chain, const VectorJ& q, const VectorJ& qd, const VectorJ& qdd);

VectorJ gravity_torques(const Chain& chain, const VectorJ& q);
VectorJ bias_forces(const Chain& chain, const VectorJ& q, const VectorJ& qd);
DynTerms dynamics_terms(const Chain& chain, const VectorJ& q, const VectorJ& qd);

/// Width of the tanh used in place of sign(qd), rad/s.
inline constexpr double kFrictionEpsilon = 1e-3;

double smooth_sign(double v);

/// mu_c * smooth_sign(qd) + mu_v * qd.
double friction_torque(const model::JointSpec& joint, double qd);
double friction_torque(double mu_c, double mu_v, double qd);
VectorJ friction_torques(const Chain& chain, const VectorJ& qd);

/// qdd = M^-1 (tau - bias - friction) via Cholesky. Throws
/// armid::Error(IllConditioned) when M is not positive definite.
VectorJ forward_dynamics(const Chain& chain, const JointState& state, const VectorJ& tau);

enum class FrictionTreatment {
  // Friction evaluated at the start-of-step velocity.
  Explicit,
  // Friction linearized around the start-of-step velocity and solved with
  // the velocity update; stable for stiff tanh friction at 1 kHz.
  LinearImplicit,
};

/// Semi-implicit Euler: qd += dt * qdd, q += dt * qd, then joint-limit
/// clamping (clamped joints get zero velocity).
JointState step(const Chain& chain, const JointState& state, const VectorJ& tau, double dt,
                FrictionTreatment friction = FrictionTreatment::LinearImplicit);

double kinetic_energy(const Chain& chain, const JointState& state);
double potential_energy(const Chain& chain, const VectorJ& q);

}  // namespace armid::dyn
