#include "armid/dyn/dynamics.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "armid/core/error.hpp"

namespace armid::dyn {

namespace {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

// Child-to-parent rotation of body i at joint angle qi.
Eigen::Matrix3d joint_rotation(const Body& b, double qi) {
  return b.origin_rotation * Eigen::AngleAxisd(qi, b.axis).toRotationMatrix();
}

void check_size(const Chain& chain, const VectorJ& v, const char* what) {
  if (v.size() != chain.dof()) {
    throw Error(ErrorKind::Contract, std::string(what) + " has wrong dimension");
  }
}

// Spatial inertia about the body origin, [angular; linear] convention.
Matrix6 spatial_inertia(const Body& b) {
  const Eigen::Matrix3d cx = skew(b.com);
  Matrix6 out;
  out.topLeftCorner<3, 3>() = b.inertia + b.mass * cx * cx.transpose();
  out.topRightCorner<3, 3>() = b.mass * cx;
  out.bottomLeftCorner<3, 3>() = b.mass * cx.transpose();
  out.bottomRightCorner<3, 3>() = b.mass * Eigen::Matrix3d::Identity();
  return out;
}

// Motion transform from the parent frame to the child frame.
Matrix6 motion_transform(const Eigen::Matrix3d& child_to_parent, const Eigen::Vector3d& p) {
  const Eigen::Matrix3d e = child_to_parent.transpose();
  Matrix6 x = Matrix6::Zero();
  x.topLeftCorner<3, 3>() = e;
  x.bottomLeftCorner<3, 3>() = -e * skew(p);
  x.bottomRightCorner<3, 3>() = e;
  return x;
}

}  // namespace

std::vector<LinkPose> forward_kinematics(const Chain& chain, const VectorJ& q) {
  check_size(chain, q, "q");
  std::vector<LinkPose> poses(chain.dof() + 1);
  for (int i = 0; i < chain.dof(); ++i) {
    const Body& b = chain.bodies[i];
    const LinkPose& parent = poses[i];
    poses[i + 1].translation = parent.translation + parent.rotation * b.origin_translation;
    poses[i + 1].rotation = parent.rotation * joint_rotation(b, q[i]);
  }
  return poses;
}

Jacobian point_jacobian(const Chain& chain, const VectorJ& q, int frame_index,
                        const Eigen::Vector3d& point) {
  if (frame_index < 0 || frame_index > chain.dof()) {
    throw Error(ErrorKind::Contract, "jacobian: frame index out of range");
  }
  Jacobian jac = Jacobian::Zero(6, chain.dof());
  if (frame_index == 0) return jac;
  const auto poses = forward_kinematics(chain, q);
  const Eigen::Vector3d target =
      poses[frame_index].translation + poses[frame_index].rotation * point;
  for (int j = 0; j < frame_index; ++j) {
    const Eigen::Vector3d z = poses[j + 1].rotation * chain.bodies[j].axis;
    jac.col(j).head<3>() = z.cross(target - poses[j + 1].translation);
    jac.col(j).tail<3>() = z;
  }
  return jac;
}

Jacobian jacobian(const Chain& chain, const VectorJ& q, int frame_index) {
  return point_jacobian(chain, q, frame_index, Eigen::Vector3d::Zero());
}

Jacobian end_effector_jacobian(const Chain& chain, const VectorJ& q) {
  return point_jacobian(chain, q, chain.dof(), chain.bodies.back().tip);
}

MatrixJ mass_matrix(const Chain& chain, const VectorJ& q) {
  check_size(chain, q, "q");
  const int n = chain.dof();
  Matrix6 composite[kMaxDof];
  Matrix6 xform[kMaxDof];
  for (int i = 0; i < n; ++i) {
    const Body& b = chain.bodies[i];
    composite[i] = spatial_inertia(b);
    xform[i] = motion_transform(joint_rotation(b, q[i]), b.origin_translation);
  }
  for (int i = n - 1; i > 0; --i) {
    composite[i - 1] += xform[i].transpose() * composite[i] * xform[i];
  }
  MatrixJ m(n, n);
  for (int i = 0; i < n; ++i) {
    Vector6 s = Vector6::Zero();
    s.head<3>() = chain.bodies[i].axis;
    Vector6 f = composite[i] * s;
    m(i, i) = s.dot(f) + chain.bodies[i].armature;
    for (int j = i; j > 0; --j) {
      f = xform[j].transpose() * f;
      Vector6 sj = Vector6::Zero();
      sj.head<3>() = chain.bodies[j - 1].axis;
      m(i, j - 1) = m(j - 1, i) = sj.dot(f);
    }
  }
  return m;
}

VectorJ inverse_dynamics(const Chain& chain, const VectorJ& q, const VectorJ& qd,
                         const VectorJ& qdd, const Eigen::Vector3d& gravity) {
  check_size(chain, q, "q");
  check_size(chain, qd, "qd");
  check_size(chain, qdd, "qdd");
  const int n = chain.dof();

  Eigen::Matrix3d rot[kMaxDof];
  Eigen::Vector3d force[kMaxDof];
  Eigen::Vector3d moment[kMaxDof];

  // Outward pass in body coordinates; base acceleration -g carries gravity.
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_dot = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = -gravity;
  for (int i = 0; i < n; ++i) {
    const Body& b = chain.bodies[i];
    rot[i] = joint_rotation(b, q[i]);
    const Eigen::Matrix3d to_child = rot[i].transpose();
    const Eigen::Vector3d& p = b.origin_translation;

    const Eigen::Vector3d accel_child =
        to_child * (accel + omega_dot.cross(p) + omega.cross(omega.cross(p)));
    const Eigen::Vector3d omega_parent = to_child * omega;
    const Eigen::Vector3d omega_child = omega_parent + b.axis * qd[i];
    const Eigen::Vector3d omega_dot_child =
        to_child * omega_dot + b.axis * qdd[i] + omega_parent.cross(b.axis * qd[i]);

    const Eigen::Vector3d accel_com = accel_child + omega_dot_child.cross(b.com) +
                                      omega_child.cross(omega_child.cross(b.com));
    force[i] = b.mass * accel_com;
    moment[i] = b.inertia * omega_dot_child + omega_child.cross(b.inertia * omega_child) +
                b.com.cross(force[i]);

    omega = omega_child;
    omega_dot = omega_dot_child;
    accel = accel_child;
  }

  // Inward pass: moments about each body origin.
  VectorJ tau(n);
  for (int i = n - 1; i >= 0; --i) {
    if (i + 1 < n) {
      const Eigen::Vector3d f_child = rot[i + 1] * force[i + 1];
      force[i] += f_child;
      moment[i] += rot[i + 1] * moment[i + 1] +
                   chain.bodies[i + 1].origin_translation.cross(f_child);
    }
    tau[i] = chain.bodies[i].axis.dot(moment[i]) + chain.bodies[i].armature * qdd[i];
  }
  return tau;
}

VectorJ inverse_dynamics(const Chain& chain, const VectorJ& q, const VectorJ& qd, const VectorJ& qdd) {
  return inverse_dynamics(chain, q, qd, qdd, chain.gravity);
}

VectorJ gravity_torques(const Chain& chain, const VectorJ& q) {
  const VectorJ zero = VectorJ::Zero(chain.dof());
  return inverse_dynamics(chain, q, zero, zero, chain.gravity);
}

VectorJ bias_forces(const Chain& chain, const VectorJ& q, const VectorJ& qd) {
  return inverse_dynamics(chain, q, qd, VectorJ::Zero(chain.dof()), chain.gravity);
}

DynTerms dynamics_terms(const Chain& chain, const VectorJ& q, const VectorJ& qd) {
  return {mass_matrix(chain, q), bias_forces(chain, q, qd), gravity_torques(chain, q)};
}

double smooth_sign(double v) { return std::tanh(v / kFrictionEpsilon); }

double friction_torque(double mu_c, double mu_v, double qd) {
  return mu_c * smooth_sign(qd) + mu_v * qd;
}

double friction_torque(const model::JointSpec& joint, double qd) {
  return friction_torque(joint.mu_c, joint.mu_v, qd);
}

VectorJ friction_torques(const Chain& chain, const VectorJ& qd) {
  check_size(chain, qd, "qd");
  VectorJ f(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    f[i] = friction_torque(chain.bodies[i].mu_c, chain.bodies[i].mu_v, qd[i]);
  }
  return f;
}

namespace {

VectorJ spd_solve(const MatrixJ& a, const VectorJ& b) {
  Eigen::LLT<MatrixJ> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::IllConditioned, "mass matrix is not positive definite");
  }
  VectorJ x = llt.solve(b);
  if (!x.allFinite()) throw Error(ErrorKind::IllConditioned, "non-finite solution of M x = b");
  return x;
}

}  // namespace

VectorJ forward_dynamics(const Chain& chain, const JointState& state, const VectorJ& tau) {
  check_size(chain, tau, "tau");
  const MatrixJ m = mass_matrix(chain, state.q);
  const VectorJ rhs = tau - bias_forces(chain, state.q, state.qd) - friction_torques(chain, state.qd);
  return spd_solve(m, rhs);
}

JointState step(const Chain& chain, const JointState& state, const VectorJ& tau, double dt,
                FrictionTreatment friction) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "step: dt must be positive");
  const int n = chain.dof();
  VectorJ qdd;
  if (friction == FrictionTreatment::Explicit) {
    qdd = forward_dynamics(chain, state, tau);
  } else {
    check_size(chain, tau, "tau");
    MatrixJ a = mass_matrix(chain, state.q);
    for (int i = 0; i < n; ++i) {
      const Body& b = chain.bodies[i];
      const double c = std::cosh(state.qd[i] / kFrictionEpsilon);
      const double slope = (std::isfinite(c) ? b.mu_c / (kFrictionEpsilon * c * c) : 0.0) + b.mu_v;
      a(i, i) += dt * slope;
    }
    const VectorJ rhs =
        tau - bias_forces(chain, state.q, state.qd) - friction_torques(chain, state.qd);
    qdd = spd_solve(a, rhs);
  }
  JointState next;
  next.qd = state.qd + dt * qdd;
  next.q = state.q + dt * next.qd;
  for (int i = 0; i < n; ++i) {
    const Body& b = chain.bodies[i];
    if (next.q[i] < b.lower) {
      next.q[i] = b.lower;
      next.qd[i] = 0.0;
    } else if (next.q[i] > b.upper) {
      next.q[i] = b.upper;
      next.qd[i] = 0.0;
    }
  }
  return next;
}

double kinetic_energy(const Chain& chain, const JointState& state) {
  return 0.5 * state.qd.dot(mass_matrix(chain, state.q) * state.qd);
}

double potential_energy(const Chain& chain, const VectorJ& q) {
  const auto poses = forward_kinematics(chain, q);
  double v = 0.0;
  for (int i = 0; i < chain.dof(); ++i) {
    const Body& b = chain.bodies[i];
    const Eigen::Vector3d com = poses[i + 1].translation + poses[i + 1].rotation * b.com;
    v -= b.mass * chain.gravity.dot(com);
  }
  return v;
}

}  // namespace armid::dyn
