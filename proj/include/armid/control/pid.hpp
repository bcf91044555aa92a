#pragma once

#include "armid/dyn/chain.hpp"

namespace armid::control {

using dyn::VectorJ;

/// Per-joint PID gains plus the gravity-aware proportional boost.
struct PidGains {
  VectorJ kp;
  VectorJ ki;
  VectorJ kd;
  double kg = 40.0;               // gain on |dz/dq_i| of the tool point
  double integral_limit = 0.8;    // anti-windup bound on |ki * e_int|, N*m (kp * tol / 2)
  double torque_limit = 120.0;    // output saturation, N*m
  bool signed_jacobian = false;   // use dz/dq_i instead of |dz/dq_i|

  static PidGains defaults(int dof);
  void validate(int dof) const;
};

/// u_i = (kp_i + kg |jz_i|) e_i + ki_i e_int_i + kd_i e_dot_i, saturated to
/// +-torque_limit. With signed_jacobian the boost uses jz_i directly.
VectorJ gravity_aware_pid(const PidGains& gains, const VectorJ& e, const VectorJ& e_int,
                          const VectorJ& e_dot, const VectorJ& jz);

/// Integrates e into e_int and clamps each entry so |ki_i e_int_i| <= integral_limit.
void accumulate_integral(const PidGains& gains, const VectorJ& e, double dt, VectorJ& e_int);

}  // namespace armid::control
