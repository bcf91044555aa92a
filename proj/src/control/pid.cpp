#include "armid/control/pid.hpp"

#include <algorithm>
#include <cmath>

#include "armid/core/error.hpp"

namespace armid::control {

PidGains PidGains::defaults(int dof) {
  PidGains g;
  g.kp = VectorJ::Constant(dof, 80.0);
  g.ki = VectorJ::Constant(dof, 10.0);
  g.kd = VectorJ::Constant(dof, 8.0);
  return g;
}

void PidGains::validate(int dof) const {
  if (kp.size() != dof || ki.size() != dof || kd.size() != dof)
    throw Error(ErrorKind::Config, "PID gain vectors must have one entry per joint");
  auto non_negative = [](const VectorJ& v) { return (v.array() >= 0.0).all() && v.allFinite(); };
  if (!non_negative(kp) || !non_negative(ki) || !non_negative(kd))
    throw Error(ErrorKind::Config, "PID gains must be finite and non-negative");
  if (!(torque_limit >= 0.0) || !(integral_limit >= 0.0) || !std::isfinite(kg))
    throw Error(ErrorKind::Config, "torque_limit and integral_limit must be non-negative");
}

VectorJ gravity_aware_pid(const PidGains& gains, const VectorJ& e, const VectorJ& e_int,
                          const VectorJ& e_dot, const VectorJ& jz) {
  const auto n = e.size();
  VectorJ u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double boost = gains.signed_jacobian ? jz[i] : std::abs(jz[i]);
    const double raw = (gains.kp[i] + gains.kg * boost) * e[i] + gains.ki[i] * e_int[i] + gains.kd[i] * e_dot[i];
    u[i] = std::clamp(raw, -gains.torque_limit, gains.torque_limit);
  }
  return u;
}

void accumulate_integral(const PidGains& gains, const VectorJ& e, double dt, VectorJ& e_int) {
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    e_int[i] += e[i] * dt;
    if (gains.ki[i] > 0.0) {
      const double bound = gains.integral_limit / gains.ki[i];
      e_int[i] = std::clamp(e_int[i], -bound, bound);
    }
  }
}

}  // namespace armid::control
