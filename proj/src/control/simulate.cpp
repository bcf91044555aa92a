#include "armid/control/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "armid/core/error.hpp"
#include "armid/core/rng.hpp"

namespace armid::control {

namespace {

long steps_for(double seconds, double dt) {
  return static_cast<long>(std::ceil(seconds / dt - 1e-9));
}

bool state_out_of_bounds(const VectorJ& q, const VectorJ& qd, const FailureLimits& limits) {
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (!std::isfinite(q[j]) || !std::isfinite(qd[j])) return true;
    if (std::abs(qd[j]) > limits.velocity_ceiling) return true;
    if (q[j] < limits.lower[j] - limits.limit_margin || q[j] > limits.upper[j] + limits.limit_margin) return true;
  }
  return false;
}

}  // namespace

FailureLimits FailureLimits::for_chain(const dyn::Chain& chain) {
  FailureLimits l;
  l.lower.resize(chain.dof());
  l.upper.resize(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    l.lower[j] = chain.bodies[j].lower;
    l.upper[j] = chain.bodies[j].upper;
  }
  return l;
}

TrajectoryLog simulate_trajectory(const dyn::Chain& chain, const std::vector<Waypoint>& waypoints,
                                  const PidGains& gains, const SimulationOptions& options,
                                  std::int64_t robot_id) {
  const int dof = chain.dof();
  gains.validate(dof);
  if (!(options.dt > 0.0)) throw Error(ErrorKind::Domain, "dt must be positive");
  for (const auto& w : waypoints)
    if (w.q_target.size() != dof || !(w.hold_tolerance > 0.0) || !(w.settle_time >= 0.0) || !(w.max_time > 0.0))
      throw Error(ErrorKind::Domain, "malformed waypoint");

  FailureLimits limits = options.limits;
  if (limits.lower.size() != dof || limits.upper.size() != dof) {
    const auto from_chain = FailureLimits::for_chain(chain);
    limits.lower = from_chain.lower;
    limits.upper = from_chain.upper;
  }

  dyn::JointState state = options.start;
  if (state.q.size() != dof) {
    state.q = VectorJ::Zero(dof);
    for (int j = 0; j < dof; ++j) state.q[j] = std::clamp(0.0, chain.bodies[j].lower, chain.bodies[j].upper);
  }
  if (state.qd.size() != dof) state.qd = VectorJ::Zero(dof);

  TrajectoryLog log;
  log.robot_id = robot_id;
  log.dt = options.dt;
  log.dof = dof;
  log.waypoints = waypoints;

  Rng noise(options.noise_seed);
  const double dt = options.dt;
  VectorJ e_int = VectorJ::Zero(dof);
  VectorJ q_meas(dof);
  VectorJ qd_meas(dof);
  std::uint64_t frame = 0;
  bool dynamics_failed = false;
  bool aborted = false;

  for (std::size_t wp = 0; wp < waypoints.size() && !aborted; ++wp) {
    const Waypoint& target = waypoints[wp];
    const long settle_steps = steps_for(target.settle_time, dt);
    const long max_steps = steps_for(target.max_time, dt);
    WaypointOutcome outcome;
    outcome.first_frame = frame;
    e_int.setZero();
    long in_tolerance = 0;

    for (long k = 0;; ++k) {
      q_meas = state.q;
      qd_meas = state.qd;
      if (options.sensor_noise > 0.0) {
        for (int j = 0; j < dof; ++j) {
          q_meas[j] += options.sensor_noise * noise.normal();
          qd_meas[j] += options.sensor_noise * noise.normal();
        }
      }
      const VectorJ e = target.q_target - q_meas;
      in_tolerance = e.cwiseAbs().maxCoeff() < target.hold_tolerance ? in_tolerance + 1 : 0;
      if (in_tolerance > settle_steps) {
        outcome.settled = true;
        break;
      }
      if (k >= max_steps) break;

      accumulate_integral(gains, e, dt, e_int);
      const VectorJ jz = dyn::end_effector_jacobian(chain, q_meas).row(2).transpose();
      const VectorJ u = gravity_aware_pid(gains, e, e_int, -qd_meas, jz);
      log.append(static_cast<double>(frame) * dt, q_meas, qd_meas, u);
      ++frame;
      if (state_out_of_bounds(state.q, state.qd, limits) || !u.allFinite()) {
        aborted = true;
        break;
      }
      try {
        state = dyn::step(chain, state, u, dt, options.friction);
      } catch (const Error&) {
        dynamics_failed = true;
        aborted = true;
        break;
      }
    }
    outcome.end_frame = frame;
    log.outcomes.push_back(outcome);
  }

  log.status = detect_failure(log, limits);
  if (dynamics_failed && log.status != EpisodeStatus::NaNDetected) log.status = EpisodeStatus::Diverged;
  return log;
}

EpisodeStatus detect_failure(const TrajectoryLog& log, const FailureLimits& limits) {
  for (double v : log.time)
    if (!std::isfinite(v)) return EpisodeStatus::NaNDetected;
  for (const auto* column : {&log.q, &log.qd, &log.tau})
    for (double v : *column)
      if (!std::isfinite(v)) return EpisodeStatus::NaNDetected;

  const std::size_t d = static_cast<std::size_t>(log.dof);
  const bool has_limits = limits.lower.size() == log.dof && limits.upper.size() == log.dof;
  for (std::size_t f = 0; f < log.frame_count(); ++f) {
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(log.qd[f * d + j]) > limits.velocity_ceiling) return EpisodeStatus::Diverged;
      if (has_limits) {
        const double q = log.q[f * d + j];
        if (q < limits.lower[j] - limits.limit_margin || q > limits.upper[j] + limits.limit_margin)
          return EpisodeStatus::Diverged;
      }
    }
  }

  if (!log.outcomes.empty()) {
    bool any_settled = false;
    for (const auto& o : log.outcomes) any_settled = any_settled || o.settled;
    if (!any_settled) return EpisodeStatus::Timeout;
  }
  return EpisodeStatus::Ok;
}

}  // namespace armid::control
