#pragma once

#include <vector>

#include "armid/control/pid.hpp"
#include "armid/control/trajectory.hpp"
#include "armid/dyn/dynamics.hpp"

namespace armid::control {

struct FailureLimits {
  double velocity_ceiling = 50.0;  // rad/s
  double limit_margin = 1e-6;      // rad beyond the joint limits
  VectorJ lower;
  VectorJ upper;

  static FailureLimits for_chain(const dyn::Chain& chain);
};

struct SimulationOptions {
  double dt = 1e-3;
  dyn::JointState start;           // defaults to rest at q = 0 (clamped to limits)
  dyn::FrictionTreatment friction = dyn::FrictionTreatment::LinearImplicit;
  double sensor_noise = 0.0;       // std-dev of noise added to logged q/qd; off by default
  std::uint64_t noise_seed = 0;
  FailureLimits limits;            // empty lower/upper: taken from the chain
};

/// Runs the closed loop at fixed dt until every waypoint has settled or timed
/// out. Dynamics errors end the episode and surface through `status`.
TrajectoryLog simulate_trajectory(const dyn::Chain& chain, const std::vector<Waypoint>& waypoints,
                                  const PidGains& gains, const SimulationOptions& options = {},
                                  std::int64_t robot_id = 0);

/// NaNDetected, then Diverged (velocity ceiling or limit breach), then Timeout
/// (no waypoint settled), else Ok.
EpisodeStatus detect_failure(const TrajectoryLog& log, const FailureLimits& limits);

}  // namespace armid::control
