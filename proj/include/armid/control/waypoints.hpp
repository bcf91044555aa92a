#pragma once

#include <cstdint>
#include <vector>

#include "armid/control/trajectory.hpp"
#include "armid/dyn/chain.hpp"

namespace armid::control {

/// Collision proxy: ground plane plus segment-to-segment distances between
/// non-adjacent links.
struct CollisionModel {
  double ground_clearance = 0.02;   // m, every link segment endpoint above z = this
  double self_distance = 0.01;      // m, min distance between non-adjacent link segments
};

struct WaypointSampling {
  CollisionModel collision;
  int interpolation_checks = 16;    // intermediate configurations per leg
  int retry_cap = 1000;             // candidates per waypoint
  double joint_margin = 0.05;       // rad kept away from each limit
  double hold_tolerance = 0.02;
  double settle_time = 0.2;
  double max_time = 4.0;
};

bool configuration_clear(const dyn::Chain& chain, const VectorJ& q, const CollisionModel& collision);

/// Minimum distance between segments [p0, p1] and [q0, q1].
double segment_distance(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                        const Eigen::Vector3d& q0, const Eigen::Vector3d& q1);

/// Draws `n` collision-free joint-space waypoints. Each leg (from `start`, then
/// between consecutive waypoints) is checked at interpolation_checks interior
/// points. Throws armid::Error(InfeasibleWorkspace) when retry_cap is exceeded.
std::vector<Waypoint> sample_waypoints(const dyn::Chain& chain, int n, std::uint64_t seed,
                                       const VectorJ& start, const WaypointSampling& options = {});

}  // namespace armid::control
