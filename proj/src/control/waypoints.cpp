#include "armid/control/waypoints.hpp"

#include <algorithm>
#include <string>

#include "armid/core/error.hpp"
#include "armid/core/rng.hpp"
#include "armid/dyn/dynamics.hpp"

namespace armid::control {

double segment_distance(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                        const Eigen::Vector3d& q0, const Eigen::Vector3d& q1) {
  const Eigen::Vector3d d1 = p1 - p0;
  const Eigen::Vector3d d2 = q1 - q0;
  const Eigen::Vector3d r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double kTiny = 1e-18;
  double s = 0.0;
  double t = 0.0;
  if (a <= kTiny && e <= kTiny) return r.norm();
  if (a <= kTiny) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kTiny) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kTiny ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

bool configuration_clear(const dyn::Chain& chain, const VectorJ& q, const CollisionModel& collision) {
  const auto poses = dyn::forward_kinematics(chain, q);
  const int n = chain.dof();
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> segments(n);
  for (int i = 0; i < n; ++i) {
    const auto& pose = poses[i + 1];
    segments[i] = {pose.translation, pose.translation + pose.rotation * chain.bodies[i].tip};
    if (segments[i].first.z() <= collision.ground_clearance ||
        segments[i].second.z() <= collision.ground_clearance)
      return false;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (segment_distance(segments[i].first, segments[i].second, segments[j].first, segments[j].second) <=
          collision.self_distance)
        return false;
  return true;
}

std::vector<Waypoint> sample_waypoints(const dyn::Chain& chain, int n, std::uint64_t seed,
                                       const VectorJ& start, const WaypointSampling& options) {
  if (n < 1) throw Error(ErrorKind::Domain, "sample_waypoints needs n >= 1");
  const int dof = chain.dof();
  if (start.size() != dof) throw Error(ErrorKind::Domain, "start configuration has wrong size");

  Rng rng(seed);
  std::vector<Waypoint> out;
  out.reserve(static_cast<std::size_t>(n));
  VectorJ previous = start;
  VectorJ candidate(dof);
  VectorJ mid(dof);

  for (int k = 0; k < n; ++k) {
    bool accepted = false;
    for (int attempt = 0; attempt < options.retry_cap && !accepted; ++attempt) {
      for (int j = 0; j < dof; ++j) {
        const auto& b = chain.bodies[j];
        const double lo = std::max(b.lower + options.joint_margin, -3.0 * M_PI);
        const double hi = std::min(b.upper - options.joint_margin, 3.0 * M_PI);
        candidate[j] = rng.uniform(lo, std::max(lo, hi));
      }
      if (!configuration_clear(chain, candidate, options.collision)) continue;
      bool leg_clear = true;
      for (int s = 1; s <= options.interpolation_checks && leg_clear; ++s) {
        const double alpha = static_cast<double>(s) / (options.interpolation_checks + 1);
        mid = previous + alpha * (candidate - previous);
        leg_clear = configuration_clear(chain, mid, options.collision);
      }
      accepted = leg_clear;
    }
    if (!accepted)
      throw Error(ErrorKind::InfeasibleWorkspace,
                  "no collision-free waypoint after " + std::to_string(options.retry_cap) + " candidates");
    Waypoint w;
    w.q_target = candidate;
    w.hold_tolerance = options.hold_tolerance;
    w.settle_time = options.settle_time;
    w.max_time = options.max_time;
    out.push_back(w);
    previous = candidate;
  }
  return out;
}

}  // namespace armid::control
