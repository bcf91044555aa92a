#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "armid/dyn/chain.hpp"

namespace armid::control {

using dyn::VectorJ;

struct Waypoint {
  VectorJ q_target;
  double hold_tolerance = 0.02;  // rad, infinity norm
  double settle_time = 0.2;      // s
  double max_time = 4.0;         // s
};

enum class EpisodeStatus : std::uint8_t { Ok = 0, NaNDetected = 1, Diverged = 2, Timeout = 3 };

const char* to_string(EpisodeStatus status) noexcept;

/// Which frames were spent on a waypoint and whether it settled.
struct WaypointOutcome {
  bool settled = false;
  std::uint64_t first_frame = 0;
  std::uint64_t end_frame = 0;  // exclusive
};

/// Fixed-step log of one waypoint-following episode. Each frame holds the
/// state at time t and the torque applied over [t, t + dt). Storage is
/// columnar: `q`, `qd`, `tau` are frame-major with `dof` entries per frame.
struct TrajectoryLog {
  std::int64_t robot_id = 0;
  double dt = 1e-3;
  int dof = 0;
  std::vector<double> time;
  std::vector<double> q;
  std::vector<double> qd;
  std::vector<double> tau;
  std::vector<Waypoint> waypoints;
  std::vector<WaypointOutcome> outcomes;
  EpisodeStatus status = EpisodeStatus::Ok;

  std::size_t frame_count() const { return time.size(); }
  std::span<const double> q_at(std::size_t frame) const { return {q.data() + frame * dof, static_cast<std::size_t>(dof)}; }
  std::span<const double> qd_at(std::size_t frame) const { return {qd.data() + frame * dof, static_cast<std::size_t>(dof)}; }
  std::span<const double> tau_at(std::size_t frame) const { return {tau.data() + frame * dof, static_cast<std::size_t>(dof)}; }

  void append(double t, const VectorJ& q_now, const VectorJ& qd_now, const VectorJ& tau_now);
};

/// Binary log file: fixed header (magic, version, dof, robot id, dt, frame
/// count, status, waypoints, outcomes) then contiguous little-endian frames of
/// (t, q[dof], qd[dof], tau[dof]) doubles.
void write_trajectory(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog read_trajectory(const std::filesystem::path& path);

/// One human-readable line per episode.
std::string summary_line(const TrajectoryLog& log);

}  // namespace armid::control
