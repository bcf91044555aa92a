#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "armid/control/pid.hpp"
#include "armid/control/simulate.hpp"
#include "armid/control/trajectory.hpp"
#include "armid/control/waypoints.hpp"
#include "armid/core/error.hpp"
#include "armid/dyn/dynamics.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

namespace armid::control {
namespace {

using testing::random_robot;

VectorJ vec(std::initializer_list<double> v) {
  VectorJ out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(GravityAwarePid, ZeroGravityGainIsPlainPid) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto gains = PidGains::defaults(6);
  gains.kg = 0.0;
  gains.torque_limit = 1e9;
  for (int trial = 0; trial < 200; ++trial) {
    VectorJ e(6), ei(6), ed(6), jz(6);
    for (int j = 0; j < 6; ++j) {
      e[j] = u(gen);
      ei[j] = u(gen);
      ed[j] = u(gen);
      jz[j] = u(gen);
    }
    const VectorJ got = gravity_aware_pid(gains, e, ei, ed, jz);
    for (int j = 0; j < 6; ++j) {
      const double plain = gains.kp[j] * e[j] + gains.ki[j] * ei[j] + gains.kd[j] * ed[j];
      EXPECT_EQ(got[j], plain);
    }
  }
}

TEST(GravityAwarePid, ZeroErrorGivesZeroTorque) {
  const auto z = VectorJ::Zero(6);
  const VectorJ u = gravity_aware_pid(PidGains::defaults(6), z, z, z, vec({1, -1, 2, 0, 3, 1}));
  EXPECT_TRUE(u.isZero(0.0));
}

TEST(GravityAwarePid, GravityTermLinearInJacobian) {
  auto gains = PidGains::defaults(3);
  gains.kp.setZero();
  gains.ki.setZero();
  gains.kd.setZero();
  const VectorJ e = vec({0.1, -0.2, 0.3});
  const VectorJ z = VectorJ::Zero(3);
  const VectorJ jz = vec({0.4, -0.5, 0.25});
  const VectorJ u1 = gravity_aware_pid(gains, e, z, z, jz);
  const VectorJ u2 = gravity_aware_pid(gains, e, z, z, 2.0 * jz);
  for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(u2[j], 2.0 * u1[j]);
  EXPECT_DOUBLE_EQ(u1[1], 40.0 * 0.5 * -0.2);
}

TEST(GravityAwarePid, SignedModeUsesRawJacobian) {
  auto gains = PidGains::defaults(1);
  gains.kp.setZero();
  gains.signed_jacobian = true;
  const VectorJ z = VectorJ::Zero(1);
  EXPECT_DOUBLE_EQ(gravity_aware_pid(gains, vec({0.1}), z, z, vec({-0.5}))[0], 40.0 * -0.5 * 0.1);
  gains.signed_jacobian = false;
  EXPECT_DOUBLE_EQ(gravity_aware_pid(gains, vec({0.1}), z, z, vec({-0.5}))[0], 40.0 * 0.5 * 0.1);
}

TEST(GravityAwarePid, Saturates) {
  const auto gains = PidGains::defaults(2);
  const VectorJ z = VectorJ::Zero(2);
  const VectorJ u = gravity_aware_pid(gains, vec({10.0, -10.0}), z, z, z);
  EXPECT_EQ(u[0], 120.0);
  EXPECT_EQ(u[1], -120.0);
}

TEST(GravityAwarePid, IntegralClamp) {
  auto gains = PidGains::defaults(2);
  gains.integral_limit = 5.0;
  VectorJ ei = VectorJ::Zero(2);
  for (int k = 0; k < 10000; ++k) accumulate_integral(gains, vec({1.0, -1.0}), 1e-3, ei);
  EXPECT_DOUBLE_EQ(gains.ki[0] * ei[0], 5.0);
  EXPECT_DOUBLE_EQ(gains.ki[1] * ei[1], -5.0);
}

TEST(GravityAwarePid, RejectsNegativeGains) {
  auto gains = PidGains::defaults(2);
  gains.kd[1] = -1.0;
  EXPECT_THROW(gains.validate(2), Error);
  EXPECT_THROW(PidGains::defaults(2).validate(3), Error);
}

TEST(SegmentDistance, MatchesDenseSampling) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Vector3d p0(u(gen), u(gen), u(gen)), p1(u(gen), u(gen), u(gen));
    Eigen::Vector3d q0(u(gen), u(gen), u(gen)), q1(u(gen), u(gen), u(gen));
    if (trial % 10 == 0) q1 = q0 + 2.0 * (p1 - p0);  // parallel case
    double brute = 1e9;
    constexpr int kN = 400;
    for (int a = 0; a <= kN; ++a)
      for (int b = 0; b <= kN; ++b) {
        const Eigen::Vector3d x = p0 + (p1 - p0) * (double(a) / kN);
        const Eigen::Vector3d y = q0 + (q1 - q0) * (double(b) / kN);
        brute = std::min(brute, (x - y).norm());
      }
    const double d = segment_distance(p0, p1, q0, q1);
    EXPECT_LE(d, brute + 1e-12);
    EXPECT_NEAR(d, brute, 1e-2);
  }
}

TEST(SampleWaypoints, SixteenClearWaypoints) {
  const auto robot = random_robot(5);
  const auto chain = dyn::make_chain(robot);
  const WaypointSampling opts;
  const auto wps = sample_waypoints(chain, 16, 99, VectorJ::Zero(6), opts);
  ASSERT_EQ(wps.size(), 16u);
  for (const auto& w : wps) {
    Eigen::VectorXd q = w.q_target;
    for (int i = 0; i < 6; ++i) {
      EXPECT_GE(q[i], chain.bodies[i].lower);
      EXPECT_LE(q[i], chain.bodies[i].upper);
      // Independent re-check through the homogeneous-transform FK.
      const auto base = testing::fk_point_homogeneous(chain, q, i + 1, Eigen::Vector3d::Zero());
      const auto tip = testing::fk_point_homogeneous(chain, q, i + 1, chain.bodies[i].tip);
      EXPECT_GT(base.z(), opts.collision.ground_clearance);
      EXPECT_GT(tip.z(), opts.collision.ground_clearance);
    }
    EXPECT_EQ(w.hold_tolerance, 0.02);
    EXPECT_EQ(w.settle_time, 0.2);
    EXPECT_EQ(w.max_time, 4.0);
  }
}

TEST(SampleWaypoints, InterpolatedLegsAreClear) {
  const auto chain = dyn::make_chain(random_robot(6));
  const auto wps = sample_waypoints(chain, 8, 4, VectorJ::Zero(6));
  VectorJ prev = VectorJ::Zero(6);
  for (const auto& w : wps) {
    for (int s = 1; s <= 16; ++s) {
      const VectorJ mid = prev + (w.q_target - prev) * (s / 17.0);
      EXPECT_TRUE(configuration_clear(chain, mid, CollisionModel{}));
    }
    prev = w.q_target;
  }
}

TEST(SampleWaypoints, Deterministic) {
  const auto chain = dyn::make_chain(random_robot(7));
  const auto a = sample_waypoints(chain, 16, 1234, VectorJ::Zero(6));
  const auto b = sample_waypoints(chain, 16, 1234, VectorJ::Zero(6));
  const auto c = sample_waypoints(chain, 16, 1235, VectorJ::Zero(6));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].q_target, b[k].q_target);
  EXPECT_NE(a[0].q_target, c[0].q_target);
}

TEST(SampleWaypoints, InfeasibleWorkspace) {
  const auto chain = dyn::make_chain(random_robot(8));
  WaypointSampling opts;
  opts.collision.ground_clearance = 5.0;
  opts.retry_cap = 50;
  try {
    sample_waypoints(chain, 1, 1, VectorJ::Zero(6), opts);
    FAIL() << "expected InfeasibleWorkspace";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleWorkspace);
  }
  EXPECT_THROW(sample_waypoints(chain, 0, 1, VectorJ::Zero(6)), Error);
}

TEST(SimulateTrajectory, ReachesSingleWaypoint) {
  const auto chain = dyn::make_chain(random_robot(9));
  const auto wps = sample_waypoints(chain, 1, 21, VectorJ::Zero(6));
  const auto log = simulate_trajectory(chain, wps, PidGains::defaults(6));
  EXPECT_EQ(log.status, EpisodeStatus::Ok);
  ASSERT_EQ(log.outcomes.size(), 1u);
  EXPECT_TRUE(log.outcomes[0].settled);
  const auto q = log.q_at(log.frame_count() - 1);
  for (int j = 0; j < 6; ++j) EXPECT_LT(std::abs(wps[0].q_target[j] - q[j]), 0.02);
}

TEST(SimulateTrajectory, UnactuatedArmStillWellFormed) {
  const auto chain = dyn::make_chain(random_robot(10));
  auto gains = PidGains::defaults(6);
  gains.kp.setZero();
  gains.ki.setZero();
  gains.kd.setZero();
  gains.kg = 0.0;
  auto wps = sample_waypoints(chain, 2, 3, VectorJ::Zero(6));
  for (auto& w : wps) w.max_time = 0.5;
  const auto log = simulate_trajectory(chain, wps, gains);
  EXPECT_TRUE(log.status == EpisodeStatus::Ok || log.status == EpisodeStatus::Timeout);
  EXPECT_EQ(log.q.size(), log.frame_count() * 6);
  EXPECT_EQ(log.tau.size(), log.frame_count() * 6);
  for (double t : log.tau) EXPECT_EQ(t, 0.0);
}

TEST(SimulateTrajectory, GravityAwareTermReducesHoldError) {
  const double with = testing::horizontal_hold_error(40.0);
  const double without = testing::horizontal_hold_error(0.0);
  EXPECT_GT(without, 0.0);
  EXPECT_LT(with, without);
}

class EpisodeProperty : public ::testing::TestWithParam<int> {};

TEST_P(EpisodeProperty, ReplayTimestampsAndLimits) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  const auto chain = dyn::make_chain(random_robot(100 + seed));
  const auto wps = sample_waypoints(chain, 3, seed, VectorJ::Zero(6));
  const auto gains = PidGains::defaults(6);
  const auto log = simulate_trajectory(chain, wps, gains);
  ASSERT_GT(log.frame_count(), 0u);

  for (std::size_t f = 0; f < log.frame_count(); ++f)
    EXPECT_EQ(log.time[f], static_cast<double>(f) * log.dt);

  ASSERT_EQ(log.outcomes.size(), wps.size());
  EXPECT_EQ(log.outcomes.front().first_frame, 0u);
  EXPECT_EQ(log.outcomes.back().end_frame, log.frame_count());
  for (std::size_t k = 0; k < log.outcomes.size(); ++k) {
    const auto& o = log.outcomes[k];
    if (k > 0) EXPECT_EQ(o.first_frame, log.outcomes[k - 1].end_frame);
    VectorJ e_int = VectorJ::Zero(6);
    for (auto f = o.first_frame; f < o.end_frame; ++f) {
      const VectorJ q = Eigen::Map<const Eigen::VectorXd>(log.q_at(f).data(), 6);
      const VectorJ qd = Eigen::Map<const Eigen::VectorXd>(log.qd_at(f).data(), 6);
      const VectorJ e = wps[k].q_target - q;
      accumulate_integral(gains, e, log.dt, e_int);
      const VectorJ jz = dyn::end_effector_jacobian(chain, q).row(2).transpose();
      const VectorJ u = gravity_aware_pid(gains, e, e_int, -qd, jz);
      for (int j = 0; j < 6; ++j) ASSERT_EQ(u[j], log.tau_at(f)[j]) << "frame " << f;
    }
  }

  if (log.status == EpisodeStatus::Ok) {
    for (std::size_t f = 0; f < log.frame_count(); ++f)
      for (int j = 0; j < 6; ++j) {
        EXPECT_TRUE(std::isfinite(log.qd_at(f)[j]));
        EXPECT_GE(log.q_at(f)[j], chain.bodies[j].lower - 1e-6);
        EXPECT_LE(log.q_at(f)[j], chain.bodies[j].upper + 1e-6);
      }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EpisodeProperty, ::testing::Range(1, 7));

TrajectoryLog synthetic_log() {
  TrajectoryLog log;
  log.robot_id = 17;
  log.dof = 2;
  Waypoint w;
  w.q_target = vec({0.5, -0.25});
  log.waypoints = {w};
  for (int f = 0; f < 5; ++f) log.append(f * 1e-3, vec({0.1 * f, 0.0}), vec({1.0, -1.0}), vec({2.0, 3.0}));
  log.outcomes = {WaypointOutcome{true, 0, 5}};
  return log;
}

FailureLimits two_joint_limits() {
  FailureLimits l;
  l.lower = vec({-3.0, -3.0});
  l.upper = vec({3.0, 3.0});
  return l;
}

TEST(DetectFailure, Rules) {
  auto log = synthetic_log();
  EXPECT_EQ(detect_failure(log, two_joint_limits()), EpisodeStatus::Ok);

  auto nan_log = log;
  nan_log.tau[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(detect_failure(nan_log, two_joint_limits()), EpisodeStatus::NaNDetected);

  auto fast = log;
  fast.qd[4] = 100.0;
  EXPECT_EQ(detect_failure(fast, two_joint_limits()), EpisodeStatus::Diverged);

  auto breach = log;
  breach.q[0] = 3.5;
  EXPECT_EQ(detect_failure(breach, two_joint_limits()), EpisodeStatus::Diverged);

  auto stuck = log;
  stuck.outcomes[0].settled = false;
  EXPECT_EQ(detect_failure(stuck, two_joint_limits()), EpisodeStatus::Timeout);
}

TEST(TrajectoryFile, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "armid_traj_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "robot_17.traj";
  const auto chain = dyn::make_chain(random_robot(12));
  const auto wps = sample_waypoints(chain, 2, 8, VectorJ::Zero(6));
  const auto log = simulate_trajectory(chain, wps, PidGains::defaults(6), {}, 17);
  write_trajectory(path, log);
  const auto back = read_trajectory(path);
  EXPECT_EQ(back.robot_id, 17);
  EXPECT_EQ(back.dof, 6);
  EXPECT_EQ(back.dt, log.dt);
  EXPECT_EQ(back.status, log.status);
  EXPECT_EQ(back.time, log.time);
  EXPECT_EQ(back.q, log.q);
  EXPECT_EQ(back.qd, log.qd);
  EXPECT_EQ(back.tau, log.tau);
  ASSERT_EQ(back.waypoints.size(), 2u);
  EXPECT_EQ(back.waypoints[1].q_target, wps[1].q_target);
  ASSERT_EQ(back.outcomes.size(), log.outcomes.size());
  EXPECT_EQ(back.outcomes[1].end_frame, log.outcomes[1].end_frame);
  EXPECT_NE(summary_line(log).find("robot 17: status="), std::string::npos);

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(read_trajectory(path), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace armid::control
