#include "scenarios.hpp"

#include <cmath>

#include "armid/control/simulate.hpp"
#include "oracles.hpp"

namespace armid::testing {

double horizontal_hold_error(double kg, double seconds) {
  // 2 kg, COM at 0.2 m on a 0.4 m link: 3.92 N*m of gravity load at q = 0.
  const auto chain = pendulum_chain(2.0, 0.2, 0.02, 0.0, 0.05, 0.4);
  auto gains = control::PidGains::defaults(1);
  gains.ki.setZero();
  gains.kg = kg;
  control::Waypoint hold;
  hold.q_target = dyn::VectorJ::Zero(1);
  hold.settle_time = 2.0 * seconds;  // never advance; run to max_time
  hold.max_time = seconds;
  const auto log = control::simulate_trajectory(chain, {hold}, gains);
  return std::abs(log.q.back());
}

}  // namespace armid::testing
