#include "armid/model/generator.hpp"

#include <cmath>
#include <numbers>

#include "armid/core/error.hpp"
#include "armid/core/rng.hpp"

namespace armid::model {

double link_volume(LinkShape shape, double diameter, double length) {
  return shape == LinkShape::Cylinder ? 0.25 * std::numbers::pi * diameter * diameter * length
                                      : diameter * diameter * length;
}

DiagonalInertia compute_link_inertia(LinkShape shape, double diameter, double length, double mass,
                                     double com_offset, int principal_axis) {
  if (!(mass > 0.0) || !(diameter > 0.0) || !(length >= 0.0) || !std::isfinite(mass) ||
      !std::isfinite(diameter) || !std::isfinite(length) || !std::isfinite(com_offset)) {
    throw Error(ErrorKind::Domain, "link inertia: mass and diameter must be positive, length >= 0");
  }
  if (principal_axis < 0 || principal_axis > 2) {
    throw Error(ErrorKind::Domain, "link inertia: principal axis must be 0, 1 or 2");
  }
  double axial = 0.0;
  double transverse = 0.0;
  const double d2 = diameter * diameter;
  const double l2 = length * length;
  if (shape == LinkShape::Cylinder) {
    const double r2 = 0.25 * d2;
    axial = 0.5 * mass * r2;
    transverse = mass * (3.0 * r2 + l2) / 12.0;
  } else {
    axial = mass * (d2 + d2) / 12.0;
    transverse = mass * (d2 + l2) / 12.0;
  }
  double entries[3] = {transverse, transverse, transverse};
  entries[principal_axis] = axial;
  return {entries[0], entries[1], entries[2]};
}

RobotModel generate_robot(std::uint64_t seed, const KinematicTemplate& kinematics,
                          const VariationRanges& ranges, std::int64_t id) {
  ranges.validate();
  kinematics.validate();

  Rng rng(seed);
  RobotModel robot;
  robot.id = id;
  robot.generation_seed = seed;
  robot.kinematics = kinematics;
  for (int i = 0; i < kDof; ++i) {
    LinkSpec& link = robot.links[i];
    link.shape = ranges.shapes[rng.index(ranges.shapes.size())];
    link.diameter = rng.uniform(ranges.diameter.min, ranges.diameter.max);
    const double density = rng.uniform(ranges.density.min, ranges.density.max);
    link.length = kinematics.links[i].length;
    link.com_offset = rng.uniform(ranges.com_fraction.min, ranges.com_fraction.max) * link.length;
    link.mass = density * link_volume(link.shape, link.diameter, link.length);
    link.inertia = compute_link_inertia(link.shape, link.diameter, link.length, link.mass,
                                        link.com_offset, kinematics.links[i].principal_axis);
  }
  for (int j = 0; j < kDof; ++j) {
    robot.joints[j].mu_c = rng.uniform(ranges.mu_c.min, ranges.mu_c.max);
    robot.joints[j].mu_v = rng.uniform(ranges.mu_v.min, ranges.mu_v.max);
  }
  robot.validate();
  return robot;
}

}  // namespace armid::model
