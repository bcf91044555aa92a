#pragma once

#include <cstdint>

#include "armid/model/types.hpp"

namespace armid::model {

/// COM-frame principal inertia of a solid link whose principal axis is
/// `principal_axis`. The COM offset does not enter the COM-frame tensor.
/// Throws armid::Error(Domain) on non-positive geometry or mass.
DiagonalInertia compute_link_inertia(LinkShape shape, double diameter, double length, double mass,
                                     double com_offset, int principal_axis = 2);

/// Solid volume of a link of the given shape.
double link_volume(LinkShape shape, double diameter, double length);

/// Draws the varied properties uniformly from `ranges` with a PRNG seeded by
/// `seed`; kinematics are copied from `kinematics` unchanged.
RobotModel generate_robot(std::uint64_t seed, const KinematicTemplate& kinematics,
                          const VariationRanges& ranges, std::int64_t id = 0);

}  // namespace armid::model
