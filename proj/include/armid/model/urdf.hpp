#pragma once

#include <string>
#include <string_view>

#include "armid/model/types.hpp"

namespace armid::model {

/// URDF subset: one <robot>, 7 <link> (base + 6) with <inertial> and a
/// cylinder/box <visual>, 6 revolute <joint> carrying <dynamics damping=
/// (viscous) friction= (Coulomb) armature=>. Numbers use the shortest text
/// that round-trips exactly.
std::string serialize_urdf(const RobotModel& robot);

/// Inverse of serialize_urdf. Throws ParseError on malformed XML,
/// UnsupportedFeatureError on anything outside the subset, and
/// armid::Error(Domain) if the reconstructed model violates invariants.
RobotModel parse_urdf(std::string_view text);

}  // namespace armid::model
