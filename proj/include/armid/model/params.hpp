#pragma once

#include <array>
#include <string>
#include <vector>

#include "armid/model/types.hpp"

namespace armid::model {

/// Identifiable parameter layout, version 1:
///   mu_c[J0..J5], mu_v[J0..J5], mass[L2..L6], com[L2..L6], Izz[L1],
///   (Ixx, Iyy, Izz)[L2..L6]
/// Links are numbered L1..L6 from the base; joints J0..J5.
inline constexpr int kParamCount = 38;
inline constexpr int kParamLayoutVersion = 1;

enum class ParamGroup { Coulomb, Viscous, Mass, Com, Inertia };

struct ParamInfo {
  std::string name;    // e.g. "mu_c.J0", "mass.L2", "Ixx.L3"
  ParamGroup group;
  int index;           // joint index (0..5) or link number (1..6)
  int axis = -1;       // 0/1/2 for inertia entries, -1 otherwise
};

const std::vector<ParamInfo>& param_layout();
const char* to_string(ParamGroup group) noexcept;

using RawParams = std::array<double, kParamCount>;

/// Ground-truth raw parameter values of one robot.
RawParams extract_params(const RobotModel& robot);

/// Per-parameter [min, max] implied by the ranges and the template (used for
/// min-max normalization). Every generated robot's values lie inside.
std::array<Interval, kParamCount> param_bounds(const VariationRanges& ranges,
                                               const KinematicTemplate& kinematics);

}  // namespace armid::model
