#include "armid/model/params.hpp"

#include <algorithm>
#include <limits>

#include "armid/model/generator.hpp"

namespace armid::model {

namespace {

std::vector<ParamInfo> build_layout() {
  std::vector<ParamInfo> out;
  out.reserve(kParamCount);
  for (int j = 0; j < kDof; ++j) out.push_back({"mu_c.J" + std::to_string(j), ParamGroup::Coulomb, j});
  for (int j = 0; j < kDof; ++j) out.push_back({"mu_v.J" + std::to_string(j), ParamGroup::Viscous, j});
  for (int l = 2; l <= kDof; ++l) out.push_back({"mass.L" + std::to_string(l), ParamGroup::Mass, l});
  for (int l = 2; l <= kDof; ++l) out.push_back({"com.L" + std::to_string(l), ParamGroup::Com, l});
  out.push_back({"Izz.L1", ParamGroup::Inertia, 1, 2});
  static const char* kAxis[3] = {"Ixx", "Iyy", "Izz"};
  for (int l = 2; l <= kDof; ++l) {
    for (int a = 0; a < 3; ++a) {
      out.push_back({std::string(kAxis[a]) + ".L" + std::to_string(l), ParamGroup::Inertia, l, a});
    }
  }
  return out;
}

}  // namespace

const std::vector<ParamInfo>& param_layout() {
  static const std::vector<ParamInfo> layout = build_layout();
  return layout;
}

const char* to_string(ParamGroup group) noexcept {
  switch (group) {
    case ParamGroup::Coulomb: return "coulomb";
    case ParamGroup::Viscous: return "viscous";
    case ParamGroup::Mass: return "mass";
    case ParamGroup::Com: return "com";
    case ParamGroup::Inertia: return "inertia";
  }
  return "?";
}

RawParams extract_params(const RobotModel& robot) {
  RawParams out{};
  const auto& layout = param_layout();
  for (int k = 0; k < kParamCount; ++k) {
    const ParamInfo& p = layout[k];
    switch (p.group) {
      case ParamGroup::Coulomb: out[k] = robot.joints[p.index].mu_c; break;
      case ParamGroup::Viscous: out[k] = robot.joints[p.index].mu_v; break;
      case ParamGroup::Mass: out[k] = robot.links[p.index - 1].mass; break;
      case ParamGroup::Com: out[k] = robot.links[p.index - 1].com_offset; break;
      case ParamGroup::Inertia: out[k] = robot.links[p.index - 1].inertia[p.axis]; break;
    }
  }
  return out;
}

std::array<Interval, kParamCount> param_bounds(const VariationRanges& ranges,
                                               const KinematicTemplate& kinematics) {
  ranges.validate();
  std::array<Interval, kParamCount> out{};
  const auto& layout = param_layout();

  // Mass and inertia are increasing in density and diameter, so the extremes
  // sit at the range corners; the shape is chosen per corner.
  auto mass_at = [&](LinkShape s, double rho, double d, double len) {
    return rho * link_volume(s, d, len);
  };
  auto extreme = [&](int link, bool want_max, auto&& value_of) {
    double best = want_max ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    const double rho = want_max ? ranges.density.max : ranges.density.min;
    const double d = want_max ? ranges.diameter.max : ranges.diameter.min;
    const double len = kinematics.links[link - 1].length;
    for (LinkShape s : ranges.shapes) {
      const double v = value_of(s, mass_at(s, rho, d, len), d, len);
      best = want_max ? std::max(best, v) : std::min(best, v);
    }
    return best;
  };

  for (int k = 0; k < kParamCount; ++k) {
    const ParamInfo& p = layout[k];
    switch (p.group) {
      case ParamGroup::Coulomb: out[k] = ranges.mu_c; break;
      case ParamGroup::Viscous: out[k] = ranges.mu_v; break;
      case ParamGroup::Mass: {
        auto mass_of = [](LinkShape, double m, double, double) { return m; };
        out[k] = {extreme(p.index, false, mass_of), extreme(p.index, true, mass_of)};
        break;
      }
      case ParamGroup::Com: {
        const double len = kinematics.links[p.index - 1].length;
        out[k] = {ranges.com_fraction.min * len, ranges.com_fraction.max * len};
        break;
      }
      case ParamGroup::Inertia: {
        const int principal = kinematics.links[p.index - 1].principal_axis;
        const int axis = p.axis;
        auto inertia_of = [principal, axis](LinkShape s, double m, double d, double len) {
          return compute_link_inertia(s, d, len, m, 0.0, principal)[axis];
        };
        out[k] = {extreme(p.index, false, inertia_of), extreme(p.index, true, inertia_of)};
        break;
      }
    }
  }
  return out;
}

}  // namespace armid::model
