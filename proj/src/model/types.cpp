#include "armid/model/types.hpp"

#include <cmath>
#include <string>

#include "armid/core/error.hpp"

namespace armid::model {

namespace {

void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const char* to_string(LinkShape shape) noexcept {
  return shape == LinkShape::Cylinder ? "cylinder" : "box";
}

void KinematicTemplate::validate() const {
  for (int j = 0; j < kDof; ++j) {
    const auto& jt = joints[j];
    const std::string tag = "joint " + std::to_string(j);
    require(jt.axis.allFinite() && std::abs(jt.axis.norm() - 1.0) <= 1e-9, ErrorKind::Domain,
            tag + ": axis must be a unit vector");
    require(jt.origin_xyz.allFinite() && jt.origin_rpy.allFinite(), ErrorKind::Domain,
            tag + ": non-finite origin");
    require(finite(jt.lower) && finite(jt.upper) && jt.lower < jt.upper, ErrorKind::Domain,
            tag + ": limits must satisfy lower < upper");
    require(finite(jt.armature) && jt.armature >= 0.0, ErrorKind::Domain,
            tag + ": armature must be >= 0");
    const auto& lt = links[j];
    require(finite(lt.length) && lt.length > 0.0, ErrorKind::Domain,
            "link " + std::to_string(j + 1) + ": length must be positive");
    require(lt.principal_axis >= 0 && lt.principal_axis <= 2, ErrorKind::Domain,
            "link " + std::to_string(j + 1) + ": principal axis must be 0, 1 or 2");
  }
}

KinematicTemplate KinematicTemplate::anthropomorphic() {
  KinematicTemplate t;
  struct Row {
    Eigen::Vector3d axis;
    double z_offset, lower, upper, armature, length;
  };
  const Row rows[kDof] = {
      {Eigen::Vector3d::UnitZ(), 0.050, -3.1, 3.1, 0.2, 0.050},
      {Eigen::Vector3d::UnitY(), 0.050, -1.6, 1.6, 0.2, 0.080},
      {Eigen::Vector3d::UnitY(), 0.080, -2.4, 2.4, 0.1, 0.070},
      {Eigen::Vector3d::UnitZ(), 0.070, -3.0, 3.0, 0.02, 0.025},
      {Eigen::Vector3d::UnitY(), 0.025, -2.0, 2.0, 0.02, 0.020},
      {Eigen::Vector3d::UnitZ(), 0.020, -3.0, 3.0, 0.01, 0.015},
  };
  for (int j = 0; j < kDof; ++j) {
    t.joints[j].axis = rows[j].axis;
    t.joints[j].origin_xyz = Eigen::Vector3d(0.0, 0.0, rows[j].z_offset);
    t.joints[j].lower = rows[j].lower;
    t.joints[j].upper = rows[j].upper;
    t.joints[j].armature = rows[j].armature;
    t.links[j].length = rows[j].length;
    t.links[j].principal_axis = 2;
  }
  return t;
}

void LinkSpec::validate() const {
  require(finite(mass) && mass > 0.0, ErrorKind::Domain, "link mass must be positive");
  require(finite(diameter) && diameter > 0.0, ErrorKind::Domain, "link diameter must be positive");
  require(finite(length) && length > 0.0, ErrorKind::Domain, "link length must be positive");
  require(finite(com_offset) && std::abs(com_offset) <= 0.5 * length, ErrorKind::Domain,
          "link COM offset exceeds half the length");
  const double a = inertia.ixx, b = inertia.iyy, c = inertia.izz;
  require(finite(a) && finite(b) && finite(c) && a > 0.0 && b > 0.0 && c > 0.0, ErrorKind::Domain,
          "link inertia entries must be positive");
  // Relative slack: the closed forms satisfy the inequalities with equality
  // for degenerate (zero-length) links.
  const double slack = 1e-12 * (a + b + c);
  require(a <= b + c + slack && b <= a + c + slack && c <= a + b + slack, ErrorKind::Domain,
          "link inertia violates the triangle inequality");
}

void JointSpec::validate() const {
  require(finite(mu_c) && mu_c >= 0.0, ErrorKind::Domain, "Coulomb coefficient must be >= 0");
  require(finite(mu_v) && mu_v >= 0.0, ErrorKind::Domain, "viscous coefficient must be >= 0");
}

void RobotModel::validate() const {
  kinematics.validate();
  for (int i = 0; i < kDof; ++i) {
    links[i].validate();
    joints[i].validate();
  }
}

void VariationRanges::validate() const {
  auto check = [](const Interval& iv, const char* name, double floor, bool strict_floor) {
    require(finite(iv.min) && finite(iv.max) && iv.min <= iv.max, ErrorKind::Range,
            std::string(name) + ": need min <= max");
    require(strict_floor ? iv.min > floor : iv.min >= floor, ErrorKind::Range,
            std::string(name) + ": lower bound out of domain");
  };
  require(!shapes.empty(), ErrorKind::Range, "shape set is empty");
  check(diameter, "diameter", 0.0, true);
  check(density, "density", 0.0, true);
  check(mu_c, "mu_c", 0.0, false);
  check(mu_v, "mu_v", 0.0, false);
  check(com_fraction, "com_fraction", -0.5, false);
  require(com_fraction.max <= 0.5, ErrorKind::Range, "com_fraction: upper bound exceeds 0.5");
}

}  // namespace armid::model
