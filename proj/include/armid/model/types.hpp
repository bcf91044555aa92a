#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace armid::model {

inline constexpr int kDof = 6;

/// Fixed part of one revolute joint. The origin is the joint frame expressed
/// in the parent link frame (URDF convention: translation, then fixed
/// roll-pitch-yaw rotation).
struct JointTemplate {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d origin_xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d origin_rpy = Eigen::Vector3d::Zero();
  double lower = -3.14159;
  double upper = 3.14159;
  // Reflected actuator (rotor) inertia, kg*m^2. Constant across robots.
  double armature = 0.0;
  double effort_limit = 150.0;
  double velocity_limit = 10.0;
};

struct LinkTemplate {
  double length = 0.1;
  int principal_axis = 2;  // 0 = x, 1 = y, 2 = z in the link frame
};

/// Kinematics shared by every robot of one generation run.
struct KinematicTemplate {
  std::array<JointTemplate, kDof> joints;
  std::array<LinkTemplate, kDof> links;

  /// Throws armid::Error(Domain) on non-unit axes, bad limits or lengths.
  void validate() const;

  /// 6-DOF anthropomorphic desk-scale arm (yaw, pitch, pitch, roll, pitch, roll),
  /// about 0.3 m tall and upright at q = 0.
  static KinematicTemplate anthropomorphic();
};

enum class LinkShape { Cylinder, Box };

const char* to_string(LinkShape shape) noexcept;

/// Diagonal inertia about the COM, link frame, kg*m^2.
struct DiagonalInertia {
  double ixx = 0.0;
  double iyy = 0.0;
  double izz = 0.0;

  double operator[](int i) const { return i == 0 ? ixx : (i == 1 ? iyy : izz); }
  bool operator==(const DiagonalInertia&) const = default;
};

struct LinkSpec {
  LinkShape shape = LinkShape::Cylinder;
  double diameter = 0.05;    // cylinder diameter or box side
  double length = 0.1;       // copied from the template
  double mass = 1.0;
  double com_offset = 0.0;   // along the principal axis, from the geometric center
  DiagonalInertia inertia;

  void validate() const;
  bool operator==(const LinkSpec&) const = default;
};

struct JointSpec {
  double mu_c = 0.0;  // Coulomb, N*m
  double mu_v = 0.0;  // viscous, N*m*s/rad

  void validate() const;
  bool operator==(const JointSpec&) const = default;
};

struct RobotModel {
  std::int64_t id = 0;
  KinematicTemplate kinematics;
  std::array<LinkSpec, kDof> links;
  std::array<JointSpec, kDof> joints;
  std::uint64_t generation_seed = 0;

  void validate() const;
};

struct Interval {
  double min = 0.0;
  double max = 0.0;

  double width() const { return max - min; }
  bool contains(double v) const { return v >= min && v <= max; }
};

struct VariationRanges {
  std::vector<LinkShape> shapes{LinkShape::Cylinder, LinkShape::Box};
  Interval diameter{0.04, 0.12};
  Interval com_fraction{-0.2, 0.2};  // times link length
  Interval mu_c{0.0, 0.5};
  Interval mu_v{0.0, 0.5};
  Interval density{500.0, 3000.0};  // kg/m^3

  /// Throws armid::Error(Range).
  void validate() const;
};

}  // namespace armid::model
