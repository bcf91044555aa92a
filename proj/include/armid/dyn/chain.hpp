#pragma once

#include <vector>

#include <Eigen/Core>

#include "armid/model/types.hpp"

namespace armid::dyn {

inline constexpr int kMaxDof = 6;
inline constexpr double kStandardGravity = 9.81;

// Fixed-capacity storage: no heap traffic inside the 1 kHz loop.
using VectorJ = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using MatrixJ = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDof, kMaxDof>;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxDof>;

/// One moving body of a serial chain, together with the revolute joint that
/// connects it to its parent. Geometry is in the body (= child joint) frame.
struct Body {
  Eigen::Matrix3d origin_rotation = Eigen::Matrix3d::Identity();   // joint frame in parent
  Eigen::Vector3d origin_translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();  // about the COM
  double armature = 0.0;
  double lower = -1e9;
  double upper = 1e9;
  double mu_c = 0.0;
  double mu_v = 0.0;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();  // distal end of the link segment
  double radius = 0.0;                            // for collision proxies
};

/// Serial chain on a fixed base. Body i is moved by joints 0..i.
struct Chain {
  std::vector<Body> bodies;
  Eigen::Vector3d gravity{0.0, 0.0, -kStandardGravity};

  int dof() const { return static_cast<int>(bodies.size()); }
};

Chain make_chain(const model::RobotModel& robot,
                 const Eigen::Vector3d& gravity = {0.0, 0.0, -kStandardGravity});

/// URDF roll-pitch-yaw to rotation matrix (Rz * Ry * Rx).
Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy);

}  // namespace armid::dyn
