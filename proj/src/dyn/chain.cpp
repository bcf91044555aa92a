#include "armid/dyn/chain.hpp"

#include <Eigen/Geometry>

namespace armid::dyn {

Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Chain make_chain(const model::RobotModel& robot, const Eigen::Vector3d& gravity) {
  Chain chain;
  chain.gravity = gravity;
  chain.bodies.resize(model::kDof);
  for (int i = 0; i < model::kDof; ++i) {
    const auto& jt = robot.kinematics.joints[i];
    const auto& link = robot.links[i];
    const Eigen::Vector3d dir = Eigen::Vector3d::Unit(robot.kinematics.links[i].principal_axis);
    Body& b = chain.bodies[i];
    b.origin_rotation = rpy_to_matrix(jt.origin_rpy);
    b.origin_translation = jt.origin_xyz;
    b.axis = jt.axis;
    b.mass = link.mass;
    b.com = dir * (0.5 * link.length + link.com_offset);
    b.inertia = Eigen::Vector3d(link.inertia.ixx, link.inertia.iyy, link.inertia.izz).asDiagonal();
    b.armature = jt.armature;
    b.lower = jt.lower;
    b.upper = jt.upper;
    b.mu_c = robot.joints[i].mu_c;
    b.mu_v = robot.joints[i].mu_v;
    b.tip = dir * link.length;
    b.radius = 0.5 * link.diameter;
  }
  return chain;
}

}  // namespace armid::dyn
