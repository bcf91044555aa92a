#include "armid/model/urdf.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Geometry>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "armid/core/error.hpp"
#include "armid/core/format.hpp"

namespace armid::model {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kBaseLink = "base_link";

std::string num(double v) { return format_double(v); }

std::string vec(const Eigen::Vector3d& v) { return num(v.x()) + " " + num(v.y()) + " " + num(v.z()); }

Eigen::Vector3d unit(int axis) { return Eigen::Vector3d::Unit(axis); }

// Visual-frame rotation that carries +z onto the link's principal axis.
Eigen::Vector3d principal_rpy(int axis) {
  switch (axis) {
    case 0: return {0.0, std::numbers::pi / 2, 0.0};
    case 1: return {-std::numbers::pi / 2, 0.0, 0.0};
    default: return Eigen::Vector3d::Zero();
  }
}

Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// ---- reading helpers -------------------------------------------------------

[[noreturn]] void schema_error(const std::string& what) { throw ParseError(what, 0); }

bool is_meta(const std::string& key) { return key == "<xmlattr>" || key == "<xmlcomment>"; }

std::optional<std::string> attr(const pt::ptree& node, const std::string& name) {
  const auto attrs = node.get_child_optional("<xmlattr>");
  if (!attrs) return std::nullopt;
  const auto v = attrs->get_optional<std::string>(name);
  if (!v) return std::nullopt;
  return *v;
}

std::string require_attr(const pt::ptree& node, const std::string& element, const std::string& name) {
  auto v = attr(node, name);
  if (!v) schema_error("<" + element + "> is missing attribute '" + name + "'");
  return *v;
}

double parse_num(const std::string& text, const std::string& where) {
  double v = 0.0;
  if (!parse_double(text, v) || !std::isfinite(v)) {
    schema_error("invalid number '" + text + "' in " + where);
  }
  return v;
}

double num_attr(const pt::ptree& node, const std::string& element, const std::string& name) {
  return parse_num(require_attr(node, element, name), element + "@" + name);
}

double num_attr_or(const pt::ptree& node, const std::string& element, const std::string& name,
                   double fallback) {
  const auto v = attr(node, name);
  return v ? parse_num(*v, element + "@" + name) : fallback;
}

Eigen::Vector3d parse_vec3(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string tok;
  std::vector<double> vals;
  while (in >> tok) vals.push_back(parse_num(tok, where));
  if (vals.size() != 3) schema_error(where + " must hold exactly 3 numbers");
  return {vals[0], vals[1], vals[2]};
}

struct Origin {
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
};

Origin parse_origin(const pt::ptree& node, const std::string& owner) {
  Origin o;
  if (auto xyz = attr(node, "xyz")) o.xyz = parse_vec3(*xyz, owner + "/origin@xyz");
  if (auto rpy = attr(node, "rpy")) o.rpy = parse_vec3(*rpy, owner + "/origin@rpy");
  return o;
}

// Rejects unknown child elements of `node`.
void only_children(const pt::ptree& node, std::initializer_list<const char*> allowed) {
  for (const auto& [key, child] : node) {
    if (is_meta(key)) continue;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UnsupportedFeatureError(key);
  }
}

const pt::ptree& single_child(const pt::ptree& node, const std::string& owner, const char* name) {
  const pt::ptree* found = nullptr;
  for (const auto& [key, child] : node) {
    if (key != name) continue;
    if (found) schema_error("<" + owner + "> has more than one <" + name + ">");
    found = &child;
  }
  if (!found) schema_error("<" + owner + "> is missing <" + name + ">");
  return *found;
}

const pt::ptree* optional_child(const pt::ptree& node, const char* name) {
  const auto c = node.get_child_optional(name);
  return c ? &*c : nullptr;
}

struct ParsedLink {
  std::string name;
  bool has_inertial = false;
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  DiagonalInertia inertia;
  bool has_visual = false;
  LinkShape shape = LinkShape::Cylinder;
  double diameter = 0.0;
  double length = 0.0;
  int principal_axis = 2;
};

struct ParsedJoint {
  std::string name, parent, child;
  JointTemplate tmpl;
  JointSpec spec;
};

ParsedLink parse_link(const pt::ptree& node) {
  ParsedLink link;
  link.name = require_attr(node, "link", "name");
  only_children(node, {"inertial", "visual"});

  if (const pt::ptree* inertial = optional_child(node, "inertial")) {
    only_children(*inertial, {"origin", "mass", "inertia"});
    link.has_inertial = true;
    if (const pt::ptree* origin = optional_child(*inertial, "origin")) {
      const Origin o = parse_origin(*origin, "inertial");
      if (!o.rpy.isZero(0.0)) throw UnsupportedFeatureError("inertial origin rotation");
      link.com = o.xyz;
    }
    link.mass = num_attr(single_child(*inertial, "inertial", "mass"), "mass", "value");
    const pt::ptree& inertia = single_child(*inertial, "inertial", "inertia");
    for (const char* off : {"ixy", "ixz", "iyz"}) {
      if (num_attr_or(inertia, "inertia", off, 0.0) != 0.0) {
        throw UnsupportedFeatureError(std::string("non-diagonal inertia (") + off + ")");
      }
    }
    link.inertia = {num_attr(inertia, "inertia", "ixx"), num_attr(inertia, "inertia", "iyy"),
                    num_attr(inertia, "inertia", "izz")};
  }

  if (const pt::ptree* visual = optional_child(node, "visual")) {
    only_children(*visual, {"origin", "geometry"});
    link.has_visual = true;
    Origin o;
    if (const pt::ptree* origin = optional_child(*visual, "origin")) o = parse_origin(*origin, "visual");
    const Eigen::Vector3d dir = rpy_to_matrix(o.rpy) * Eigen::Vector3d::UnitZ();
    int axis = -1;
    for (int a = 0; a < 3; ++a) {
      if ((dir - unit(a)).norm() < 1e-9) axis = a;
    }
    if (axis < 0) throw UnsupportedFeatureError("visual not aligned with a link-frame axis");
    link.principal_axis = axis;

    const pt::ptree& geometry = single_child(*visual, "visual", "geometry");
    only_children(geometry, {"cylinder", "box"});
    if (const pt::ptree* cyl = optional_child(geometry, "cylinder")) {
      link.shape = LinkShape::Cylinder;
      link.diameter = 2.0 * num_attr(*cyl, "cylinder", "radius");
      link.length = num_attr(*cyl, "cylinder", "length");
    } else if (const pt::ptree* box = optional_child(geometry, "box")) {
      link.shape = LinkShape::Box;
      const Eigen::Vector3d size = parse_vec3(require_attr(*box, "box", "size"), "box@size");
      if (size.x() != size.y()) throw UnsupportedFeatureError("box with non-square cross-section");
      link.diameter = size.x();
      link.length = size.z();
    } else {
      schema_error("<geometry> must contain <cylinder> or <box>");
    }
  }
  return link;
}

ParsedJoint parse_joint(const pt::ptree& node) {
  ParsedJoint joint;
  joint.name = require_attr(node, "joint", "name");
  const std::string type = require_attr(node, "joint", "type");
  if (type != "revolute") throw UnsupportedFeatureError(type + " joint");
  only_children(node, {"parent", "child", "origin", "axis", "limit", "dynamics"});

  joint.parent = require_attr(single_child(node, "joint", "parent"), "parent", "link");
  joint.child = require_attr(single_child(node, "joint", "child"), "child", "link");
  if (const pt::ptree* origin = optional_child(node, "origin")) {
    const Origin o = parse_origin(*origin, "joint");
    joint.tmpl.origin_xyz = o.xyz;
    joint.tmpl.origin_rpy = o.rpy;
  }
  if (const pt::ptree* axis = optional_child(node, "axis")) {
    joint.tmpl.axis = parse_vec3(require_attr(*axis, "axis", "xyz"), "axis@xyz");
  } else {
    joint.tmpl.axis = Eigen::Vector3d::UnitX();  // URDF default
  }
  const pt::ptree& limit = single_child(node, "joint", "limit");
  joint.tmpl.lower = num_attr(limit, "limit", "lower");
  joint.tmpl.upper = num_attr(limit, "limit", "upper");
  joint.tmpl.effort_limit = num_attr(limit, "limit", "effort");
  joint.tmpl.velocity_limit = num_attr(limit, "limit", "velocity");
  if (const pt::ptree* dyn = optional_child(node, "dynamics")) {
    joint.spec.mu_v = num_attr_or(*dyn, "dynamics", "damping", 0.0);
    joint.spec.mu_c = num_attr_or(*dyn, "dynamics", "friction", 0.0);
    joint.tmpl.armature = num_attr_or(*dyn, "dynamics", "armature", 0.0);
  }
  return joint;
}

std::int64_t id_from_name(const std::string& name) {
  constexpr std::string_view prefix = "robot_";
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return 0;
  std::int64_t id = 0;
  for (std::size_t i = prefix.size(); i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9' || id > (INT64_MAX - 9) / 10) return 0;
    id = id * 10 + (name[i] - '0');
  }
  return id;
}

}  // namespace

std::string serialize_urdf(const RobotModel& robot) {
  robot.validate();
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n";
  out << "<robot name=\"robot_" << robot.id << "\" generation_seed=\"" << robot.generation_seed
      << "\">\n";
  out << "  <link name=\"" << kBaseLink << "\">\n"
      << "    <visual>\n"
      << "      <origin xyz=\"0 0 0.025\" rpy=\"0 0 0\"/>\n"
      << "      <geometry><cylinder radius=\"0.08\" length=\"0.05\"/></geometry>\n"
      << "    </visual>\n"
      << "  </link>\n";
  for (int i = 0; i < kDof; ++i) {
    const LinkSpec& link = robot.links[i];
    const int axis = robot.kinematics.links[i].principal_axis;
    const Eigen::Vector3d center = unit(axis) * (0.5 * link.length);
    const Eigen::Vector3d com = unit(axis) * (0.5 * link.length + link.com_offset);
    out << "  <link name=\"link" << i + 1 << "\">\n"
        << "    <inertial>\n"
        << "      <origin xyz=\"" << vec(com) << "\" rpy=\"0 0 0\"/>\n"
        << "      <mass value=\"" << num(link.mass) << "\"/>\n"
        << "      <inertia ixx=\"" << num(link.inertia.ixx) << "\" ixy=\"0\" ixz=\"0\" iyy=\""
        << num(link.inertia.iyy) << "\" iyz=\"0\" izz=\"" << num(link.inertia.izz) << "\"/>\n"
        << "    </inertial>\n"
        << "    <visual>\n"
        << "      <origin xyz=\"" << vec(center) << "\" rpy=\"" << vec(principal_rpy(axis))
        << "\"/>\n"
        << "      <geometry>";
    if (link.shape == LinkShape::Cylinder) {
      out << "<cylinder radius=\"" << num(0.5 * link.diameter) << "\" length=\""
          << num(link.length) << "\"/>";
    } else {
      out << "<box size=\"" << num(link.diameter) << " " << num(link.diameter) << " "
          << num(link.length) << "\"/>";
    }
    out << "</geometry>\n"
        << "    </visual>\n"
        << "  </link>\n";
  }
  for (int j = 0; j < kDof; ++j) {
    const JointTemplate& jt = robot.kinematics.joints[j];
    const JointSpec& js = robot.joints[j];
    const std::string parent = j == 0 ? std::string(kBaseLink) : "link" + std::to_string(j);
    out << "  <joint name=\"joint" << j + 1 << "\" type=\"revolute\">\n"
        << "    <parent link=\"" << parent << "\"/>\n"
        << "    <child link=\"link" << j + 1 << "\"/>\n"
        << "    <origin xyz=\"" << vec(jt.origin_xyz) << "\" rpy=\"" << vec(jt.origin_rpy) << "\"/>\n"
        << "    <axis xyz=\"" << vec(jt.axis) << "\"/>\n"
        << "    <limit lower=\"" << num(jt.lower) << "\" upper=\"" << num(jt.upper)
        << "\" effort=\"" << num(jt.effort_limit) << "\" velocity=\"" << num(jt.velocity_limit)
        << "\"/>\n"
        << "    <dynamics damping=\"" << num(js.mu_v) << "\" friction=\"" << num(js.mu_c)
        << "\" armature=\"" << num(jt.armature) << "\"/>\n"
        << "  </joint>\n";
  }
  out << "</robot>\n";
  return out.str();
}

RobotModel parse_urdf(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }

  const pt::ptree* robot_node = nullptr;
  for (const auto& [key, child] : tree) {
    if (key == "robot" && !robot_node) {
      robot_node = &child;
    } else if (!is_meta(key)) {
      throw UnsupportedFeatureError(key);
    }
  }
  if (!robot_node) schema_error("document has no <robot> element");

  RobotModel robot;
  robot.id = id_from_name(attr(*robot_node, "name").value_or(""));
  if (auto seed = attr(*robot_node, "generation_seed")) {
    try {
      std::size_t pos = 0;
      robot.generation_seed = std::stoull(*seed, &pos);
      if (pos != seed->size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      schema_error("invalid generation_seed '" + *seed + "'");
    }
  }

  std::map<std::string, ParsedLink> links;
  std::vector<ParsedJoint> joints;
  for (const auto& [key, child] : *robot_node) {
    if (is_meta(key)) continue;
    if (key == "link") {
      ParsedLink link = parse_link(child);
      const std::string name = link.name;
      if (!links.emplace(name, std::move(link)).second) schema_error("duplicate link '" + name + "'");
    } else if (key == "joint") {
      joints.push_back(parse_joint(child));
    } else {
      throw UnsupportedFeatureError(key);
    }
  }
  if (links.size() != kDof + 1 || joints.size() != kDof) {
    schema_error("expected 7 links and 6 joints, found " + std::to_string(links.size()) + " and " +
                 std::to_string(joints.size()));
  }

  // Order joints along the serial chain starting at the link that is nobody's child.
  std::map<std::string, const ParsedJoint*> by_parent;
  std::map<std::string, int> child_count;
  for (const auto& j : joints) {
    if (!links.count(j.parent) || !links.count(j.child)) {
      schema_error("joint '" + j.name + "' references an unknown link");
    }
    if (!by_parent.emplace(j.parent, &j).second) throw UnsupportedFeatureError("branching kinematic tree");
    ++child_count[j.child];
  }
  std::string root;
  for (const auto& [name, link] : links) {
    if (!child_count.count(name)) {
      if (!root.empty()) schema_error("more than one root link");
      root = name;
    } else if (child_count[name] > 1) {
      schema_error("link '" + name + "' has more than one parent joint");
    }
  }
  if (root.empty()) schema_error("kinematic loop: no root link");

  std::string current = root;
  for (int j = 0; j < kDof; ++j) {
    const auto it = by_parent.find(current);
    if (it == by_parent.end()) schema_error("kinematic chain breaks after link '" + current + "'");
    const ParsedJoint& pj = *it->second;
    const ParsedLink& pl = links.at(pj.child);
    if (!pl.has_inertial) schema_error("link '" + pl.name + "' is missing <inertial>");
    if (!pl.has_visual) schema_error("link '" + pl.name + "' is missing <visual>");

    robot.kinematics.joints[j] = pj.tmpl;
    robot.joints[j] = pj.spec;
    robot.kinematics.links[j].length = pl.length;
    robot.kinematics.links[j].principal_axis = pl.principal_axis;

    LinkSpec& link = robot.links[j];
    link.shape = pl.shape;
    link.diameter = pl.diameter;
    link.length = pl.length;
    link.mass = pl.mass;
    link.inertia = pl.inertia;
    const Eigen::Vector3d dir = unit(pl.principal_axis);
    if ((pl.com - dir * pl.com.dot(dir)).norm() > 1e-12 * (1.0 + pl.length)) {
      throw UnsupportedFeatureError("COM off the link's principal axis");
    }
    link.com_offset = pl.com.dot(dir) - 0.5 * pl.length;
    current = pj.child;
  }

  try {
    robot.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Domain, std::string("URDF describes an invalid model: ") + e.what());
  }
  return robot;
}

}  // namespace armid::model
