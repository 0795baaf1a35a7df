#include "diffgrasp/hand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "xml.hpp"

namespace dg {

namespace {

Vec3 parse_vec3(const std::string& text, const std::string& context) {
  std::istringstream ss(text);
  Vec3 v;
  if (!(ss >> v.x >> v.y >> v.z)) throw std::runtime_error(context + ": expected three numbers, got '" + text + "'");
  return v;
}

Mat3 rpy_matrix(const Vec3& rpy) {
  // fixed-axis roll-pitch-yaw: R = Rz(yaw) Ry(pitch) Rx(roll)
  double cr = std::cos(rpy.x), sr = std::sin(rpy.x);
  double cp = std::cos(rpy.y), sp = std::sin(rpy.y);
  double cy = std::cos(rpy.z), sy = std::sin(rpy.z);
  Mat3 R;
  R.m = {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr};
  return R;
}

std::string dir_of(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

}  // namespace

std::vector<Vec3> sample_surface(const TriMesh& mesh, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_surface: count must be >= 1");
  if (mesh.faces.empty() || mesh.total_area <= 0.0)
    throw std::runtime_error("sample_surface: degenerate mesh");

  std::vector<double> cumulative(mesh.faces.size());
  double acc = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    acc += mesh.face_areas[f];
    cumulative[f] = acc;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    double pick = uni(rng) * acc;
    std::size_t f = std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    if (f >= mesh.faces.size()) f = mesh.faces.size() - 1;
    double r1 = std::sqrt(uni(rng));
    double r2 = uni(rng);
    double u = 1.0 - r1, v = r1 * (1.0 - r2), w = r1 * r2;
    out.push_back(u * mesh.v(f, 0) + v * mesh.v(f, 1) + w * mesh.v(f, 2));
  }
  return out;
}

HandModel HandModel::load_xml(const std::string& path, int sample_budget,
                              std::uint64_t sample_seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hand description: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  xml::Element root = xml::parse(buf.str(), path);
  if (root.name != "robot") throw std::runtime_error(path + ": root element must be <robot>");

  std::string dir = dir_of(path);
  std::vector<HandLink> links;
  std::vector<HandJoint> joints;
  std::vector<std::string> link_names;

  auto link_index = [&](const std::string& n) -> int {
    for (std::size_t i = 0; i < link_names.size(); ++i)
      if (link_names[i] == n) return static_cast<int>(i);
    return -1;
  };

  for (const auto& e : root.children) {
    if (e.name == "link") {
      HandLink link;
      link.name = e.require_attr("name", path);
      const xml::Element* mesh_el = e.child("mesh");
      if (!mesh_el)
        throw std::runtime_error(path + ": link '" + link.name + "' (line " +
                                 std::to_string(e.line) + ") has no <mesh>");
      link.mesh_file = mesh_el->require_attr("filename", path);
      link.mesh = load_obj_file(dir + "/" + link.mesh_file);
      link_names.push_back(link.name);
      links.push_back(std::move(link));
    }
  }
  for (const auto& e : root.children) {
    if (e.name != "joint") continue;
    HandJoint j;
    j.name = e.require_attr("name", path);
    std::string type = e.require_attr("type", path);
    if (type != "revolute")
      throw std::runtime_error(path + ": joint '" + j.name + "' has unsupported type '" + type + "'");
    const xml::Element* parent = e.child("parent");
    const xml::Element* child = e.child("child");
    if (!parent || !child)
      throw std::runtime_error(path + ": joint '" + j.name + "' needs <parent> and <child>");
    j.parent_link = link_index(parent->require_attr("link", path));
    j.child_link = link_index(child->require_attr("link", path));
    if (j.parent_link < 0 || j.child_link < 0)
      throw std::runtime_error(path + ": joint '" + j.name + "' references an unknown link");
    if (const xml::Element* origin = e.child("origin")) {
      if (const std::string* xyz = origin->attr("xyz")) j.origin_t = parse_vec3(*xyz, path);
      if (const std::string* rpy = origin->attr("rpy")) j.origin_R = rpy_matrix(parse_vec3(*rpy, path));
    }
    if (const xml::Element* axis = e.child("axis")) {
      j.axis = normalized(parse_vec3(axis->require_attr("xyz", path), path));
    }
    const xml::Element* limit = e.child("limit");
    if (!limit) throw std::runtime_error(path + ": joint '" + j.name + "' has no <limit>");
    j.lower = std::stod(limit->require_attr("lower", path));
    j.upper = std::stod(limit->require_attr("upper", path));
    joints.push_back(std::move(j));
  }

  const std::string* name = root.attr("name");
  return assemble(name ? *name : "hand", std::move(links), std::move(joints), sample_budget,
                  sample_seed);
}

HandModel HandModel::assemble(std::string name, std::vector<HandLink> links,
                              std::vector<HandJoint> joints, int sample_budget,
                              std::uint64_t sample_seed) {
  HandModel m;
  m.name_ = std::move(name);
  m.links_ = std::move(links);
  m.joints_ = std::move(joints);
  m.validate_and_finish(sample_budget, sample_seed);
  return m;
}

void HandModel::validate_and_finish(int sample_budget, std::uint64_t sample_seed) {
  if (links_.empty()) throw std::runtime_error("hand: no links");
  for (auto& l : links_) l.parent_joint = -1;
  for (std::size_t ji = 0; ji < joints_.size(); ++ji) {
    const HandJoint& j = joints_[ji];
    if (j.lower >= j.upper)
      throw std::runtime_error("hand: joint '" + j.name + "' has lower >= upper limit");
    if (links_[j.child_link].parent_joint >= 0)
      throw std::runtime_error("hand: link '" + links_[j.child_link].name + "' has two parent joints");
    links_[j.child_link].parent_joint = static_cast<int>(ji);
  }

  base_link_ = -1;
  for (std::size_t li = 0; li < links_.size(); ++li) {
    if (links_[li].parent_joint < 0) {
      if (base_link_ >= 0)
        throw std::runtime_error("hand: multiple base links ('" + links_[base_link_].name +
                                 "' and '" + links_[li].name + "')");
      base_link_ = static_cast<int>(li);
    }
  }
  if (base_link_ < 0) throw std::runtime_error("hand: joint graph has a cycle (no base link)");

  // breadth-first from the base; every link must be reached exactly once
  topo_links_.clear();
  std::vector<bool> seen(links_.size(), false);
  topo_links_.push_back(base_link_);
  seen[base_link_] = true;
  for (std::size_t head = 0; head < topo_links_.size(); ++head) {
    int cur = topo_links_[head];
    for (std::size_t ji = 0; ji < joints_.size(); ++ji) {
      if (joints_[ji].parent_link != cur) continue;
      int child = joints_[ji].child_link;
      if (seen[child]) throw std::runtime_error("hand: joint graph is not a tree");
      seen[child] = true;
      topo_links_.push_back(child);
    }
  }
  if (topo_links_.size() != links_.size())
    throw std::runtime_error("hand: joint graph is not a tree rooted at the base link");

  total_area_ = 0.0;
  for (auto& l : links_) {
    l.area = l.mesh.total_area;
    total_area_ += l.area;
  }
  if (total_area_ <= 0.0) throw std::runtime_error("hand: zero total surface area");

  // distribute the sample budget by area, at least one sample per link
  sample_link_.clear();
  sample_areas_.clear();
  for (std::size_t li = 0; li < links_.size(); ++li) {
    HandLink& l = links_[li];
    int n = std::max(1, static_cast<int>(std::lround(sample_budget * l.area / total_area_)));
    l.samples = sample_surface(l.mesh, n, sample_seed + li);
    l.sample_area = l.area / n;
    for (int k = 0; k < n; ++k) {
      sample_link_.push_back(static_cast<int>(li));
      sample_areas_.push_back(l.sample_area);
    }
  }
}

std::vector<double> HandModel::mid_range() const {
  std::vector<double> q(joints_.size());
  for (std::size_t i = 0; i < joints_.size(); ++i) q[i] = 0.5 * (joints_[i].lower + joints_[i].upper);
  return q;
}

HandConfig HandModel::mid_range_config() const {
  HandConfig q;
  q.joint_angles = mid_range();
  return q;
}

std::vector<Vec3> HandModel::forward(const HandConfig& q) const {
  return forward(pose_vars(q));
}

std::vector<std::pair<Mat3, Vec3>> HandModel::link_transforms(const HandConfig& q) const {
  if (static_cast<int>(q.joint_angles.size()) != num_joints())
    throw std::runtime_error("hand: joint angle count mismatch");
  std::vector<std::pair<Mat3, Vec3>> X(links_.size());
  for (int li : topo_links_) {
    const HandLink& link = links_[li];
    if (link.parent_joint < 0) {
      X[li] = {rotation_matrix(q.base_orientation), q.base_position};
      continue;
    }
    const HandJoint& j = joints_[link.parent_joint];
    Mat3 Rj = rotation_matrix(quat_exp(j.axis * q.joint_angles[link.parent_joint]));
    const auto& [Rp, tp] = X[j.parent_link];
    X[li] = {Rp * j.origin_R * Rj, Rp * j.origin_t + tp};
  }
  return X;
}

PoseVars<Rec> record_pose_vars(Tape& tape, const HandConfig& q) {
  PoseVars<Rec> v;
  v.base_position = {tape.input(q.base_position.x), tape.input(q.base_position.y),
                     tape.input(q.base_position.z)};
  Vec3T<Rec> tangent{tape.input(0.0), tape.input(0.0), tape.input(0.0)};
  QuatT<Rec> q0{Rec(q.base_orientation.w), Rec(q.base_orientation.x), Rec(q.base_orientation.y),
                Rec(q.base_orientation.z)};
  v.base_orientation = quat_exp(tangent) * q0;
  v.joint_angles.reserve(q.joint_angles.size());
  for (double a : q.joint_angles) v.joint_angles.push_back(tape.input(a));
  return v;
}

}  // namespace dg
