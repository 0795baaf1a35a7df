#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "diffgrasp/mesh.hpp"
#include "diffgrasp/tape.hpp"
#include "diffgrasp/vec.hpp"

namespace dg {

// Hand configuration q_h: base pose plus one angle per revolute joint.
struct HandConfig {
  Vec3 base_position;
  Quat base_orientation = Quat::identity();
  std::vector<double> joint_angles;
};

// Scalar-generic view of a configuration for recorded forward kinematics.
template <class S>
struct PoseVars {
  Vec3T<S> base_position;
  QuatT<S> base_orientation;
  std::vector<S> joint_angles;
};

struct HandJoint {
  std::string name;
  int parent_link = -1;
  int child_link = -1;
  Vec3 axis{0, 0, 1};  // unit, in the child origin frame
  Mat3 origin_R = Mat3::identity();
  Vec3 origin_t;
  double lower = 0.0;
  double upper = 0.0;
};

struct HandLink {
  std::string name;
  TriMesh mesh;              // link frame
  std::string mesh_file;     // as referenced by the description file
  std::vector<Vec3> samples; // link-frame surface sample points
  double area = 0.0;
  double sample_area = 0.0;  // area / samples.size()
  int parent_joint = -1;     // -1 for the base link
};

// Articulated hand: a tree of links connected by revolute joints, with
// area-weighted surface sample points on every link. Immutable after load;
// forward kinematics is const and safe to run concurrently.
class HandModel {
 public:
  // Minimal robot-description XML subset: <robot><link name><mesh filename/>
  // </link><joint name type="revolute"><parent link/><child link/>
  // <origin xyz rpy/><axis xyz/><limit lower upper/></joint></robot>.
  // Link meshes are OBJ, resolved relative to the XML file.
  static HandModel load_xml(const std::string& path, int sample_budget = 2000,
                            std::uint64_t sample_seed = 12345);

  static HandModel assemble(std::string name, std::vector<HandLink> links,
                            std::vector<HandJoint> joints, int sample_budget,
                            std::uint64_t sample_seed);

  const std::string& name() const { return name_; }
  int num_joints() const { return static_cast<int>(joints_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int base_link() const { return base_link_; }
  int total_samples() const { return static_cast<int>(sample_link_.size()); }
  double total_area() const { return total_area_; }

  const std::vector<HandLink>& links() const { return links_; }
  const std::vector<HandJoint>& joints() const { return joints_; }
  // per world-sample metadata, aligned with the output of forward()
  const std::vector<int>& sample_link() const { return sample_link_; }
  const std::vector<double>& sample_areas() const { return sample_areas_; }

  std::vector<double> mid_range() const;
  HandConfig mid_range_config() const;

  // World positions of all surface samples. Throws if the joint-angle count
  // does not match the model.
  template <class S>
  std::vector<Vec3T<S>> forward(const PoseVars<S>& q) const;
  std::vector<Vec3> forward(const HandConfig& q) const;

  // World transform (R, t) per link.
  std::vector<std::pair<Mat3, Vec3>> link_transforms(const HandConfig& q) const;

 private:
  void validate_and_finish(int sample_budget, std::uint64_t sample_seed);

  std::string name_;
  std::vector<HandLink> links_;
  std::vector<HandJoint> joints_;
  std::vector<int> topo_links_;  // parent before child
  int base_link_ = -1;
  std::vector<int> sample_link_;
  std::vector<double> sample_areas_;
  double total_area_ = 0.0;
};

// Area-weighted uniform surface samples; deterministic for a fixed seed.
std::vector<Vec3> sample_surface(const TriMesh& mesh, int count, std::uint64_t seed);

inline PoseVars<double> pose_vars(const HandConfig& q) {
  return {q.base_position, q.base_orientation, q.joint_angles};
}

// Registers optimization variables on the active tape in a fixed order:
// base position (3), base-orientation tangent (3, at zero), joint angles.
// The recorded orientation is exp(tangent) * q.base_orientation.
PoseVars<Rec> record_pose_vars(Tape& tape, const HandConfig& q);

template <class S>
std::vector<Vec3T<S>> HandModel::forward(const PoseVars<S>& q) const {
  if (static_cast<int>(q.joint_angles.size()) != num_joints())
    throw std::runtime_error("hand: expected " + std::to_string(num_joints()) +
                             " joint angles, got " + std::to_string(q.joint_angles.size()));

  std::vector<Mat3T<S>> R(links_.size());
  std::vector<Vec3T<S>> t(links_.size());
  for (int li : topo_links_) {
    const HandLink& link = links_[li];
    if (link.parent_joint < 0) {
      R[li] = rotation_matrix(q.base_orientation);
      t[li] = q.base_position;
      continue;
    }
    const HandJoint& j = joints_[link.parent_joint];
    const S& angle = q.joint_angles[link.parent_joint];
    Vec3T<S> rotvec{S(j.axis.x) * angle, S(j.axis.y) * angle, S(j.axis.z) * angle};
    Mat3T<S> Rj = rotation_matrix(quat_exp(rotvec));
    Mat3T<S> Ro;
    for (int k = 0; k < 9; ++k) Ro.m[k] = S(j.origin_R.m[k]);
    Vec3T<S> to{S(j.origin_t.x), S(j.origin_t.y), S(j.origin_t.z)};
    const Mat3T<S>& Rp = R[j.parent_link];
    R[li] = Rp * Ro * Rj;
    t[li] = Rp * to + t[j.parent_link];
  }

  std::vector<Vec3T<S>> out;
  out.reserve(sample_link_.size());
  for (std::size_t li = 0; li < links_.size(); ++li) {
    for (const Vec3& s : links_[li].samples) {
      Vec3T<S> sl{S(s.x), S(s.y), S(s.z)};
      out.push_back(R[li] * sl + t[li]);
    }
  }
  return out;
}

}  // namespace dg
