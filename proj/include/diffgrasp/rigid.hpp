#pragma once

#include "diffgrasp/mesh.hpp"
#include "diffgrasp/vec.hpp"

namespace dg {

struct InertialData {
  double mass = 1.0;        // kg
  Vec3 com;                 // canonical frame (m)
  Mat3 inertia_body;        // about the COM, body frame (kg m^2)
  Mat3 inertia_body_inv;
};

// Exact polyhedral mass properties for a watertight mesh at uniform density,
// via divergence-theorem integrals over the faces.
InertialData inertia_from_mesh(const TriMesh& mesh, double density);

// Object pose and velocities. x is the center-of-mass position; the canonical
// frame origin sits at x - R * com. theta is the canonical-frame orientation.
struct RigidState {
  Vec3 x;
  Quat theta = Quat::identity();
  Vec3 xdot;
  Vec3 thetadot;  // world-frame angular velocity (rad/s)
};

// canonical pose: frame aligned with world, COM at its canonical position
inline RigidState canonical_state(const InertialData& inertial) {
  RigidState s;
  s.x = inertial.com;
  return s;
}

// canonical-frame origin position of a state
inline Vec3 frame_origin(const RigidState& s, const InertialData& inertial) {
  return s.x - rotate(s.theta, inertial.com);
}

}  // namespace dg
