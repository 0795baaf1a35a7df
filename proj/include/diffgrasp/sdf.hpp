#pragma once

#include <memory>

#include "diffgrasp/bvh.hpp"
#include "diffgrasp/mesh.hpp"
#include "diffgrasp/tape.hpp"

namespace dg {

struct PhongQuery {
  double rho = 0.0;        // smoothed signed distance (m)
  Vec3 grad;               // unit, points toward increasing rho
  Vec3 smoothed_point;     // closest point on the smoothed surface
  int sign = 1;            // +1 outside, -1 inside (surface counts as outside)
  SurfacePoint flat;       // underlying flat closest point
};

// Signed-distance queries against a watertight mesh: exact phi, Phong-smoothed
// rho, and dilated variants. Read-only after construction.
class MeshSdf {
 public:
  MeshSdf(TriMesh mesh, double alpha_phong = 0.75);

  const TriMesh& mesh() const { return mesh_; }
  const Bvh& bvh() const { return bvh_; }
  double alpha_phong() const { return alpha_; }

  SurfacePoint closest_point(const Vec3& r) const { return bvh_.closest_point(mesh_, r); }

  // exact signed distance phi(r) = sign * |r - r*|; 0 is reported outside
  double phi(const Vec3& r) const;

  PhongQuery phong(const Vec3& r) const { return phong(r, alpha_); }
  PhongQuery phong(const Vec3& r, double alpha) const;

  // rho(r) - radius; the gradient is unchanged. radius must be >= 0.
  PhongQuery dilated(const Vec3& r, double radius) const;

  // Forward-only helper: dilated Phong value if the sample can be within
  // `cull_dist` of the surface, nullopt otherwise.
  std::optional<PhongQuery> dilated_within(const Vec3& r, double radius, double cull_dist) const;

  int sign_at(const Vec3& r) const;

  // Records rho(r) - radius onto the active tape with the face/bary assignment
  // frozen; derivatives flow through the closed-form distance expression. Also
  // emits the unit gradient as recorded scalars when grad_out is non-null.
  Rec record_dilated(const Vec3T<Rec>& r, double radius, Vec3T<Rec>* grad_out) const;

 private:
  TriMesh mesh_;
  Bvh bvh_;
  double alpha_;
};

}  // namespace dg
