#include "diffgrasp/sdf.hpp"

#include <cmath>
#include <stdexcept>

namespace dg {

namespace {
constexpr double kSurfaceEps = 1e-9;

// projection of p onto the tangent plane at vertex v with unit normal n
inline Vec3 plane_project(const Vec3& p, const Vec3& v, const Vec3& n) {
  return p - dot(p - v, n) * n;
}
}  // namespace

MeshSdf::MeshSdf(TriMesh mesh, double alpha_phong)
    : mesh_(std::move(mesh)), bvh_(Bvh::build(mesh_)), alpha_(alpha_phong) {
  if (alpha_ < 0.0 || alpha_ > 1.0) throw std::invalid_argument("alpha_phong must be in [0,1]");
}

int MeshSdf::sign_at(const Vec3& r) const { return bvh_.sign_at(mesh_, r); }

double MeshSdf::phi(const Vec3& r) const {
  SurfacePoint sp = bvh_.closest_point(mesh_, r);
  double d = std::sqrt(sp.dist2);
  if (d < kSurfaceEps) return 0.0;  // on-surface convention: phi = 0, outside
  return sign_at(r) * d;
}

PhongQuery MeshSdf::phong(const Vec3& r, double alpha) const {
  PhongQuery q;
  q.flat = bvh_.closest_point(mesh_, r);
  const auto& f = mesh_.faces[q.flat.face];
  const Vec3& rstar = q.flat.position;

  if (alpha == 0.0) {
    q.smoothed_point = rstar;
  } else {
    Vec3 blend = q.flat.bary.x * plane_project(rstar, mesh_.vertices[f[0]], mesh_.vertex_normals[f[0]]) +
                 q.flat.bary.y * plane_project(rstar, mesh_.vertices[f[1]], mesh_.vertex_normals[f[1]]) +
                 q.flat.bary.z * plane_project(rstar, mesh_.vertices[f[2]], mesh_.vertex_normals[f[2]]);
    q.smoothed_point = (1.0 - alpha) * rstar + alpha * blend;
  }

  double flat_d = std::sqrt(q.flat.dist2);
  q.sign = flat_d < kSurfaceEps ? 1 : sign_at(r);

  Vec3 delta = r - q.smoothed_point;
  double d = norm(delta);
  q.rho = q.sign * d;
  if (d < kSurfaceEps) {
    Vec3 n = q.flat.bary.x * mesh_.vertex_normals[f[0]] + q.flat.bary.y * mesh_.vertex_normals[f[1]] +
             q.flat.bary.z * mesh_.vertex_normals[f[2]];
    q.grad = normalized(n);
  } else {
    q.grad = (static_cast<double>(q.sign) / d) * delta;
  }
  return q;
}

PhongQuery MeshSdf::dilated(const Vec3& r, double radius) const {
  if (radius < 0.0) throw std::invalid_argument("dilation radius must be >= 0");
  PhongQuery q = phong(r);
  q.rho -= radius;
  return q;
}

std::optional<PhongQuery> MeshSdf::dilated_within(const Vec3& r, double radius,
                                                  double cull_dist) const {
  if (radius < 0.0) throw std::invalid_argument("dilation radius must be >= 0");
  auto sp = bvh_.closest_point_within(mesh_, r, radius + cull_dist);
  if (!sp) {
    // Beyond the bound the sample is either far outside (cullable) or deep
    // inside (must not be culled); the bound alone cannot tell them apart.
    if (mesh_.bounds.dist2(r) > 0.0 || sign_at(r) > 0) return std::nullopt;
  }
  PhongQuery q = phong(r);
  q.rho -= radius;
  return q;
}

Rec MeshSdf::record_dilated(const Vec3T<Rec>& r, double radius, Vec3T<Rec>* grad_out) const {
  if (radius < 0.0) throw std::invalid_argument("dilation radius must be >= 0");
  Vec3 rv{r.x.v, r.y.v, r.z.v};
  PhongQuery q = phong(rv);

  Rec dx = r.x - q.smoothed_point.x;
  Rec dy = r.y - q.smoothed_point.y;
  Rec dz = r.z - q.smoothed_point.z;

  double dval = std::abs(q.rho);
  if (dval < kSurfaceEps) {
    // frozen interpolated-normal fallback; value ~0, gradient = n
    Rec rho = Rec(static_cast<double>(q.sign)) * (dx * Rec(q.grad.x) + dy * Rec(q.grad.y) + dz * Rec(q.grad.z));
    if (grad_out) *grad_out = {Rec(q.grad.x), Rec(q.grad.y), Rec(q.grad.z)};
    return rho - Rec(radius);
  }

  Rec dist = sqrt(dx * dx + dy * dy + dz * dz);
  Rec rho = q.sign > 0 ? dist : -dist;
  if (grad_out) {
    Rec inv = Rec(static_cast<double>(q.sign)) / dist;
    *grad_out = {dx * inv, dy * inv, dz * inv};
  }
  return rho - Rec(radius);
}

}  // namespace dg
