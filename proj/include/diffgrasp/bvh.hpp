#pragma once

#include <optional>
#include <vector>

#include "diffgrasp/mesh.hpp"

namespace dg {

struct SurfacePoint {
  int face = -1;
  Vec3 bary;      // (u, v, w), sums to 1
  Vec3 position;  // u*v0 + v*v1 + w*v2
  double dist2 = 0.0;
};

// Closest point on a triangle; bary/point refer to (a, b, c).
SurfacePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Median-split BVH over face centroids, leaf size <= 4. Queries are read-only
// and safe for concurrent use; build is single-threaded and deterministic.
class Bvh {
 public:
  struct NodeRec {
    Box3 box;
    int left = -1;   // internal: child index; leaf: -1
    int right = -1;
    int first = 0;   // leaf: range into face_order_
    int count = 0;
  };

  // Validates the mesh (watertight, consistent winding, no degenerate faces).
  static Bvh build(const TriMesh& mesh);

  // Globally nearest surface point; ties broken toward the lowest face index.
  SurfacePoint closest_point(const TriMesh& mesh, const Vec3& r) const;

  // Nearest surface point if within max_dist of r, otherwise nullopt. Used by
  // the forward simulation path to cull far samples cheaply.
  std::optional<SurfacePoint> closest_point_within(const TriMesh& mesh, const Vec3& r,
                                                   double max_dist) const;

  // +1 outside, -1 inside, by ray-cast crossing parity. A hit too close to an
  // edge/vertex triggers one deterministic re-cast along a second direction.
  int sign_at(const TriMesh& mesh, const Vec3& r) const;

  // Counts ray/surface intersections for t > 0. Returns nullopt when some hit
  // is within tolerance of a triangle boundary (parity unreliable).
  std::optional<int> count_ray_crossings(const TriMesh& mesh, const Vec3& origin,
                                         const Vec3& dir) const;

  const std::vector<NodeRec>& nodes() const { return nodes_; }
  const std::vector<int>& face_order() const { return face_order_; }

 private:
  std::vector<NodeRec> nodes_;
  std::vector<int> face_order_;
};

}  // namespace dg
