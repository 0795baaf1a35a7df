#include "diffgrasp/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dg {

SurfacePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5
  SurfacePoint sp;
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    sp.bary = {1.0, 0.0, 0.0};
    sp.position = a;
  } else {
    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) {
      sp.bary = {0.0, 1.0, 0.0};
      sp.position = b;
    } else {
      double vc = d1 * d4 - d3 * d2;
      if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double t = d1 / (d1 - d3);
        sp.bary = {1.0 - t, t, 0.0};
        sp.position = a + t * ab;
      } else {
        Vec3 cp = p - c;
        double d5 = dot(ab, cp), d6 = dot(ac, cp);
        if (d6 >= 0.0 && d5 <= d6) {
          sp.bary = {0.0, 0.0, 1.0};
          sp.position = c;
        } else {
          double vb = d5 * d2 - d1 * d6;
          if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
            double t = d2 / (d2 - d6);
            sp.bary = {1.0 - t, 0.0, t};
            sp.position = a + t * ac;
          } else {
            double va = d3 * d6 - d5 * d4;
            if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
              double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
              sp.bary = {0.0, 1.0 - t, t};
              sp.position = b + t * (c - b);
            } else {
              double denom = 1.0 / (va + vb + vc);
              double v = vb * denom, w = vc * denom;
              sp.bary = {1.0 - v - w, v, w};
              sp.position = a + v * ab + w * ac;
            }
          }
        }
      }
    }
  }
  sp.dist2 = squared_norm(p - sp.position);
  return sp;
}

namespace {

constexpr int kLeafSize = 4;

int build_node(const TriMesh& mesh, std::vector<Bvh::NodeRec>& nodes, std::vector<int>& order,
               std::vector<Vec3>& centroids, int first, int count) {
  int id = static_cast<int>(nodes.size());
  nodes.push_back({});
  Box3 box;
  for (int i = first; i < first + count; ++i) {
    int f = order[i];
    box.expand(mesh.v(f, 0));
    box.expand(mesh.v(f, 1));
    box.expand(mesh.v(f, 2));
  }
  nodes[id].box = box;
  if (count <= kLeafSize) {
    nodes[id].first = first;
    nodes[id].count = count;
    return id;
  }
  Box3 cbox;
  for (int i = first; i < first + count; ++i) cbox.expand(centroids[order[i]]);
  Vec3 ext = cbox.extent();
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  int mid = first + count / 2;
  std::nth_element(order.begin() + first, order.begin() + mid, order.begin() + first + count,
                   [&](int fa, int fb) {
                     double ca = centroids[fa][axis], cb = centroids[fb][axis];
                     if (ca != cb) return ca < cb;
                     return fa < fb;  // deterministic
                   });
  int left = build_node(mesh, nodes, order, centroids, first, mid - first);
  int right = build_node(mesh, nodes, order, centroids, mid, first + count - mid);
  nodes[id].left = left;
  nodes[id].right = right;
  nodes[id].first = 0;
  nodes[id].count = 0;
  return id;
}

struct RayHit {
  double t;
  double min_bary;  // distance of the hit to the triangle boundary, barycentric
};

// Moller-Trumbore. Returns hit with t > 0 (strictly in front).
std::optional<RayHit> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                   const Vec3& c) {
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 h = cross(d, e2);
  double det = dot(e1, h);
  if (std::abs(det) < 1e-14) return std::nullopt;  // parallel; jittered recast handles it
  double f = 1.0 / det;
  Vec3 s = o - a;
  double u = f * dot(s, h);
  Vec3 q = cross(s, e1);
  double v = f * dot(d, q);
  double w = 1.0 - u - v;
  if (u < 0.0 || v < 0.0 || w < 0.0) return std::nullopt;
  double t = f * dot(e2, q);
  if (t <= 0.0) return std::nullopt;
  return RayHit{t, std::min({u, v, w})};
}

bool ray_box(const Vec3& o, const Vec3& inv_d, const Box3& box) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double ta = (box.lo[i] - o[i]) * inv_d[i];
    double tb = (box.hi[i] - o[i]) * inv_d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

// Fixed pseudo-random jitters of the +x axis; deterministic across runs.
const Vec3 kRayDir0 = normalized(Vec3{1.0, 0.0137215, 0.0291377});
const Vec3 kRayDir1 = normalized(Vec3{0.0173205, 1.0, -0.0262143});

}  // namespace

Bvh Bvh::build(const TriMesh& mesh) {
  TriMesh checked = mesh;  // revalidate derived data against current vertices
  checked.finalize();

  Bvh bvh;
  int n = static_cast<int>(mesh.num_faces());
  bvh.face_order_.resize(n);
  std::vector<Vec3> centroids(n);
  for (int f = 0; f < n; ++f) {
    bvh.face_order_[f] = f;
    centroids[f] = (mesh.v(f, 0) + mesh.v(f, 1) + mesh.v(f, 2)) / 3.0;
  }
  bvh.nodes_.reserve(2 * n);
  build_node(mesh, bvh.nodes_, bvh.face_order_, centroids, 0, n);
  return bvh;
}

SurfacePoint Bvh::closest_point(const TriMesh& mesh, const Vec3& r) const {
  auto sp = closest_point_within(mesh, r, std::numeric_limits<double>::infinity());
  return *sp;
}

std::optional<SurfacePoint> Bvh::closest_point_within(const TriMesh& mesh, const Vec3& r,
                                                      double max_dist) const {
  double best2 = max_dist < std::numeric_limits<double>::infinity()
                     ? max_dist * max_dist
                     : std::numeric_limits<double>::infinity();
  SurfacePoint best;
  best.face = -1;

  // depth-first with near-child ordering; (node, box distance) pairs
  struct Entry { int node; double d2; };
  Entry stack[128];
  int top = 0;
  double root_d2 = nodes_[0].box.dist2(r);
  if (root_d2 > best2) return std::nullopt;
  stack[top++] = {0, root_d2};

  while (top > 0) {
    Entry e = stack[--top];
    if (e.d2 > best2) continue;
    const NodeRec& node = nodes_[e.node];
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        int f = face_order_[i];
        SurfacePoint sp = closest_point_on_triangle(r, mesh.v(f, 0), mesh.v(f, 1), mesh.v(f, 2));
        sp.face = f;
        if (sp.dist2 < best2 || (sp.dist2 == best2 && (best.face < 0 || f < best.face))) {
          best2 = sp.dist2;
          best = sp;
        }
      }
    } else {
      double dl = nodes_[node.left].box.dist2(r);
      double dr = nodes_[node.right].box.dist2(r);
      // push far child first so the near one is visited next
      if (dl <= dr) {
        if (dr <= best2) stack[top++] = {node.right, dr};
        if (dl <= best2) stack[top++] = {node.left, dl};
      } else {
        if (dl <= best2) stack[top++] = {node.left, dl};
        if (dr <= best2) stack[top++] = {node.right, dr};
      }
    }
  }
  if (best.face < 0) return std::nullopt;
  return best;
}

std::optional<int> Bvh::count_ray_crossings(const TriMesh& mesh, const Vec3& origin,
                                            const Vec3& dir) const {
  Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  int count = 0;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const NodeRec& node = nodes_[stack[--top]];
    if (!ray_box(origin, inv, node.box)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        int f = face_order_[i];
        auto hit = ray_triangle(origin, dir, mesh.v(f, 0), mesh.v(f, 1), mesh.v(f, 2));
        if (!hit) continue;
        if (hit->min_bary < 1e-12 || hit->t < 1e-12) return std::nullopt;  // feature graze
        ++count;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return count;
}

int Bvh::sign_at(const TriMesh& mesh, const Vec3& r) const {
  auto crossings = count_ray_crossings(mesh, r, kRayDir0);
  if (!crossings) crossings = count_ray_crossings(mesh, r, kRayDir1);
  if (!crossings) {
    // both fixed directions grazed a feature: nudge is not allowed to change
    // determinism, fall back to parity of the second cast's non-grazing hits
    // via a third fixed direction.
    crossings = count_ray_crossings(mesh, r, normalized(Vec3{-0.0119, 0.0233, 1.0}));
  }
  if (!crossings) return 1;  // pathological; treat as outside
  return (*crossings % 2 == 0) ? 1 : -1;
}

}  // namespace dg
