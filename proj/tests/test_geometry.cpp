#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "diffgrasp/assets.hpp"
#include "diffgrasp/bvh.hpp"
#include "diffgrasp/mesh.hpp"
#include "diffgrasp/sdf.hpp"

using namespace dg;

namespace {

TriMesh tetrahedron() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  m.finalize();
  return m;
}

// brute-force closest point over all faces
SurfacePoint brute_closest(const TriMesh& mesh, const Vec3& r) {
  SurfacePoint best;
  best.dist2 = 1e300;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    SurfacePoint sp = closest_point_on_triangle(r, mesh.v(f, 0), mesh.v(f, 1), mesh.v(f, 2));
    if (sp.dist2 < best.dist2) {
      best = sp;
      best.face = static_cast<int>(f);
    }
  }
  return best;
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

Vec3 random_in_box(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("open surface is rejected as not watertight") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  CHECK_THROWS_WITH_AS(m.finalize(), doctest::Contains("watertight"), std::runtime_error);
}

TEST_CASE("degenerate face is rejected with its index") {
  TriMesh m = tetrahedron();
  m.vertices.push_back(m.vertices[0]);  // duplicate -> zero area triangle possible
  m.faces.push_back({0, 4, 2});
  m.faces.push_back({0, 2, 4});
  CHECK_THROWS_AS(m.finalize(), std::runtime_error);
}

TEST_CASE("tetrahedron BVH holds all four faces in leaves") {
  TriMesh m = tetrahedron();
  Bvh bvh = Bvh::build(m);
  int leaf_faces = 0;
  for (const auto& n : bvh.nodes())
    if (n.left < 0) leaf_faces += n.count;
  CHECK(leaf_faces == 4);
}

TEST_CASE("every face of an icosphere is reachable from the BVH root") {
  TriMesh m = make_icosphere(1.0, 3);
  REQUIRE(m.num_faces() == 1280);
  Bvh bvh = Bvh::build(m);
  std::set<int> seen;
  for (const auto& n : bvh.nodes()) {
    if (n.left >= 0) continue;
    for (int i = n.first; i < n.first + n.count; ++i) seen.insert(bvh.face_order()[i]);
  }
  CHECK(seen.size() == m.num_faces());
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == static_cast<int>(m.num_faces()) - 1);
}

TEST_CASE("child boxes are contained in their parents") {
  TriMesh m = make_blob(1.0, 3, 0.4, 3);
  Bvh bvh = Bvh::build(m);
  for (const auto& n : bvh.nodes()) {
    if (n.left < 0) continue;
    for (int child : {n.left, n.right}) {
      const Box3& cb = bvh.nodes()[child].box;
      for (int k = 0; k < 3; ++k) {
        CHECK(cb.lo[k] >= n.box.lo[k] - 1e-12);
        CHECK(cb.hi[k] <= n.box.hi[k] + 1e-12);
      }
    }
  }
}

TEST_CASE("closest point above a face centroid has uniform barycentrics") {
  TriMesh m = tetrahedron();
  Bvh bvh = Bvh::build(m);
  // face 3 = (1,2,3) plane x+y+z=1, outward normal (1,1,1)/sqrt(3)
  Vec3 centroid = (m.vertices[1] + m.vertices[2] + m.vertices[3]) / 3.0;
  Vec3 n = normalized(Vec3{1, 1, 1});
  SurfacePoint sp = bvh.closest_point(m, centroid + 0.5 * n);
  CHECK(sp.face == 3);
  CHECK(sp.bary.x == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(sp.bary.y == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(sp.bary.z == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("query far beyond a vertex snaps to that vertex") {
  TriMesh m = tetrahedron();
  Bvh bvh = Bvh::build(m);
  SurfacePoint sp = bvh.closest_point(m, Vec3{-3, -3, -3});
  CHECK(norm(sp.position - m.vertices[0]) < 1e-12);
  CHECK(sp.bary[0] + sp.bary[1] + sp.bary[2] == doctest::Approx(1.0));
  CHECK(*std::max_element(&sp.bary[0], &sp.bary[0] + 3) == doctest::Approx(1.0));
}

TEST_CASE("BVH closest point matches brute force on 1000 random queries") {
  TriMesh m = make_blob(1.0, 2, 0.5, 17);  // 320 faces... use subdiv 3 for 500+
  TriMesh m2 = make_blob(1.0, 3, 0.5, 17);
  REQUIRE(m2.num_faces() >= 500);
  Bvh bvh = Bvh::build(m2);
  auto rng = make_rng(42);
  for (int i = 0; i < 1000; ++i) {
    Vec3 r = random_in_box(rng, -2.0, 2.0);
    SurfacePoint fast = bvh.closest_point(m2, r);
    SurfacePoint slow = brute_closest(m2, r);
    CHECK(std::abs(std::sqrt(fast.dist2) - std::sqrt(slow.dist2)) < 1e-9);
  }
}

TEST_CASE("surface point invariant: position equals barycentric combination") {
  TriMesh m = make_icosphere(1.0, 2);
  Bvh bvh = Bvh::build(m);
  auto rng = make_rng(7);
  for (int i = 0; i < 200; ++i) {
    Vec3 r = random_in_box(rng, -1.5, 1.5);
    SurfacePoint sp = bvh.closest_point(m, r);
    Vec3 combo = sp.bary.x * m.v(sp.face, 0) + sp.bary.y * m.v(sp.face, 1) + sp.bary.z * m.v(sp.face, 2);
    CHECK(norm(combo - sp.position) < 1e-9);
  }
}

TEST_CASE("cube SDF signs and values") {
  MeshSdf sdf(make_box(2.0, 2.0, 2.0));
  CHECK(sdf.phi(Vec3{2, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sdf.phi(Vec3{0, 0, 0}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("on-surface query reports zero with outside sign") {
  MeshSdf sdf(make_box(2.0, 2.0, 2.0));
  CHECK(sdf.phi(Vec3{1.0, 0.2, -0.3}) == 0.0);
  PhongQuery q = sdf.phong(Vec3{1.0, 0.2, -0.3});
  CHECK(q.sign == 1);
}

TEST_CASE("icosphere SDF matches the analytic sphere within facet sag") {
  MeshSdf sdf(make_icosphere(1.0, 4));
  auto rng = make_rng(99);
  std::uniform_real_distribution<double> radial(0.6, 1.6);
  for (int i = 0; i < 500; ++i) {
    Vec3 dir = normalized(random_in_box(rng, -1.0, 1.0));
    Vec3 r = radial(rng) * dir;
    double analytic = norm(r) - 1.0;
    CHECK(std::abs(sdf.phi(r) - analytic) < 2e-3);
  }
}

TEST_CASE("sign consistency: interior of a watertight mesh is negative") {
  MeshSdf sdf(make_blob(1.0, 3, 0.4, 5));
  auto rng = make_rng(13);
  for (int i = 0; i < 200; ++i) {
    Vec3 r = 0.3 * normalized(random_in_box(rng, -1.0, 1.0));
    CHECK(sdf.phi(r) < 0.0);  // blob radius never shrinks below ~0.33
  }
}

TEST_CASE("phong equals phi when vertex normals are the flat face normals") {
  // a cube has flat faces; with alpha=0 the phong point is the flat point
  MeshSdf sdf(make_box(1.0, 1.0, 1.0), 0.0);
  auto rng = make_rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec3 r = random_in_box(rng, -1.0, 1.0);
    PhongQuery q = sdf.phong(r);
    CHECK(q.rho == doctest::Approx(sdf.phi(r)).epsilon(1e-12));
  }
}

TEST_CASE("degenerate phong: projections are identities on a flat patch") {
  // tetra face x+y+z=1 with vertex normals set to the true face normal
  TriMesh m = tetrahedron();
  std::vector<Vec3> normals(m.vertices.size());
  // assign each vertex the normal of face 3 (valid unit vectors; only face 3
  // queries are checked)
  for (auto& n : normals) n = normalized(Vec3{1, 1, 1});
  m.set_vertex_normals(normals);
  MeshSdf sdf(std::move(m), 0.75);
  Vec3 fc = Vec3{1.0 / 3, 1.0 / 3, 1.0 / 3};
  Vec3 r = fc + 0.3 * normalized(Vec3{1, 1, 1});
  PhongQuery q = sdf.phong(r);
  CHECK(q.rho == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(norm(q.smoothed_point - fc) < 1e-9);
}

TEST_CASE("phong with true sphere normals beats the flat SDF on shell queries") {
  TriMesh m = make_icosphere(1.0, 3);
  std::vector<Vec3> normals;
  normals.reserve(m.vertices.size());
  for (const Vec3& v : m.vertices) normals.push_back(normalized(v));
  m.set_vertex_normals(normals);
  MeshSdf sdf(std::move(m), 0.75);

  auto rng = make_rng(2024);
  std::uniform_real_distribution<double> radial(0.85, 1.15);
  double err_phong = 0.0, err_flat = 0.0;
  for (int i = 0; i < 500; ++i) {
    Vec3 r = radial(rng) * normalized(random_in_box(rng, -1.0, 1.0));
    double analytic = norm(r) - 1.0;
    err_flat += std::abs(sdf.phi(r) - analytic);
    err_phong += std::abs(sdf.phong(r).rho - analytic);
  }
  CHECK(err_phong < err_flat);  // strict mean-error reduction
}

TEST_CASE("phong gradient is unit and points toward increasing rho") {
  MeshSdf sdf(make_icosphere(1.0, 3));
  auto rng = make_rng(31);
  for (int i = 0; i < 100; ++i) {
    Vec3 r = (0.5 + 1.0 * i / 100.0) * normalized(random_in_box(rng, -1.0, 1.0));
    PhongQuery q = sdf.phong(r);
    if (std::abs(q.rho) < 1e-9) continue;
    CHECK(std::abs(norm(q.grad) - 1.0) < 1e-6);
    double h = 1e-5;
    double ahead = sdf.phong(r + h * q.grad).rho;
    CHECK(ahead > q.rho);
  }
}

TEST_CASE("eikonal spot check") {
  // relaxed band across facet discontinuities on a blob; near-exact on a sphere
  MeshSdf blob(make_blob(1.0, 3, 0.4, 21));
  auto rng = make_rng(55);
  double h = 1e-4;
  for (int i = 0; i < 200; ++i) {
    Vec3 r = random_in_box(rng, -1.8, 1.8);
    PhongQuery q = blob.phong(r);
    if (std::abs(q.rho) < 5e-3) continue;  // skip the surface band
    double ratio = (blob.phi(r + h * q.grad) - blob.phi(r)) / h;
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.2);
  }

  TriMesh sphere = make_icosphere(1.0, 4);
  std::vector<Vec3> normals;
  for (const Vec3& v : sphere.vertices) normals.push_back(normalized(v));
  sphere.set_vertex_normals(normals);
  MeshSdf ssdf(std::move(sphere), 0.75);
  for (int i = 0; i < 100; ++i) {
    Vec3 r = (1.3 + 0.005 * i) * normalized(random_in_box(rng, -1.0, 1.0));
    PhongQuery q = ssdf.phong(r);
    double analytic_dir = dot(q.grad, normalized(r));
    CHECK(std::abs(analytic_dir - 1.0) < 1e-3);
  }
}

TEST_CASE("dilation basic properties") {
  MeshSdf sdf(make_box(2.0, 2.0, 2.0));
  SUBCASE("radius 0 is identical to phong") {
    Vec3 r{1.7, 0.3, -0.2};
    CHECK(sdf.dilated(r, 0.0).rho == sdf.phong(r).rho);
  }
  SUBCASE("cube query at (1.5,0,0) with radius 0.02") {
    CHECK(sdf.dilated(Vec3{1.5, 0, 0}, 0.02).rho == doctest::Approx(0.48).epsilon(1e-9));
  }
  SUBCASE("negative radius rejected") {
    CHECK_THROWS_AS(sdf.dilated(Vec3{1.5, 0, 0}, -0.1), std::invalid_argument);
  }
  SUBCASE("strictly linear decrease in radius") {
    Vec3 r{1.9, 0.4, 0.1};
    double base = sdf.dilated(r, 0.0).rho;
    for (double rad : {0.01, 0.05, 0.2}) {
      CHECK(sdf.dilated(r, rad).rho == doctest::Approx(base - rad).epsilon(1e-12));
    }
  }
}

TEST_CASE("dilated zero level set of a sphere sits at radius + dilation") {
  MeshSdf sdf(make_icosphere(1.0, 3));
  auto rng = make_rng(77);
  for (int i = 0; i < 50; ++i) {
    Vec3 dir = normalized(random_in_box(rng, -1.0, 1.0));
    // bisect the dilated SDF along the ray
    double lo = 0.9, hi = 1.3;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (sdf.dilated(mid * dir, 0.05).rho < 0.0 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - 1.05) < 6e-3);  // facet sag of subdiv 3
  }
}

TEST_CASE("recorded SDF value matches the direct query and differentiates") {
  MeshSdf sdf(make_icosphere(1.0, 3));
  Vec3 r0{0.9, 0.35, -0.4};
  PhongQuery direct = sdf.dilated(r0, 0.02);

  Tape tape;
  Tape::Scope scope(tape);
  Vec3T<Rec> r{tape.input(r0.x), tape.input(r0.y), tape.input(r0.z)};
  Vec3T<Rec> grad;
  Rec rho = sdf.record_dilated(r, 0.02, &grad);
  tape.set_output(rho);
  CHECK(rho.v == doctest::Approx(direct.rho).epsilon(1e-12));
  auto g = tape.gradient();
  CHECK(g[0] == doctest::Approx(direct.grad.x).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(direct.grad.y).epsilon(1e-9));
  CHECK(g[2] == doctest::Approx(direct.grad.z).epsilon(1e-9));
}

TEST_CASE("OBJ round trip preserves geometry") {
  TriMesh m = make_cylinder(0.02, 0.08, 24);
  std::string path = "test_cylinder_tmp.obj";
  save_obj(m, path);
  TriMesh back = load_obj_file(path);
  REQUIRE(back.num_vertices() == m.num_vertices());
  REQUIRE(back.num_faces() == m.num_faces());
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    CHECK(norm(back.vertices[i] - m.vertices[i]) < 1e-9);
  std::remove(path.c_str());
}
