#include "diffgrasp/assets.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace dg {

namespace {
constexpr double kPi = 3.14159265358979323846;

Mat3 rpy_matrix_local(const Vec3& rpy) {
  double cr = std::cos(rpy.x), sr = std::sin(rpy.x);
  double cp = std::cos(rpy.y), sp = std::sin(rpy.y);
  double cy = std::cos(rpy.z), sy = std::sin(rpy.z);
  Mat3 R;
  R.m = {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr};
  return R;
}
}  // namespace

TriMesh make_box(double sx, double sy, double sz) {
  TriMesh m;
  double hx = 0.5 * sx, hy = 0.5 * sy, hz = 0.5 * sz;
  m.vertices = {{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
                {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz}};
  m.faces = {{0, 2, 1}, {0, 3, 2},   // -z
             {4, 5, 6}, {4, 6, 7},   // +z
             {0, 1, 5}, {0, 5, 4},   // -y
             {2, 3, 7}, {2, 7, 6},   // +y
             {1, 2, 6}, {1, 6, 5},   // +x
             {3, 0, 4}, {3, 4, 7}};  // -x
  m.finalize();
  return m;
}

TriMesh make_icosphere(double radius, int subdivisions) {
  double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      verts.push_back(0.5 * (verts[a] + verts[b]));
      int id = static_cast<int>(verts.size() - 1);
      midpoints[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  TriMesh m;
  m.vertices.reserve(verts.size());
  for (const Vec3& v : verts) m.vertices.push_back(radius * normalized(v));
  m.faces = std::move(faces);
  m.finalize();
  return m;
}

TriMesh make_uv_sphere(double radius, int segments, int rings) {
  if (segments < 3 || rings < 3) throw std::invalid_argument("uv sphere needs segments,rings >= 3");
  TriMesh m;
  m.vertices.push_back({0, 0, radius});
  for (int r = 1; r < rings; ++r) {
    double phi = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      double th = 2.0 * kPi * s / segments;
      m.vertices.push_back({radius * std::sin(phi) * std::cos(th),
                            radius * std::sin(phi) * std::sin(th), radius * std::cos(phi)});
    }
  }
  m.vertices.push_back({0, 0, -radius});
  int bottom = static_cast<int>(m.vertices.size() - 1);
  auto ring_v = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) m.faces.push_back({0, ring_v(1, s), ring_v(1, s + 1)});
  for (int r = 1; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      int a = ring_v(r, s), b = ring_v(r, s + 1), c = ring_v(r + 1, s + 1), d = ring_v(r + 1, s);
      m.faces.push_back({a, d, c});
      m.faces.push_back({a, c, b});
    }
  }
  for (int s = 0; s < segments; ++s)
    m.faces.push_back({bottom, ring_v(rings - 1, s + 1), ring_v(rings - 1, s)});
  m.finalize();
  return m;
}

TriMesh make_cylinder(double radius, double height, int segments) {
  if (segments < 3) throw std::invalid_argument("cylinder needs >= 3 segments");
  TriMesh m;
  double hz = 0.5 * height;
  for (int s = 0; s < segments; ++s) {
    double th = 2.0 * kPi * s / segments;
    double x = radius * std::cos(th), y = radius * std::sin(th);
    m.vertices.push_back({x, y, -hz});
    m.vertices.push_back({x, y, hz});
  }
  int cb = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0, 0, -hz});
  int ct = cb + 1;
  m.vertices.push_back({0, 0, hz});
  for (int s = 0; s < segments; ++s) {
    int n = (s + 1) % segments;
    int b0 = 2 * s, t0 = 2 * s + 1, b1 = 2 * n, t1 = 2 * n + 1;
    m.faces.push_back({b0, b1, t1});
    m.faces.push_back({b0, t1, t0});
    m.faces.push_back({cb, b1, b0});
    m.faces.push_back({ct, t0, t1});
  }
  m.finalize();
  return m;
}

TriMesh make_blob(double radius, int subdivisions, double amplitude, std::uint64_t seed) {
  TriMesh sphere = make_icosphere(1.0, subdivisions);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  // smooth directional field: a few random quadratic lobes
  struct Lobe { Vec3 u; double a, b; };
  std::vector<Lobe> lobes(4);
  for (auto& l : lobes) {
    l.u = normalized(Vec3{uni(rng), uni(rng), uni(rng)});
    l.a = uni(rng);
    l.b = uni(rng);
  }
  TriMesh m;
  m.vertices.reserve(sphere.vertices.size());
  for (const Vec3& v : sphere.vertices) {
    Vec3 d = normalized(v);
    double f = 0.0;
    for (const auto& l : lobes) {
      double c = dot(d, l.u);
      f += l.a * c * c + l.b * c;
    }
    m.vertices.push_back(radius * (1.0 + amplitude * f / 6.0) * d);
  }
  m.faces = sphere.faces;
  m.finalize();
  return m;
}

namespace {

// declarative description so that programmatic builds and the XML emitter
// always agree
struct HandSpec {
  struct LinkSpec { std::string name; TriMesh mesh; };
  struct JointSpec {
    std::string name, parent, child;
    Vec3 xyz, rpy, axis;
    double lower, upper;
  };
  std::string name;
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
};

HandModel build_from_spec(const HandSpec& spec, int budget, std::uint64_t seed) {
  std::vector<HandLink> links;
  std::map<std::string, int> index;
  for (const auto& l : spec.links) {
    index[l.name] = static_cast<int>(links.size());
    HandLink link;
    link.name = l.name;
    link.mesh = l.mesh;
    link.mesh_file = l.name + ".obj";
    links.push_back(std::move(link));
  }
  std::vector<HandJoint> joints;
  for (const auto& j : spec.joints) {
    HandJoint joint;
    joint.name = j.name;
    joint.parent_link = index.at(j.parent);
    joint.child_link = index.at(j.child);
    joint.axis = normalized(j.axis);
    joint.origin_R = rpy_matrix_local(j.rpy);
    joint.origin_t = j.xyz;
    joint.lower = j.lower;
    joint.upper = j.upper;
    joints.push_back(std::move(joint));
  }
  return HandModel::assemble(spec.name, std::move(links), std::move(joints), budget, seed);
}

void write_spec(const HandSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& l : spec.links) save_obj(l.mesh, dir + "/" + l.name + ".obj");
  std::ofstream out(dir + "/" + spec.name + ".xml");
  if (!out) throw std::runtime_error("cannot write " + dir + "/" + spec.name + ".xml");
  char buf[256];
  out << "<robot name=\"" << spec.name << "\">\n";
  for (const auto& l : spec.links)
    out << "  <link name=\"" << l.name << "\"><mesh filename=\"" << l.name << ".obj\"/></link>\n";
  for (const auto& j : spec.joints) {
    out << "  <joint name=\"" << j.name << "\" type=\"revolute\">\n";
    out << "    <parent link=\"" << j.parent << "\"/>\n";
    out << "    <child link=\"" << j.child << "\"/>\n";
    std::snprintf(buf, sizeof(buf), "    <origin xyz=\"%.9g %.9g %.9g\" rpy=\"%.9g %.9g %.9g\"/>\n",
                  j.xyz.x, j.xyz.y, j.xyz.z, j.rpy.x, j.rpy.y, j.rpy.z);
    out << buf;
    std::snprintf(buf, sizeof(buf), "    <axis xyz=\"%.9g %.9g %.9g\"/>\n", j.axis.x, j.axis.y, j.axis.z);
    out << buf;
    std::snprintf(buf, sizeof(buf), "    <limit lower=\"%.9g\" upper=\"%.9g\"/>\n", j.lower, j.upper);
    out << buf;
    out << "  </joint>\n";
  }
  out << "</robot>\n";
}

HandSpec three_finger_spec() {
  HandSpec spec;
  spec.name = "barrett3";
  TriMesh palm = make_box(0.085, 0.085, 0.028);
  TriMesh knuckle = make_box(0.018, 0.022, 0.018);
  TriMesh prox = make_box(0.018, 0.018, 0.055);
  TriMesh dist = make_box(0.015, 0.015, 0.04);
  // link frames: palm centered at its own origin (approach axis +z), finger
  // boxes extend upward from their joint: shift so the box spans z in [0, L]
  auto shifted = [](TriMesh m, double dz) {
    for (auto& v : m.vertices) v.z += dz;
    m.finalize();
    return m;
  };
  spec.links.push_back({"palm", palm});
  const double attach_r = 0.033, palm_top = 0.014;
  struct Finger { std::string id; double azimuth; bool spread; double spread_lo, spread_hi; };
  std::vector<Finger> fingers = {{"f1", kPi / 3.0, true, 0.0, 1.0},
                                 {"f2", -kPi / 3.0, true, -1.0, 0.0},
                                 {"f3", kPi, false, 0, 0}};
  for (const auto& f : fingers) {
    spec.links.push_back({f.id + "_knuckle", shifted(knuckle, 0.009)});
    spec.links.push_back({f.id + "_prox", shifted(prox, 0.0275)});
    spec.links.push_back({f.id + "_dist", shifted(dist, 0.02)});
    Vec3 attach{attach_r * std::cos(f.azimuth), attach_r * std::sin(f.azimuth), palm_top};
    if (f.spread) {
      spec.joints.push_back({f.id + "_spread", "palm", f.id + "_knuckle", attach,
                             {0, 0, f.azimuth}, {0, 0, 1}, f.spread_lo, f.spread_hi});
    } else {
      // fixed mounting expressed as a tight revolute to keep the format small
      spec.joints.push_back({f.id + "_mount", "palm", f.id + "_knuckle", attach,
                             {0, 0, f.azimuth}, {0, 0, 1}, -0.02, 0.02});
    }
    spec.joints.push_back({f.id + "_prox_bend", f.id + "_knuckle", f.id + "_prox",
                           {0, 0, 0.018}, {0, 0, 0}, {0, -1, 0}, 0.0, 2.2});
    spec.joints.push_back({f.id + "_dist_bend", f.id + "_prox", f.id + "_dist",
                           {0, 0, 0.055}, {0, 0, 0}, {0, -1, 0}, 0.0, 2.0});
  }
  return spec;
}

HandSpec two_finger_spec() {
  HandSpec spec;
  spec.name = "pincher2";
  spec.links.push_back({"palm", make_box(0.07, 0.045, 0.024)});
  TriMesh prox = make_box(0.016, 0.016, 0.05);
  TriMesh dist = make_box(0.013, 0.013, 0.035);
  auto shifted = [](TriMesh m, double dz) {
    for (auto& v : m.vertices) v.z += dz;
    m.finalize();
    return m;
  };
  const double attach = 0.026, palm_top = 0.012;
  for (int k = 0; k < 2; ++k) {
    std::string id = k == 0 ? "fa" : "fb";
    double az = k == 0 ? 0.0 : kPi;
    spec.links.push_back({id + "_prox", shifted(prox, 0.025)});
    spec.links.push_back({id + "_dist", shifted(dist, 0.0175)});
    spec.joints.push_back({id + "_prox_bend", "palm", id + "_prox",
                           {attach * std::cos(az), attach * std::sin(az), palm_top},
                           {0, 0, az}, {0, -1, 0}, 0.0, 2.2});
    spec.joints.push_back({id + "_dist_bend", id + "_prox", id + "_dist",
                           {0, 0, 0.05}, {0, 0, 0}, {0, -1, 0}, 0.0, 2.0});
  }
  return spec;
}

}  // namespace

HandModel make_three_finger_hand(int sample_budget, std::uint64_t sample_seed) {
  return build_from_spec(three_finger_spec(), sample_budget, sample_seed);
}

HandModel make_two_finger_hand(int sample_budget, std::uint64_t sample_seed) {
  return build_from_spec(two_finger_spec(), sample_budget, sample_seed);
}

void write_standard_assets(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_obj(make_box(0.04, 0.04, 0.04), dir + "/cube.obj");
  save_obj(make_cylinder(0.0175, 0.07, 48), dir + "/cylinder.obj");
  save_obj(make_blob(0.021, 3, 0.5, 7), dir + "/blob.obj");
  save_obj(make_icosphere(0.025, 3), dir + "/sphere.obj");
  write_spec(three_finger_spec(), dir);
  write_spec(two_finger_spec(), dir);
}

}  // namespace dg
