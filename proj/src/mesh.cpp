#include "diffgrasp/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dg {

void TriMesh::finalize() {
  face_normals.assign(faces.size(), Vec3{});
  face_areas.assign(faces.size(), 0.0);
  total_area = 0.0;
  bounds = Box3{};
  for (const Vec3& p : vertices) bounds.expand(p);

  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int idx = faces[f][k];
      if (idx < 0 || idx >= static_cast<int>(vertices.size()))
        throw std::runtime_error("mesh: face " + std::to_string(f) + " references vertex " +
                                 std::to_string(idx) + " out of range");
    }
    Vec3 n = cross(v(f, 1) - v(f, 0), v(f, 2) - v(f, 0));
    double a2 = norm(n);
    if (a2 <= 1e-16)
      throw std::runtime_error("mesh: degenerate (zero area) face " + std::to_string(f));
    face_normals[f] = n / a2;
    face_areas[f] = 0.5 * a2;
    total_area += face_areas[f];
  }

  // Each directed edge must appear exactly once and its opposite exactly once.
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = faces[f][k], b = faces[f][(k + 1) % 3];
      if (a == b)
        throw std::runtime_error("mesh: face " + std::to_string(f) + " repeats vertex " +
                                 std::to_string(a));
      auto ins = directed.emplace(std::make_pair(a, b), static_cast<int>(f));
      if (!ins.second)
        throw std::runtime_error("mesh: not watertight, directed edge (" + std::to_string(a) +
                                 "," + std::to_string(b) + ") shared by faces " +
                                 std::to_string(ins.first->second) + " and " + std::to_string(f));
    }
  }
  for (const auto& [edge, f] : directed) {
    if (!directed.count({edge.second, edge.first}))
      throw std::runtime_error("mesh: not watertight, edge (" + std::to_string(edge.first) + "," +
                               std::to_string(edge.second) + ") of face " + std::to_string(f) +
                               " has no opposite");
  }

  if (signed_volume() <= 0.0)
    throw std::runtime_error("mesh: inconsistent winding, signed volume is not positive");

  vertex_normals.assign(vertices.size(), Vec3{});
  for (std::size_t f = 0; f < faces.size(); ++f) {
    Vec3 w = face_areas[f] * face_normals[f];
    for (int k = 0; k < 3; ++k) vertex_normals[faces[f][k]] += w;
  }
  for (std::size_t i = 0; i < vertex_normals.size(); ++i) {
    double n = norm(vertex_normals[i]);
    if (n <= 1e-16)
      throw std::runtime_error("mesh: vertex " + std::to_string(i) + " has zero normal");
    vertex_normals[i] = vertex_normals[i] / n;
  }
}

void TriMesh::set_vertex_normals(std::vector<Vec3> normals) {
  if (normals.size() != vertices.size())
    throw std::runtime_error("mesh: normal count does not match vertex count");
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (std::abs(norm(normals[i]) - 1.0) > 1e-9)
      throw std::runtime_error("mesh: normal " + std::to_string(i) + " is not unit length");
  }
  vertex_normals = std::move(normals);
}

double TriMesh::signed_volume() const {
  double vol = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f)
    vol += dot(v(f, 0), cross(v(f, 1), v(f, 2))) / 6.0;
  return vol;
}

Vec3 TriMesh::centroid() const {
  Vec3 c{};
  for (std::size_t f = 0; f < faces.size(); ++f)
    c += face_areas[f] * ((v(f, 0) + v(f, 1) + v(f, 2)) / 3.0);
  return c / total_area;
}

double TriMesh::bounding_radius(const Vec3& c) const {
  double r2 = 0.0;
  for (const Vec3& p : vertices) r2 = std::max(r2, squared_norm(p - c));
  return std::sqrt(r2);
}

TriMesh TriMesh::transformed(const Mat3& R, const Vec3& t) const {
  TriMesh out;
  out.vertices.reserve(vertices.size());
  for (const Vec3& p : vertices) out.vertices.push_back(R * p + t);
  out.faces = faces;
  out.finalize();
  return out;
}

TriMesh load_obj(std::istream& in, const std::string& name) {
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": malformed vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i//n", "i/t/n": the vertex index is before the first '/'
        std::size_t slash = tok.find('/');
        int i = 0;
        try {
          i = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
        } catch (const std::exception&) {
          throw std::runtime_error(name + ":" + std::to_string(lineno) + ": malformed face index '" + tok + "'");
        }
        if (i < 0) i = static_cast<int>(mesh.vertices.size()) + i + 1;  // negative = relative
        if (i <= 0 || i > static_cast<int>(mesh.vertices.size()))
          throw std::runtime_error(name + ":" + std::to_string(lineno) + ": face index out of range");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3)
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
    // vn / vt / o / g / s / usemtl / mtllib: ignored
  }
  if (mesh.faces.empty())
    throw std::runtime_error(name + ": no faces found");
  mesh.finalize();
  return mesh;
}

TriMesh load_obj_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return load_obj(in, path);
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  char buf[128];
  for (const Vec3& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw std::runtime_error("failed writing mesh file: " + path);
}

}  // namespace dg
