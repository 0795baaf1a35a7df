#pragma once

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "diffgrasp/vec.hpp"

namespace dg {

// Watertight triangle mesh in canonical pose. Lengths in meters. Vertex
// normals default to area-weighted averages of incident face normals and may
// be overridden (e.g. with analytic normals) for Phong-SDF experiments.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> vertex_normals;

  // derived, filled by finalize()
  std::vector<Vec3> face_normals;
  std::vector<double> face_areas;
  double total_area = 0.0;
  Box3 bounds;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }

  const Vec3& v(int face, int corner) const { return vertices[faces[face][corner]]; }

  // Recomputes face data, checks watertightness/winding/degeneracy and
  // computes area-weighted vertex normals. Throws std::runtime_error with the
  // offending edge/face on invalid input.
  void finalize();

  // Replaces vertex normals (unit length enforced to 1e-9).
  void set_vertex_normals(std::vector<Vec3> normals);

  double signed_volume() const;
  Vec3 centroid() const;  // area-weighted surface centroid
  // radius of the bounding sphere centered at `c`
  double bounding_radius(const Vec3& c) const;

  TriMesh transformed(const Mat3& R, const Vec3& t) const;
};

// ASCII OBJ: v/f records only, any vn/vt in the file are ignored and normals
// recomputed. Polygon faces are fan-triangulated. Units: meters.
TriMesh load_obj(std::istream& in, const std::string& name = "<stream>");
TriMesh load_obj_file(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

}  // namespace dg
