#include "diffgrasp/rigid.hpp"

#include <cmath>
#include <stdexcept>

namespace dg {

namespace {
// face integral helper (Eberly, "Polyhedral Mass Properties")
inline void subexpressions(double w0, double w1, double w2, double& f1, double& f2, double& f3,
                           double& g0, double& g1, double& g2) {
  double t0 = w0 + w1;
  double t1 = w0 * w0;
  double t2 = t1 + w1 * t0;
  f1 = t0 + w2;
  f2 = t2 + w2 * f1;
  f3 = w0 * t1 + w1 * t2 + w2 * f2;
  g0 = f2 + w0 * (f1 + w0);
  g1 = f2 + w1 * (f1 + w1);
  g2 = f2 + w2 * (f1 + w2);
}
}  // namespace

InertialData inertia_from_mesh(const TriMesh& mesh, double density) {
  if (mesh.face_normals.size() != mesh.faces.size())
    throw std::runtime_error("inertia_from_mesh: mesh not finalized");
  if (density <= 0.0) throw std::invalid_argument("density must be > 0");

  // integrals: 1, x, y, z, x^2, y^2, z^2, xy, yz, zx
  double intg[10] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const double mult[10] = {1.0 / 6,  1.0 / 24, 1.0 / 24, 1.0 / 24, 1.0 / 60,
                           1.0 / 60, 1.0 / 60, 1.0 / 120, 1.0 / 120, 1.0 / 120};

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3& p0 = mesh.v(f, 0);
    const Vec3& p1 = mesh.v(f, 1);
    const Vec3& p2 = mesh.v(f, 2);
    Vec3 d = cross(p1 - p0, p2 - p0);  // unnormalized normal

    double f1x, f2x, f3x, g0x, g1x, g2x;
    double f1y, f2y, f3y, g0y, g1y, g2y;
    double f1z, f2z, f3z, g0z, g1z, g2z;
    subexpressions(p0.x, p1.x, p2.x, f1x, f2x, f3x, g0x, g1x, g2x);
    subexpressions(p0.y, p1.y, p2.y, f1y, f2y, f3y, g0y, g1y, g2y);
    subexpressions(p0.z, p1.z, p2.z, f1z, f2z, f3z, g0z, g1z, g2z);

    intg[0] += d.x * f1x;
    intg[1] += d.x * f2x;
    intg[2] += d.y * f2y;
    intg[3] += d.z * f2z;
    intg[4] += d.x * f3x;
    intg[5] += d.y * f3y;
    intg[6] += d.z * f3z;
    intg[7] += d.x * (p0.y * g0x + p1.y * g1x + p2.y * g2x);
    intg[8] += d.y * (p0.z * g0y + p1.z * g1y + p2.z * g2y);
    intg[9] += d.z * (p0.x * g0z + p1.x * g1z + p2.x * g2z);
  }
  for (int i = 0; i < 10; ++i) intg[i] *= mult[i];

  double volume = intg[0];
  if (volume <= 0.0) throw std::runtime_error("inertia_from_mesh: non-positive volume");

  InertialData out;
  out.mass = density * volume;
  out.com = Vec3{intg[1], intg[2], intg[3]} / volume;

  // inertia about the COM
  double xx = intg[5] + intg[6] - volume * (out.com.y * out.com.y + out.com.z * out.com.z);
  double yy = intg[4] + intg[6] - volume * (out.com.z * out.com.z + out.com.x * out.com.x);
  double zz = intg[4] + intg[5] - volume * (out.com.x * out.com.x + out.com.y * out.com.y);
  double xy = -(intg[7] - volume * out.com.x * out.com.y);
  double yz = -(intg[8] - volume * out.com.y * out.com.z);
  double zx = -(intg[9] - volume * out.com.z * out.com.x);

  Mat3 I;
  I.m = {xx, xy, zx, xy, yy, yz, zx, yz, zz};
  for (double& e : I.m) e *= density;
  out.inertia_body = I;

  // closed-form 3x3 inverse
  const auto& m = I.m;
  double c00 = m[4] * m[8] - m[5] * m[7];
  double c01 = m[5] * m[6] - m[3] * m[8];
  double c02 = m[3] * m[7] - m[4] * m[6];
  double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  if (!(det > 0.0)) throw std::runtime_error("inertia_from_mesh: inertia tensor not positive definite");
  Mat3 inv;
  inv.m = {c00, m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
           c01, m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
           c02, m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
  for (double& e : inv.m) e /= det;
  out.inertia_body_inv = inv;
  return out;
}

}  // namespace dg
