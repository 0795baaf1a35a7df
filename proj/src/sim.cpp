#include "diffgrasp/sim.hpp"

#include <algorithm>
#include <cmath>

namespace dg {

double kinetic_energy(const RigidState& s, const InertialData& inertial) {
  Mat3 R = rotation_matrix(s.theta);
  Mat3 iw = R * inertial.inertia_body * transposed(R);
  return 0.5 * inertial.mass * squared_norm(s.xdot) + 0.5 * dot(s.thetadot, iw * s.thetadot);
}

RigidState step_on_table(const RigidState& state, const TriMesh& mesh,
                         const InertialData& inertial, const SimParams& params,
                         SolveStats* stats) {
  BodyStateT<double> prev = to_body_state<double>(state);
  BodyStateT<double> st = predict(prev, params);
  const double inv_mass = 1.0 / inertial.mass;
  const Mat3 iw_inv = sim_detail::world_inertia_inv(st.theta, inertial);
  const Vec3 zhat{0.0, 0.0, 1.0};
  bool touched = false;

  struct Slot {
    bool active = false;
    double lambda_n = 0.0;
  };
  std::vector<Slot> slots(mesh.vertices.size());

  for (int sweep = 0; sweep < params.gs_iters; ++sweep) {
    Mat3 R = rotation_matrix(st.theta);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      Vec3 w = st.x + R * (mesh.vertices[i] - inertial.com);
      double C = -w.z;
      if (C <= 0.0) continue;
      Vec3 arm = w - st.x;
      Vec3 a = -cross(arm, zhat);  // dC/domega
      Vec3 iwa = iw_inv * a;
      double w_eff = inv_mass + dot(a, iwa);
      if (w_eff < 1e-12) {
        if (stats) ++stats->singular_skipped;
        continue;
      }
      double lam = C / w_eff;
      st.x += (inv_mass * lam) * zhat;  // -M^-1 J^T lambda with J_lin = -z
      st.theta = normalized(quat_exp(-lam * iwa) * st.theta);
      R = rotation_matrix(st.theta);
      touched = true;
      if (!slots[i].active && stats) ++stats->active_contacts;
      slots[i].active = true;
      slots[i].lambda_n += lam;
      if (stats) ++stats->corrections;
    }
  }

  if (params.mu > 0.0) {
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      if (!slots[i].active || slots[i].lambda_n <= 0.0) continue;
      Vec3 rb = mesh.vertices[i] - inertial.com;
      Vec3 before = prev.x + rotate(prev.theta, rb);
      Vec3 arm = rotate(st.theta, rb);
      Vec3 after = st.x + arm;
      Vec3 u = after - before;
      Vec3 u_t{u.x, u.y, 0.0};
      double ut_norm = norm(u_t);
      if (ut_norm < 1e-12) continue;
      Vec3 t = u_t / ut_norm;
      Vec3 at = cross(arm, t);
      Vec3 iwat = iw_inv * at;
      double w_t = inv_mass + dot(at, iwat);
      if (w_t < 1e-12) continue;
      double lam_t = std::min(ut_norm / w_t, params.mu * slots[i].lambda_n);
      st.x -= (inv_mass * lam_t) * t;
      st.theta = normalized(quat_exp(-lam_t * iwat) * st.theta);
      touched = true;
      if (stats) ++stats->corrections;
    }
  }

  // without corrections the predicted velocities stand, keeping free flight exact
  if (touched) {
    st.xdot = (st.x - prev.x) * (1.0 / params.dt);
    st.thetadot = quat_log(st.theta * prev.theta.conjugate()) * (1.0 / params.dt);
  }

  if (stats && stats->measure_residual) {
    Mat3 R = rotation_matrix(st.theta);
    for (const Vec3& v : mesh.vertices) {
      double z = (st.x + R * (v - inertial.com)).z;
      if (z < 0.0) stats->max_penetration = std::max(stats->max_penetration, -z);
    }
  }
  return to_rigid_state(st);
}

}  // namespace dg
