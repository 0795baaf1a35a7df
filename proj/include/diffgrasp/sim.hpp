#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "diffgrasp/rigid.hpp"
#include "diffgrasp/sdf.hpp"
#include "diffgrasp/tape.hpp"
#include "diffgrasp/vec.hpp"

// Position-based dynamics for one rigid object against static hand sample
// points (non-penetration constraints from the object's Phong SDF) or a table
// half-space. Instantiated with S = double it is the fast forward integrator;
// with S = Rec the whole step is recorded on the active tape.

namespace dg {

struct LeakPolicy {
  double alpha_leak = 0.1;
};

// Biased contact-constraint gradient: the true grad(phi) while penetrating,
// a fraction alpha_leak of it otherwise. Used only in reverse passes; forward
// values are never altered by the policy.
inline Vec3 leaky_constraint_grad(double phi, const Vec3& grad_phi, const LeakPolicy& policy) {
  return phi < 0.0 ? grad_phi : policy.alpha_leak * grad_phi;
}

struct SimParams {
  double dt = 0.001;        // s
  double mu = 1.0;          // Coulomb friction coefficient
  int gs_iters = 8;         // Gauss-Seidel sweeps
  Vec3 gravity;             // m/s^2; zero inside stability-metric sims
  double dilation_radius = 0.0;  // m
  LeakPolicy leak;
};

struct SolveStats {
  int active_contacts = 0;   // distinct points that produced a correction
  int corrections = 0;       // positional updates applied
  int singular_skipped = 0;  // constraints skipped for singular effective mass
  double max_penetration = 0.0;  // residual max C after the solve (double path)
  double max_friction_ratio = 0.0;  // max |lambda_t| / (mu * lambda_n) over contacts
  bool measure_residual = false;
};

template <class S>
struct BodyStateT {
  Vec3T<S> x;                      // COM position
  QuatT<S> theta = QuatT<S>::identity();
  Vec3T<S> xdot;
  Vec3T<S> thetadot;               // world frame
};

template <class S>
BodyStateT<S> to_body_state(const RigidState& s) {
  BodyStateT<S> out;
  out.x = {S(s.x.x), S(s.x.y), S(s.x.z)};
  out.theta = {S(s.theta.w), S(s.theta.x), S(s.theta.y), S(s.theta.z)};
  out.xdot = {S(s.xdot.x), S(s.xdot.y), S(s.xdot.z)};
  out.thetadot = {S(s.thetadot.x), S(s.thetadot.y), S(s.thetadot.z)};
  return out;
}

inline RigidState to_rigid_state(const BodyStateT<double>& s) {
  return RigidState{s.x, s.theta, s.xdot, s.thetadot};
}

// symplectic Euler: velocities first, then pose
template <class S>
BodyStateT<S> predict(const BodyStateT<S>& state, const SimParams& params) {
  BodyStateT<S> out = state;
  out.xdot = state.xdot + Vec3T<S>{S(params.gravity.x * params.dt), S(params.gravity.y * params.dt),
                                   S(params.gravity.z * params.dt)};
  out.x = state.x + S(params.dt) * out.xdot;
  out.theta = normalized(quat_exp(S(params.dt) * state.thetadot) * state.theta);
  out.thetadot = state.thetadot;
  return out;
}

namespace sim_detail {

inline double dval(double x) { return x; }
inline double dval(const Rec& r) { return r.v; }

template <class S>
Vec3 values(const Vec3T<S>& v) { return {dval(v.x), dval(v.y), dval(v.z)}; }

template <class S>
Quat values(const QuatT<S>& q) { return {dval(q.w), dval(q.x), dval(q.y), dval(q.z)}; }

// world inertia inverse at a fixed orientation (frozen within the solve)
inline Mat3 world_inertia_inv(const Quat& q, const InertialData& inertial) {
  Mat3 R = rotation_matrix(q);
  return R * inertial.inertia_body_inv * transposed(R);
}

// frozen-coefficient contact update for a zero-depth constraint: the value is
// unchanged (C == 0) and freezing the Jacobian coefficients is exact there, so
// this only threads the leak channel through the state at minimal tape cost.
inline void apply_zero_depth_contact(BodyStateT<Rec>& st, const Rec& C, const Vec3& n_world,
                                     const Vec3& arm, double inv_mass, const Mat3& iw_inv) {
  Vec3 a = cross(arm, n_world);
  double w_eff = inv_mass + dot(a, iw_inv * a);
  if (w_eff < 1e-12) return;
  double lam_per_c = 1.0 / w_eff;
  Vec3 kx = -(inv_mass * lam_per_c) * n_world;
  Vec3 kw = -lam_per_c * (iw_inv * a);

  st.x.x = axpy(st.x.x, kx.x, C);
  st.x.y = axpy(st.x.y, kx.y, C);
  st.x.z = axpy(st.x.z, kx.z, C);

  // d/dC of normalized(quat_exp(kw*C) * theta) at C = 0 is 0.5*[0,kw]*theta
  Quat qv = values(st.theta);
  Quat g = Quat{0.0, 0.5 * kw.x, 0.5 * kw.y, 0.5 * kw.z} * qv;
  st.theta.w = axpy(st.theta.w, g.w, C);
  st.theta.x = axpy(st.theta.x, g.x, C);
  st.theta.y = axpy(st.theta.y, g.y, C);
  st.theta.z = axpy(st.theta.z, g.z, C);
}

}  // namespace sim_detail

// One rigid object whose pose is corrected against static world-frame hand
// points via the object's dilated Phong SDF (Gauss-Seidel over points in
// ascending index order), followed by Coulomb friction, then velocity update.
template <class S>
class ContactSolver {
 public:
  ContactSolver(const MeshSdf& sdf, const InertialData& inertial, const SimParams& params)
      : sdf_(sdf), inertial_(inertial), params_(params) {}

  BodyStateT<S> solve(const BodyStateT<S>& prev, const BodyStateT<S>& predicted,
                      const std::vector<Vec3T<S>>& points, SolveStats* stats = nullptr) {
    constexpr bool kRecord = std::is_same_v<S, Rec>;
    const double inv_mass = 1.0 / inertial_.mass;
    const Mat3 iw_inv = sim_detail::world_inertia_inv(sim_detail::values(predicted.theta), inertial_);
    const Vec3T<S> com{S(inertial_.com.x), S(inertial_.com.y), S(inertial_.com.z)};

    BodyStateT<S> st = predicted;
    Mat3T<S> R = rotation_matrix(st.theta);
    bool touched = false;

    struct ContactSlot {
      bool active = false;
      S lambda_n{};
      Vec3T<S> n_world;
      Vec3 r_body;  // material marker, COM frame, frozen at first activation
    };
    std::vector<ContactSlot> slots(points.size());

    for (int sweep = 0; sweep < params_.gs_iters; ++sweep) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3T<S>& p = points[i];
        Vec3T<S> rel = p - st.x;
        Vec3T<S> r_local = transposed_mul(R, rel) + com;

        if constexpr (kRecord) {
          Vec3T<Rec> grad_obj;
          Rec rho_d = sdf_.record_dilated(r_local, params_.dilation_radius, &grad_obj);
          Rec C = contact_gate(rho_d, params_.leak.alpha_leak);
          if (C.v == 0.0) {
            // inactive: exact frozen-coefficient recording carries the leak
            Vec3 nw = rotation_matrix(sim_detail::values(st.theta)) * sim_detail::values(grad_obj);
            sim_detail::apply_zero_depth_contact(st, C, nw, sim_detail::values(rel), inv_mass, iw_inv);
            continue;
          }
          if (apply_contact(st, R, sim_detail::values(p), rel, grad_obj, C, inv_mass, iw_inv,
                            slots[i], stats))
            touched = true;
        } else {
          auto q = sdf_.dilated_within(sim_detail::values(r_local), params_.dilation_radius, kCullMargin);
          if (!q || q->rho >= 0.0) continue;
          Vec3T<S> grad_obj{q->grad.x, q->grad.y, q->grad.z};
          S C = -q->rho;
          if (apply_contact(st, R, sim_detail::values(p), rel, grad_obj, C, inv_mass, iw_inv,
                            slots[i], stats))
            touched = true;
        }
      }
    }

    // Coulomb friction: per active contact, a tangential positional correction
    // clamped to mu times that contact's accumulated normal correction.
    if (params_.mu > 0.0) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        ContactSlot& slot = slots[i];
        if (!slot.active || sim_detail::dval(slot.lambda_n) <= 0.0) continue;
        if (apply_friction(prev, st, slot, inv_mass, iw_inv, stats)) touched = true;
      }
    }

    finalize_velocities(prev, predicted, st, touched);

    if (stats && stats->measure_residual) {
      if constexpr (!kRecord) {
        for (const auto& p : points) {
          Vec3 rl = transposed_mul(rotation_matrix(st.theta), p - st.x) + inertial_.com;
          auto q = sdf_.dilated_within(rl, params_.dilation_radius, kCullMargin);
          if (q && q->rho < 0.0) stats->max_penetration = std::max(stats->max_penetration, -q->rho);
        }
      }
    }
    return st;
  }

 private:
  static constexpr double kCullMargin = 0.005;

  bool apply_contact(BodyStateT<S>& st, Mat3T<S>& R, const Vec3& p_val, const Vec3T<S>& arm,
                     const Vec3T<S>& grad_obj, const S& C, double inv_mass, const Mat3& iw_inv,
                     auto& slot, SolveStats* stats) {
    Vec3T<S> n_w = R * grad_obj;
    Vec3T<S> a = cross(arm, n_w);
    Vec3T<S> iwa = mul_const(iw_inv, a);
    S w_eff = S(inv_mass) + dot(a, iwa);
    if (sim_detail::dval(w_eff) < 1e-12) {
      if (stats) ++stats->singular_skipped;
      return false;
    }
    S lam = C / w_eff;
    st.x = st.x - (S(inv_mass) * lam) * n_w;
    st.theta = normalized(quat_exp(-lam * iwa) * st.theta);
    R = rotation_matrix(st.theta);

    if (!slot.active) {
      slot.active = true;
      slot.lambda_n = S(0);
      // material marker in COM frame, captured after the correction
      slot.r_body = transposed_mul(rotation_matrix(sim_detail::values(st.theta)),
                                   p_val - sim_detail::values(st.x));
    }
    slot.lambda_n += lam;
    slot.n_world = n_w;
    if (stats) {
      ++stats->corrections;
      if (sim_detail::dval(slot.lambda_n) == sim_detail::dval(lam)) ++stats->active_contacts;
    }
    return true;
  }

  bool apply_friction(const BodyStateT<S>& prev, BodyStateT<S>& st, auto& slot, double inv_mass,
                      const Mat3& iw_inv, SolveStats* stats) {
    Vec3T<S> rb{S(slot.r_body.x), S(slot.r_body.y), S(slot.r_body.z)};
    Vec3T<S> before = prev.x + rotate(prev.theta, rb);
    Vec3T<S> arm = rotate(st.theta, rb);
    Vec3T<S> after = st.x + arm;
    Vec3T<S> u = after - before;
    Vec3T<S> n = slot.n_world;
    Vec3T<S> u_t = u - dot(u, n) * n;
    S ut_norm = norm(u_t);
    if (sim_detail::dval(ut_norm) < 1e-12) return false;
    Vec3T<S> t = u_t / ut_norm;
    Vec3T<S> at = cross(arm, t);
    Vec3T<S> iwat = mul_const(iw_inv, at);
    S w_t = S(inv_mass) + dot(at, iwat);
    if (sim_detail::dval(w_t) < 1e-12) return false;
    S lam_t = min(ut_norm / w_t, S(params_.mu) * slot.lambda_n);
    st.x = st.x - (S(inv_mass) * lam_t) * t;
    st.theta = normalized(quat_exp(-lam_t * iwat) * st.theta);
    if (stats) {
      ++stats->corrections;
      double denom = params_.mu * sim_detail::dval(slot.lambda_n);
      if (denom > 0.0)
        stats->max_friction_ratio =
            std::max(stats->max_friction_ratio, sim_detail::dval(lam_t) / denom);
    }
    return true;
  }

  void finalize_velocities(const BodyStateT<S>& prev, const BodyStateT<S>& predicted,
                           BodyStateT<S>& st, bool touched) const {
    if (!touched) {
      // no corrections: keep predicted velocities so free flight is exact
      st.xdot = predicted.xdot;
      st.thetadot = predicted.thetadot;
      return;
    }
    S inv_dt = S(1.0 / params_.dt);
    st.xdot = (st.x - prev.x) * inv_dt;
    st.thetadot = quat_log(st.theta * prev.theta.conjugate()) * inv_dt;
  }

  static Vec3T<S> mul_const(const Mat3& A, const Vec3T<S>& v) {
    return {S(A.m[0]) * v.x + S(A.m[1]) * v.y + S(A.m[2]) * v.z,
            S(A.m[3]) * v.x + S(A.m[4]) * v.y + S(A.m[5]) * v.z,
            S(A.m[6]) * v.x + S(A.m[7]) * v.y + S(A.m[8]) * v.z};
  }

  const MeshSdf& sdf_;
  const InertialData& inertial_;
  const SimParams& params_;
};

// solve_contacts per spec: positional projection of the predicted state
template <class S>
BodyStateT<S> solve_contacts(const BodyStateT<S>& prev, const BodyStateT<S>& predicted,
                             const std::vector<Vec3T<S>>& hand_points, const MeshSdf& sdf,
                             const InertialData& inertial, const SimParams& params,
                             SolveStats* stats = nullptr) {
  ContactSolver<S> solver(sdf, inertial, params);
  return solver.solve(prev, predicted, hand_points, stats);
}

template <class S>
BodyStateT<S> step(const BodyStateT<S>& state, const std::vector<Vec3T<S>>& hand_points,
                   const MeshSdf& sdf, const InertialData& inertial, const SimParams& params,
                   SolveStats* stats = nullptr) {
  BodyStateT<S> pred = predict(state, params);
  return solve_contacts(state, pred, hand_points, sdf, inertial, params, stats);
}

// Forward-only table step: the object's mesh vertices against the half-space
// z >= 0, with the same projection and friction scheme. Used by the scene
// pipeline's drop simulation.
RigidState step_on_table(const RigidState& state, const TriMesh& mesh,
                         const InertialData& inertial, const SimParams& params,
                         SolveStats* stats = nullptr);

double kinetic_energy(const RigidState& s, const InertialData& inertial);

}  // namespace dg
