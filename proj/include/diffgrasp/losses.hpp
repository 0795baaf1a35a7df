#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffgrasp/hand.hpp"
#include "diffgrasp/sdf.hpp"
#include "diffgrasp/sim.hpp"

namespace dg {

// Perturbation protocol for the stability metric: M initial object velocities
// simulated for T steps each against the static hand.
struct StabilityProtocol {
  std::vector<Vec3> velocities;
  int steps = 1;

  // M = 7: +-speed along each axis plus one zero-velocity run
  static StabilityProtocol standard(double speed = 0.5, int steps = 1) {
    StabilityProtocol p;
    p.velocities = {{speed, 0, 0}, {-speed, 0, 0}, {0, speed, 0}, {0, -speed, 0},
                    {0, 0, speed}, {0, 0, -speed}, {0, 0, 0}};
    p.steps = steps;
    return p;
  }
  int m() const { return static_cast<int>(velocities.size()); }
};

struct LossWeights {
  double stable = 1.0;
  double qrange = 0.01;
  double qlimit = 1.0;
};

// Object to be grasped, with its SDF and inertial data.
struct GraspObject {
  MeshSdf sdf;
  InertialData inertial;

  GraspObject(TriMesh mesh, double density = 1000.0, double alpha_phong = 0.75)
      : sdf(std::move(mesh), alpha_phong), inertial(inertia_from_mesh(sdf.mesh(), density)) {}
};

// residual speed of one perturbation simulation: |xdot_T| + |thetadot_T|
template <class S>
S perturbation_residual(const GraspObject& object, const std::vector<Vec3T<S>>& hand_points,
                        const Vec3& velocity, const StabilityProtocol& protocol,
                        SimParams params) {
  params.gravity = Vec3{};  // only perturbation velocities are tested
  BodyStateT<S> state = to_body_state<S>(canonical_state(object.inertial));
  state.xdot = {S(velocity.x), S(velocity.y), S(velocity.z)};
  for (int t = 0; t < protocol.steps; ++t)
    state = step(state, hand_points, object.sdf, object.inertial, params);
  return norm(state.xdot) + norm(state.thetadot);
}

// Eq-style stability loss: mean residual speed over the protocol.
template <class S>
S stability_loss(const GraspObject& object, const std::vector<Vec3T<S>>& hand_points,
                 const StabilityProtocol& protocol, const SimParams& params) {
  S acc = S(0.0);
  for (const Vec3& v : protocol.velocities)
    acc += perturbation_residual(object, hand_points, v, protocol, params);
  return acc / S(static_cast<double>(protocol.m()));
}

// distance of the joint vector from mid-range (Euclidean, joints only)
template <class S>
S qrange_loss(const HandModel& hand, const std::vector<S>& joint_angles) {
  if (static_cast<int>(joint_angles.size()) != hand.num_joints())
    throw std::runtime_error("qrange_loss: joint count mismatch");
  S acc = S(0.0);
  for (int j = 0; j < hand.num_joints(); ++j) {
    S d = joint_angles[j] - S(0.5 * (hand.joints()[j].lower + hand.joints()[j].upper));
    acc += d * d;
  }
  return sqrt(acc);
}

// total limit violation: sum_j max(q - up, 0) + max(low - q, 0)
template <class S>
S qlimit_loss(const HandModel& hand, const std::vector<S>& joint_angles) {
  if (static_cast<int>(joint_angles.size()) != hand.num_joints())
    throw std::runtime_error("qlimit_loss: joint count mismatch");
  S acc = S(0.0);
  for (int j = 0; j < hand.num_joints(); ++j) {
    acc += max(joint_angles[j] - S(hand.joints()[j].upper), S(0.0));
    acc += max(S(hand.joints()[j].lower) - joint_angles[j], S(0.0));
  }
  return acc;
}

struct LossBreakdown {
  double stable = 0.0;
  double qrange = 0.0;
  double qlimit = 0.0;
  double total(const LossWeights& w) const {
    return w.stable * stable + w.qrange * qrange + w.qlimit * qlimit;
  }
};

// Gradient layout: [base position (3) | orientation tangent (3) | joints (J)].
struct LossGradient {
  LossBreakdown losses;
  std::vector<double> d_stable;
  std::vector<double> d_qrange;
  std::vector<double> d_qlimit;
  std::vector<double> weighted(const LossWeights& w) const {
    std::vector<double> g(d_stable.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = w.stable * d_stable[i] + w.qrange * d_qrange[i] + w.qlimit * d_qlimit[i];
    return g;
  }
};

// Forward-only evaluation of all three losses.
LossBreakdown evaluate_losses(const GraspObject& object, const HandModel& hand,
                              const HandConfig& q, const StabilityProtocol& protocol,
                              const SimParams& params);

// Reverse-mode gradients of all three losses w.r.t. the configuration. Each of
// the M perturbation simulations records on its own tape; the per-tape adjoints
// are reduced by an ordered sum (adjoint of a sum of tapes = sum of adjoints).
LossGradient loss_gradient(const GraspObject& object, const HandModel& hand, const HandConfig& q,
                           const StabilityProtocol& protocol, const SimParams& params);

// Central finite differences of an arbitrary scalar of the configuration, in
// the same layout as LossGradient (orientation via tangent-space perturbation).
std::vector<double> finite_difference_gradient(
    const std::function<double(const HandConfig&)>& f, const HandConfig& q, double h = 1e-5);

// Applies a gradient-layout step: pos -= lr*g[0:3], orientation updated in the
// quaternion tangent space, joints -= lr*g[6:].
HandConfig apply_gradient_step(const HandConfig& q, const std::vector<double>& grad, double lr);

}  // namespace dg
