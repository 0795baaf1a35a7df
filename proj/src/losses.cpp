#include "diffgrasp/losses.hpp"

#include <cmath>

namespace dg {

LossBreakdown evaluate_losses(const GraspObject& object, const HandModel& hand,
                              const HandConfig& q, const StabilityProtocol& protocol,
                              const SimParams& params) {
  LossBreakdown out;
  std::vector<Vec3> points = hand.forward(q);
  out.stable = stability_loss(object, points, protocol, params);
  out.qrange = qrange_loss(hand, q.joint_angles);
  out.qlimit = qlimit_loss(hand, q.joint_angles);
  if (!std::isfinite(out.stable) || !std::isfinite(out.qrange) || !std::isfinite(out.qlimit))
    throw std::runtime_error("loss evaluation produced a non-finite value");
  return out;
}

LossGradient loss_gradient(const GraspObject& object, const HandModel& hand, const HandConfig& q,
                           const StabilityProtocol& protocol, const SimParams& params) {
  const std::size_t dim = 6 + q.joint_angles.size();
  LossGradient out;
  out.d_stable.assign(dim, 0.0);
  out.d_qrange.assign(dim, 0.0);
  out.d_qlimit.assign(dim, 0.0);

  SimParams sim = params;
  sim.gravity = Vec3{};

  // one tape per perturbation simulation, reduced in protocol order
  for (int m = 0; m < protocol.m(); ++m) {
    Tape tape;
    Tape::Scope scope(tape);
    PoseVars<Rec> vars = record_pose_vars(tape, q);
    std::vector<Vec3T<Rec>> points = hand.forward(vars);
    Rec res = perturbation_residual(object, points, protocol.velocities[m], protocol, sim);
    tape.set_output(res);
    out.losses.stable += res.v;
    std::vector<double> g = tape.gradient();
    for (std::size_t i = 0; i < dim; ++i) out.d_stable[i] += g[i];
  }
  double inv_m = 1.0 / protocol.m();
  out.losses.stable *= inv_m;
  for (double& g : out.d_stable) g *= inv_m;

  {
    Tape tape;
    Tape::Scope scope(tape);
    PoseVars<Rec> vars = record_pose_vars(tape, q);
    Rec r = qrange_loss(hand, vars.joint_angles);
    tape.set_output(r);
    out.losses.qrange = r.v;
    out.d_qrange = tape.gradient();
  }
  {
    Tape tape;
    Tape::Scope scope(tape);
    PoseVars<Rec> vars = record_pose_vars(tape, q);
    Rec r = qlimit_loss(hand, vars.joint_angles);
    tape.set_output(r);
    out.losses.qlimit = r.v;
    out.d_qlimit = tape.gradient();
  }
  return out;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const HandConfig&)>& f, const HandConfig& q, double h) {
  const std::size_t dim = 6 + q.joint_angles.size();
  std::vector<double> g(dim);

  auto perturbed = [&](std::size_t i, double eps) {
    HandConfig p = q;
    if (i < 3) {
      p.base_position[static_cast<int>(i)] += eps;
    } else if (i < 6) {
      Vec3 tangent{};
      tangent[static_cast<int>(i - 3)] = eps;
      p.base_orientation = normalized(quat_exp(tangent) * q.base_orientation);
    } else {
      p.joint_angles[i - 6] += eps;
    }
    return f(p);
  };

  for (std::size_t i = 0; i < dim; ++i)
    g[i] = (perturbed(i, h) - perturbed(i, -h)) / (2.0 * h);
  return g;
}

HandConfig apply_gradient_step(const HandConfig& q, const std::vector<double>& grad, double lr) {
  HandConfig out = q;
  out.base_position.x -= lr * grad[0];
  out.base_position.y -= lr * grad[1];
  out.base_position.z -= lr * grad[2];
  Vec3 tangent{-lr * grad[3], -lr * grad[4], -lr * grad[5]};
  out.base_orientation = normalized(quat_exp(tangent) * q.base_orientation);
  for (std::size_t j = 0; j < out.joint_angles.size(); ++j)
    out.joint_angles[j] -= lr * grad[6 + j];
  return out;
}

}  // namespace dg
