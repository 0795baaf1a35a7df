#include "diffgrasp/tape.hpp"

namespace dg {

thread_local Tape* Tape::active_ = nullptr;

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Atan2: return "atan2";
    case Op::Max: return "max";
    case Op::Min: return "min";
    case Op::Axpy: return "axpy";
    case Op::Gate: return "contact_gate";
  }
  return "?";
}

std::vector<double> Tape::gradient() const {
  if (output_ < 0) throw std::logic_error("tape: gradient requested before set_output");
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[output_] = 1.0;

  for (std::int32_t i = static_cast<std::int32_t>(nodes_.size()) - 1; i >= 0; --i) {
    double g = adj[i];
    if (g == 0.0) continue;
    if (!std::isfinite(g)) {
      throw std::runtime_error(std::string("tape: non-finite adjoint at node #") +
                               std::to_string(i) + " (" + op_name(nodes_[i].op) + ")");
    }
    const Node& n = nodes_[i];
    double va, vb;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Add:
        if (n.a >= 0) adj[n.a] += g;
        if (n.b >= 0) adj[n.b] += g;
        break;
      case Op::Sub:
        if (n.a >= 0) adj[n.a] += g;
        if (n.b >= 0) adj[n.b] -= g;
        break;
      case Op::Mul:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        vb = n.b >= 0 ? nodes_[n.b].val : n.cb;
        if (n.a >= 0) adj[n.a] += g * vb;
        if (n.b >= 0) adj[n.b] += g * va;
        break;
      case Op::Div:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        vb = n.b >= 0 ? nodes_[n.b].val : n.cb;
        if (n.a >= 0) adj[n.a] += g / vb;
        if (n.b >= 0) adj[n.b] -= g * n.val / vb;
        break;
      case Op::Neg:
        if (n.a >= 0) adj[n.a] -= g;
        break;
      case Op::Sqrt:
        // subgradient 0 at the origin keeps norms of exact zeros harmless
        if (n.a >= 0 && n.val > 0.0) adj[n.a] += g * 0.5 / n.val;
        break;
      case Op::Sin:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        if (n.a >= 0) adj[n.a] += g * std::cos(va);
        break;
      case Op::Cos:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        if (n.a >= 0) adj[n.a] -= g * std::sin(va);
        break;
      case Op::Atan2: {
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;  // y
        vb = n.b >= 0 ? nodes_[n.b].val : n.cb;  // x
        double d = va * va + vb * vb;
        if (n.a >= 0) adj[n.a] += g * vb / d;
        if (n.b >= 0) adj[n.b] -= g * va / d;
        break;
      }
      case Op::Max:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        vb = n.b >= 0 ? nodes_[n.b].val : n.cb;
        if (va >= vb) { if (n.a >= 0) adj[n.a] += g; }
        else if (n.b >= 0) adj[n.b] += g;
        break;
      case Op::Min:
        va = n.a >= 0 ? nodes_[n.a].val : n.ca;
        vb = n.b >= 0 ? nodes_[n.b].val : n.cb;
        if (va <= vb) { if (n.a >= 0) adj[n.a] += g; }
        else if (n.b >= 0) adj[n.b] += g;
        break;
      case Op::Axpy:
        adj[n.a] += g;
        adj[n.b] += g * n.ca;
        break;
      case Op::Gate: {
        va = nodes_[n.a].val;
        adj[n.a] += g * (va < 0.0 ? -1.0 : -n.cb);
        break;
      }
    }
  }

  std::vector<double> out(inputs_.size());
  for (std::size_t k = 0; k < inputs_.size(); ++k) out[k] = adj[inputs_[k]];
  return out;
}

double Tape::replay() const {
  if (output_ < 0) throw std::logic_error("tape: replay requested before set_output");
  std::vector<double> vals(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double va = n.a >= 0 ? vals[n.a] : n.ca;
    double vb = n.b >= 0 ? vals[n.b] : n.cb;
    switch (n.op) {
      case Op::Input: vals[i] = n.val; break;
      case Op::Add: vals[i] = va + vb; break;
      case Op::Sub: vals[i] = va - vb; break;
      case Op::Mul: vals[i] = va * vb; break;
      case Op::Div: vals[i] = va / vb; break;
      case Op::Neg: vals[i] = -va; break;
      case Op::Sqrt: vals[i] = std::sqrt(va); break;
      case Op::Sin: vals[i] = std::sin(va); break;
      case Op::Cos: vals[i] = std::cos(va); break;
      case Op::Atan2: vals[i] = std::atan2(va, vb); break;
      case Op::Max: vals[i] = va >= vb ? va : vb; break;
      case Op::Min: vals[i] = va <= vb ? va : vb; break;
      case Op::Axpy: vals[i] = va + n.ca * vb; break;
      case Op::Gate: vals[i] = va < 0.0 ? -va : 0.0; break;
    }
  }
  return vals[output_];
}

}  // namespace dg
