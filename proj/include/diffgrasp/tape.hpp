#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Reverse-mode gradient tape. Simulator and loss code is written against a
// generic scalar; instantiated with Rec it records every primitive onto the
// thread-active Tape, from which exact adjoints are pulled in one backward
// sweep. Each node stores its operands (ids for recorded values, inline copies
// for constants), so the forward pass can be replayed bit-exactly and local
// partials are derived on the fly during the backward sweep.

namespace dg {

enum class Op : std::uint8_t {
  Input, Add, Sub, Mul, Div, Neg, Sqrt, Sin, Cos, Atan2, Max, Min,
  // val = A + ca * B, both operands recorded; ca is a frozen coefficient.
  Axpy,
  // Contact gate: val = max(0, -A); backward partial is -1 while the
  // constraint is active and -alpha (stored in cb) otherwise. This is the
  // leaky contact-gradient rule; it never changes forward values.
  Gate,
};

const char* op_name(Op op);

struct Node {
  double ca = 0.0;  // operand A constant (a < 0), or Axpy coefficient
  double cb = 0.0;  // operand B constant (b < 0), or Gate leak alpha
  double val = 0.0;
  std::int32_t a = -1;
  std::int32_t b = -1;
  Op op = Op::Input;
};
static_assert(sizeof(Node) <= 40);

class Tape;

// Recorded scalar. idx < 0 marks a constant that lives only in `v`; arithmetic
// between constants folds without touching the tape.
struct Rec {
  double v = 0.0;
  std::int32_t idx = -1;

  Rec() = default;
  Rec(double value) : v(value), idx(-1) {}  // NOLINT: implicit constants are the point
  Rec(double value, std::int32_t i) : v(value), idx(i) {}

  bool is_const() const { return idx < 0; }
};

inline double value_of(const Rec& r) { return r.v; }

class Tape {
 public:
  Tape() { nodes_.reserve(1 << 16); }

  // RAII activation; recording requires exactly one active tape per thread.
  class Scope {
   public:
    explicit Scope(Tape& t) : prev_(active_) { active_ = &t; }
    ~Scope() { active_ = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* prev_;
  };

  static Tape* active() { return active_; }
  static Tape& require_active() {
    if (!active_) throw std::logic_error("tape: no active tape on this thread");
    return *active_;
  }

  Rec input(double v) {
    std::int32_t id = emit(Op::Input, -1, -1, 0.0, 0.0, v);
    inputs_.push_back(id);
    return Rec(v, id);
  }

  std::int32_t emit(Op op, std::int32_t a, std::int32_t b, double ca, double cb, double val) {
    nodes_.push_back(Node{ca, cb, val, a, b, op});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  void set_output(const Rec& r) {
    // A constant output is legal (gradient is zero everywhere).
    if (r.is_const()) output_ = emit(Op::Input, -1, -1, 0.0, 0.0, r.v);
    else output_ = r.idx;
  }

  bool has_output() const { return output_ >= 0; }
  double output_value() const { return nodes_[output_].val; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t num_inputs() const { return inputs_.size(); }

  // Adjoints of all registered inputs, in registration order.
  std::vector<double> gradient() const;

  // Re-executes the recorded forward pass and returns the output value.
  double replay() const;

  void clear() {
    nodes_.clear();
    inputs_.clear();
    output_ = -1;
  }

 private:
  double operand_a(const Node& n, const std::vector<double>& vals) const {
    return n.a >= 0 ? vals[n.a] : n.ca;
  }
  double operand_b(const Node& n, const std::vector<double>& vals) const {
    return n.b >= 0 ? vals[n.b] : n.cb;
  }

  std::vector<Node> nodes_;
  std::vector<std::int32_t> inputs_;
  std::int32_t output_ = -1;
  static thread_local Tape* active_;
};

namespace detail {

inline Rec record(Op op, const Rec& a, const Rec& b, double val) {
  if (a.is_const() && b.is_const()) {
    // both constant: fold (no node). Callers pass the already-computed value.
    return Rec(val);
  }
  Tape& t = Tape::require_active();
  std::int32_t id = t.emit(op, a.idx, b.idx, a.is_const() ? a.v : 0.0,
                           b.is_const() ? b.v : 0.0, val);
  return Rec(val, id);
}

inline Rec record_unary(Op op, const Rec& a, double val) {
  if (a.is_const()) return Rec(val);
  Tape& t = Tape::require_active();
  std::int32_t id = t.emit(op, a.idx, -1, 0.0, 0.0, val);
  return Rec(val, id);
}

}  // namespace detail

inline Rec operator+(const Rec& a, const Rec& b) { return detail::record(Op::Add, a, b, a.v + b.v); }
inline Rec operator-(const Rec& a, const Rec& b) { return detail::record(Op::Sub, a, b, a.v - b.v); }
inline Rec operator*(const Rec& a, const Rec& b) { return detail::record(Op::Mul, a, b, a.v * b.v); }
inline Rec operator/(const Rec& a, const Rec& b) { return detail::record(Op::Div, a, b, a.v / b.v); }
inline Rec operator-(const Rec& a) { return detail::record_unary(Op::Neg, a, -a.v); }

inline Rec& operator+=(Rec& a, const Rec& b) { a = a + b; return a; }
inline Rec& operator-=(Rec& a, const Rec& b) { a = a - b; return a; }
inline Rec& operator*=(Rec& a, const Rec& b) { a = a * b; return a; }

inline Rec sqrt(const Rec& a) { return detail::record_unary(Op::Sqrt, a, std::sqrt(a.v)); }
inline Rec sin(const Rec& a) { return detail::record_unary(Op::Sin, a, std::sin(a.v)); }
inline Rec cos(const Rec& a) { return detail::record_unary(Op::Cos, a, std::cos(a.v)); }
inline Rec atan2(const Rec& y, const Rec& x) { return detail::record(Op::Atan2, y, x, std::atan2(y.v, x.v)); }
inline Rec max(const Rec& a, const Rec& b) { return detail::record(Op::Max, a, b, a.v >= b.v ? a.v : b.v); }
inline Rec min(const Rec& a, const Rec& b) { return detail::record(Op::Min, a, b, a.v <= b.v ? a.v : b.v); }

// val = a + k * b with frozen coefficient k.
inline Rec axpy(const Rec& a, double k, const Rec& b) {
  if (a.is_const() && b.is_const()) return Rec(a.v + k * b.v);
  Tape& t = Tape::require_active();
  // Both-operand node: stash k in ca (unused when a is recorded). If a is a
  // constant we fall back to regular ops to keep slot semantics unambiguous.
  if (a.is_const() || b.is_const()) return a + Rec(k) * b;
  std::int32_t id = t.emit(Op::Axpy, a.idx, b.idx, k, 0.0, a.v + k * b.v);
  return Rec(a.v + k * b.v, id);
}

// Non-penetration constraint gate C = max(0, -rho_dilated), with the biased
// backward rule: dC/drho = -1 if rho < 0 (contact active), else -alpha.
inline Rec contact_gate(const Rec& rho, double leak_alpha) {
  double val = rho.v < 0.0 ? -rho.v : 0.0;
  if (rho.is_const()) return Rec(val);
  Tape& t = Tape::require_active();
  std::int32_t id = t.emit(Op::Gate, rho.idx, -1, 0.0, leak_alpha, val);
  return Rec(val, id);
}

// Comparisons are value-based; branches taken on them are frozen into the tape.
inline bool operator<(const Rec& a, const Rec& b) { return a.v < b.v; }
inline bool operator>(const Rec& a, const Rec& b) { return a.v > b.v; }
inline bool operator<=(const Rec& a, const Rec& b) { return a.v <= b.v; }
inline bool operator>=(const Rec& a, const Rec& b) { return a.v >= b.v; }

// double-path counterparts so generic code can use the same vocabulary.
inline double axpy(double a, double k, double b) { return a + k * b; }
inline double contact_gate(double rho, double) { return rho < 0.0 ? -rho : 0.0; }
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }

}  // namespace dg
