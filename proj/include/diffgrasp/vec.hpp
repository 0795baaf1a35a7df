#pragma once

#include <array>
#include <cmath>
#include <cstddef>

// Small templated linear algebra for 3-D rigid-body math. The scalar type S is
// either plain double (fast forward path) or dg::Rec (tape-recorded reverse-mode
// value, see tape.hpp), so every simulator routine can run in both modes.

namespace dg {

using std::sqrt;
using std::sin;
using std::cos;
using std::atan2;

// value_of lets templated code branch on magnitudes for either scalar type
// (the Rec overload lives in tape.hpp).
inline double value_of(double x) { return x; }

template <class S>
struct Vec3T {
  S x{}, y{}, z{};

  Vec3T() = default;
  Vec3T(S x_, S y_, S z_) : x(x_), y(y_), z(z_) {}

  S& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const S& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3T& operator+=(const Vec3T& o) { x = x + o.x; y = y + o.y; z = z + o.z; return *this; }
  Vec3T& operator-=(const Vec3T& o) { x = x - o.x; y = y - o.y; z = z - o.z; return *this; }
  Vec3T& operator*=(const S& s) { x = x * s; y = y * s; z = z * s; return *this; }
};

template <class S> Vec3T<S> operator+(const Vec3T<S>& a, const Vec3T<S>& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
template <class S> Vec3T<S> operator-(const Vec3T<S>& a, const Vec3T<S>& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
template <class S> Vec3T<S> operator-(const Vec3T<S>& a) { return {-a.x, -a.y, -a.z}; }
template <class S> Vec3T<S> operator*(const Vec3T<S>& a, const S& s) { return {a.x * s, a.y * s, a.z * s}; }
template <class S> Vec3T<S> operator*(const S& s, const Vec3T<S>& a) { return a * s; }
template <class S> Vec3T<S> operator/(const Vec3T<S>& a, const S& s) { return {a.x / s, a.y / s, a.z / s}; }

template <class S> S dot(const Vec3T<S>& a, const Vec3T<S>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
template <class S> Vec3T<S> cross(const Vec3T<S>& a, const Vec3T<S>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
template <class S> S squared_norm(const Vec3T<S>& a) { return dot(a, a); }
template <class S> S norm(const Vec3T<S>& a) { return sqrt(dot(a, a)); }
template <class S> Vec3T<S> normalized(const Vec3T<S>& a) { return a / norm(a); }

// Row-major 3x3 matrix.
template <class S>
struct Mat3T {
  std::array<S, 9> m{};

  static Mat3T identity() {
    Mat3T r;
    r.m = {S(1), S(0), S(0), S(0), S(1), S(0), S(0), S(0), S(1)};
    return r;
  }

  S& operator()(int r, int c) { return m[3 * r + c]; }
  const S& operator()(int r, int c) const { return m[3 * r + c]; }

  Vec3T<S> col(int c) const { return {m[c], m[3 + c], m[6 + c]}; }
  Vec3T<S> row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
};

template <class S>
Vec3T<S> operator*(const Mat3T<S>& A, const Vec3T<S>& v) {
  return {A.m[0] * v.x + A.m[1] * v.y + A.m[2] * v.z,
          A.m[3] * v.x + A.m[4] * v.y + A.m[5] * v.z,
          A.m[6] * v.x + A.m[7] * v.y + A.m[8] * v.z};
}

// A^T v without forming the transpose.
template <class S>
Vec3T<S> transposed_mul(const Mat3T<S>& A, const Vec3T<S>& v) {
  return {A.m[0] * v.x + A.m[3] * v.y + A.m[6] * v.z,
          A.m[1] * v.x + A.m[4] * v.y + A.m[7] * v.z,
          A.m[2] * v.x + A.m[5] * v.y + A.m[8] * v.z};
}

template <class S>
Mat3T<S> operator*(const Mat3T<S>& A, const Mat3T<S>& B) {
  Mat3T<S> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = A(i, 0) * B(0, j) + A(i, 1) * B(1, j) + A(i, 2) * B(2, j);
  return r;
}

template <class S>
Mat3T<S> transposed(const Mat3T<S>& A) {
  Mat3T<S> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = A(j, i);
  return r;
}

// Unit quaternion, (w, x, y, z).
template <class S>
struct QuatT {
  S w{1}, x{0}, y{0}, z{0};

  QuatT() = default;
  QuatT(S w_, S x_, S y_, S z_) : w(w_), x(x_), y(y_), z(z_) {}

  static QuatT identity() { return {S(1), S(0), S(0), S(0)}; }

  QuatT conjugate() const { return {w, -x, -y, -z}; }

  Vec3T<S> vec() const { return {x, y, z}; }
};

template <class S>
QuatT<S> operator*(const QuatT<S>& a, const QuatT<S>& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

template <class S>
QuatT<S> normalized(const QuatT<S>& q) {
  S n = sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

template <class S>
Mat3T<S> rotation_matrix(const QuatT<S>& q) {
  S xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  S xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  S wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  Mat3T<S> R;
  R.m = {S(1) - S(2) * (yy + zz), S(2) * (xy - wz),          S(2) * (xz + wy),
         S(2) * (xy + wz),        S(1) - S(2) * (xx + zz),   S(2) * (yz - wx),
         S(2) * (xz - wy),        S(2) * (yz + wx),          S(1) - S(2) * (xx + yy)};
  return R;
}

template <class S>
Vec3T<S> rotate(const QuatT<S>& q, const Vec3T<S>& v) {
  Vec3T<S> u = q.vec();
  Vec3T<S> t = S(2) * cross(u, v);
  return v + q.w * t + cross(u, t);
}

template <class S>
Vec3T<S> rotate_inverse(const QuatT<S>& q, const Vec3T<S>& v) {
  return rotate(q.conjugate(), v);
}

// exp map: rotation vector (angle * axis) -> unit quaternion. The branch keeps
// the half-angle sinc well defined at zero; both sides agree to O(a^4).
template <class S>
QuatT<S> quat_exp(const Vec3T<S>& rotvec) {
  S a2 = squared_norm(rotvec);
  if (value_of(a2) < 1e-16) {
    S k = S(0.5) - a2 * S(1.0 / 48.0);
    return normalized(QuatT<S>{S(1) - a2 * S(0.125), rotvec.x * k, rotvec.y * k, rotvec.z * k});
  }
  S a = sqrt(a2);
  S half = S(0.5) * a;
  S k = sin(half) / a;
  return {cos(half), rotvec.x * k, rotvec.y * k, rotvec.z * k};
}

// log map: unit quaternion -> rotation vector, principal branch.
template <class S>
Vec3T<S> quat_log(const QuatT<S>& q_in) {
  QuatT<S> q = q_in;
  if (value_of(q.w) < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
  S v2 = q.x * q.x + q.y * q.y + q.z * q.z;
  if (value_of(v2) < 1e-18) {
    S k = S(2) / q.w;
    return {q.x * k, q.y * k, q.z * k};
  }
  S v = sqrt(v2);
  S angle = S(2) * atan2(v, q.w);
  S k = angle / v;
  return {q.x * k, q.y * k, q.z * k};
}

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Quat = QuatT<double>;

struct Box3 {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};

  void expand(const Vec3& p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
  void expand(const Box3& b) { expand(b.lo); expand(b.hi); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }

  // squared distance from p to the box (0 inside)
  double dist2(const Vec3& p) const {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
      double v = p[i];
      if (v < lo[i]) { double e = lo[i] - v; d += e * e; }
      else if (v > hi[i]) { double e = v - hi[i]; d += e * e; }
    }
    return d;
  }
};

}  // namespace dg
