#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rpinn {

// First-order forward dual with a fixed block of 8 derivative lanes.
// Used to seed residual/constraint operators with respect to the six jet
// components (u, u_x, u_y, u_xx, u_xy, u_yy) plus up to two trainable PDE
// parameters. Unused lanes stay zero.
struct Dual {
  static constexpr int kLanes = 8;
  double v = 0.0;
  std::array<double, kLanes> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant
  static Dual seeded(double value, int lane) {
    Dual r(value);
    r.d[lane] = 1.0;
    return r;
  }
};

inline double scalar_value(const Dual& x) { return x.v; }

inline Dual operator+(const Dual& a, const Dual& b) {
  Dual r(a.v + b.v);
  for (int i = 0; i < Dual::kLanes; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
inline Dual operator-(const Dual& a, const Dual& b) {
  Dual r(a.v - b.v);
  for (int i = 0; i < Dual::kLanes; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
inline Dual operator-(const Dual& a) {
  Dual r(-a.v);
  for (int i = 0; i < Dual::kLanes; ++i) r.d[i] = -a.d[i];
  return r;
}
inline Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (int i = 0; i < Dual::kLanes; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
inline Dual operator/(const Dual& a, const Dual& b) {
  if (b.v == 0.0) throw std::domain_error("division by zero (primitive '/')");
  Dual r(a.v / b.v);
  for (int i = 0; i < Dual::kLanes; ++i)
    r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
  return r;
}
inline Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }
inline Dual& operator-=(Dual& a, const Dual& b) { return a = a - b; }

inline Dual chain(const Dual& a, double f0, double f1) {
  Dual r(f0);
  for (int i = 0; i < Dual::kLanes; ++i) r.d[i] = f1 * a.d[i];
  return r;
}
inline Dual tanh(const Dual& a) {
  const double t = std::tanh(a.v);
  return chain(a, t, 1.0 - t * t);
}
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e);
}
inline Dual sin(const Dual& a) { return chain(a, std::sin(a.v), std::cos(a.v)); }
inline Dual cos(const Dual& a) { return chain(a, std::cos(a.v), -std::sin(a.v)); }
inline Dual cosh(const Dual& a) { return chain(a, std::cosh(a.v), std::sinh(a.v)); }
inline Dual pow(const Dual& a, int n) {
  if (n < 0 && a.v == 0.0)
    throw std::domain_error("division by zero (primitive 'pow')");
  return chain(a, std::pow(a.v, n), n == 0 ? 0.0 : n * std::pow(a.v, n - 1));
}

}  // namespace rpinn
