#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace rpinn {

// plain-double view of an arithmetic scalar (overloaded per scalar type,
// found by ADL from the templates below)
inline double scalar_value(double x) { return x; }

// Truncated second-order Taylor value: function value, gradient and Hessian
// with respect to the evaluation-point coordinates. The Hessian is stored
// packed (upper triangle, i <= j), so symmetry holds by construction.
//
// T is the arithmetic scalar: double for plain evaluation, or a reverse-mode
// variable when parameter gradients of derivative quantities are needed.
template <class T, int N>
struct Jet {
  static constexpr int kDim = N;
  static constexpr int kHess = N * (N + 1) / 2;

  T v{};
  std::array<T, N> g{};
  std::array<T, kHess> h{};

  Jet() = default;
  explicit Jet(const T& value) : v(value) {}

  // packed index of (i,j) with i <= j
  static constexpr int hidx(int i, int j) {
    return i * N - i * (i - 1) / 2 + (j - i);
  }

  // seed for input coordinate `axis`: value x, unit first derivative
  static Jet seed(const T& x, int axis) {
    Jet j(x);
    j.g[axis] = T(1);
    return j;
  }

  bool finite() const
    requires std::is_same_v<T, double>
  {
    if (!std::isfinite(v)) return false;
    for (const T& x : g)
      if (!std::isfinite(x)) return false;
    for (const T& x : h)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) g[i] += o.g[i];
    for (int i = 0; i < kHess; ++i) h[i] += o.h[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) g[i] -= o.g[i];
    for (int i = 0; i < kHess; ++i) h[i] -= o.h[i];
    return *this;
  }
};

template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, const Jet<T, N>& b) { return a += b; }

template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, const Jet<T, N>& b) { return a -= b; }

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a) {
  Jet<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.g[i] = -a.g[i];
  for (int i = 0; i < Jet<T, N>::kHess; ++i) r.h[i] = -a.h[i];
  return r;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const int k = Jet<T, N>::hidx(i, j);
      r.h[k] = a.h[k] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[k];
    }
  return r;
}

// division: q = a/b via a = q*b (throws on zero denominator)
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
  if (scalar_value(b.v) == 0.0)
    throw std::domain_error("jet division by zero (primitive '/')");
  Jet<T, N> q;
  q.v = a.v / b.v;
  for (int i = 0; i < N; ++i) q.g[i] = (a.g[i] - q.v * b.g[i]) / b.v;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const int k = Jet<T, N>::hidx(i, j);
      q.h[k] = (a.h[k] - q.g[i] * b.g[j] - q.g[j] * b.g[i] - q.v * b.h[k]) / b.v;
    }
  return q;
}

// jet-scalar forms (the scalar is constant in x)
template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, double c) { a.v += T(c); return a; }
template <class T, int N>
Jet<T, N> operator+(double c, Jet<T, N> a) { a.v += T(c); return a; }
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, double c) { a.v -= T(c); return a; }
template <class T, int N>
Jet<T, N> operator-(double c, const Jet<T, N>& a) { return (-a) + c; }

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, double c) {
  Jet<T, N> r;
  r.v = a.v * c;
  for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * c;
  for (int i = 0; i < Jet<T, N>::kHess; ++i) r.h[i] = a.h[i] * c;
  return r;
}
template <class T, int N>
Jet<T, N> operator*(double c, const Jet<T, N>& a) { return a * c; }
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, double c) {
  if (c == 0.0) throw std::domain_error("jet division by zero (primitive '/')");
  return a * (1.0 / c);
}
template <class T, int N>
Jet<T, N> operator/(double c, const Jet<T, N>& a) {
  return Jet<T, N>(T(c)) / a;
}

// chain rule for a smooth univariate primitive with values (f, f', f'') at a.v
template <class T, int N>
Jet<T, N> apply_chain(const Jet<T, N>& a, const T& f0, const T& f1, const T& f2) {
  Jet<T, N> r;
  r.v = f0;
  for (int i = 0; i < N; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const int k = Jet<T, N>::hidx(i, j);
      r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
    }
  return r;
}

template <class T, int N>
Jet<T, N> tanh(const Jet<T, N>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  const T s = T(1) - t * t;
  return apply_chain(a, t, s, T(-2) * t * s);
}

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
  using std::exp;
  const T e = exp(a.v);
  return apply_chain(a, e, e, e);
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v), c = cos(a.v);
  return apply_chain(a, s, c, -s);
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v), c = cos(a.v);
  return apply_chain(a, c, -s, -c);
}

template <class T, int N>
Jet<T, N> cosh(const Jet<T, N>& a) {
  using std::cosh;
  using std::sinh;
  const T ch = cosh(a.v), sh = sinh(a.v);
  return apply_chain(a, ch, sh, ch);
}

// integer power by chain rule; negative exponents reject a zero base
template <class T, int N>
Jet<T, N> pow(const Jet<T, N>& a, int n) {
  if (n == 0) return Jet<T, N>(T(1));
  if (n < 0 && scalar_value(a.v) == 0.0)
    throw std::domain_error("jet division by zero (primitive 'pow')");
  auto ipow = [](T base, int e) {
    T r(1);
    bool inv = e < 0;
    for (int k = 0; k < (inv ? -e : e); ++k) r = r * base;
    if (inv) r = T(1) / r;
    return r;
  };
  const T f0 = ipow(a.v, n);
  const T f1 = T(n) * ipow(a.v, n - 1);
  const T f2 = (n == 1) ? T(0) : T(n) * T(n - 1) * ipow(a.v, n - 2);
  return apply_chain(a, f0, f1, f2);
}

}  // namespace rpinn
