#pragma once

#include <cmath>

namespace funnel_sqp {

/// Hyper-dual number v + a·ε₁ + b·ε₂ + c·ε₁ε₂ with ε₁² = ε₂² = 0.
///
/// Seeding x with directions p and q yields f(x), ∇f·p, ∇f·q and pᵀ∇²f q in
/// one forward pass, free of truncation error.
template <typename T>
struct HyperDual {
  T value{};
  T first1{};
  T first2{};
  T second{};

  constexpr HyperDual() = default;
  constexpr HyperDual(T v) : value(v) {}  // NOLINT: implicit constants
  constexpr HyperDual(T v, T a, T b, T c)
      : value(v), first1(a), first2(b), second(c) {}

  HyperDual& operator+=(const HyperDual& o) { return *this = *this + o; }
  HyperDual& operator-=(const HyperDual& o) { return *this = *this - o; }
  HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
  HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

  friend HyperDual operator+(const HyperDual& p, const HyperDual& q) {
    return {p.value + q.value, p.first1 + q.first1, p.first2 + q.first2,
            p.second + q.second};
  }
  friend HyperDual operator-(const HyperDual& p, const HyperDual& q) {
    return {p.value - q.value, p.first1 - q.first1, p.first2 - q.first2,
            p.second - q.second};
  }
  friend HyperDual operator-(const HyperDual& p) {
    return {-p.value, -p.first1, -p.first2, -p.second};
  }
  friend HyperDual operator*(const HyperDual& p, const HyperDual& q) {
    return {p.value * q.value, p.first1 * q.value + p.value * q.first1,
            p.first2 * q.value + p.value * q.first2,
            p.second * q.value + p.first1 * q.first2 + p.first2 * q.first1 +
                p.value * q.second};
  }
  friend HyperDual operator/(const HyperDual& p, const HyperDual& q) {
    return p * reciprocal(q);
  }
};

/// Applies a scalar function given its value and first two derivatives at
/// p.value: the chain rule f'·p.second + f''·p.first1·p.first2 in ε₁ε₂.
template <typename T>
HyperDual<T> chain(const HyperDual<T>& p, T f, T df, T d2f) {
  return {f, df * p.first1, df * p.first2,
          df * p.second + d2f * p.first1 * p.first2};
}

template <typename T>
HyperDual<T> reciprocal(const HyperDual<T>& p) {
  const T inv = T(1) / p.value;
  return chain(p, inv, -inv * inv, T(2) * inv * inv * inv);
}

template <typename T>
HyperDual<T> exp(const HyperDual<T>& p) {
  using std::exp;
  const T e = exp(p.value);
  return chain(p, e, e, e);
}

template <typename T>
HyperDual<T> log(const HyperDual<T>& p) {
  using std::log;
  const T inv = T(1) / p.value;
  return chain(p, log(p.value), inv, -inv * inv);
}

template <typename T>
HyperDual<T> sin(const HyperDual<T>& p) {
  using std::cos;
  using std::sin;
  const T s = sin(p.value);
  return chain(p, s, cos(p.value), -s);
}

template <typename T>
HyperDual<T> cos(const HyperDual<T>& p) {
  using std::cos;
  using std::sin;
  const T c = cos(p.value);
  return chain(p, c, -sin(p.value), -c);
}

template <typename T>
HyperDual<T> sqrt(const HyperDual<T>& p) {
  using std::sqrt;
  const T s = sqrt(p.value);
  return chain(p, s, T(0.5) / s, T(-0.25) / (s * p.value));
}

/// p^e for a constant exponent. Integer exponents are exact for any sign of
/// the base; zero coefficients never multiply an infinite power.
template <typename T>
HyperDual<T> pow(const HyperDual<T>& p, T e) {
  using std::pow;
  const T v = p.value;
  const T f = pow(v, e);
  const T c1 = e;
  const T c2 = e * (e - T(1));
  const T df = c1 == T(0) ? T(0) : c1 * pow(v, e - T(1));
  const T d2f = c2 == T(0) ? T(0) : c2 * pow(v, e - T(2));
  return chain(p, f, df, d2f);
}

/// General power p^q = exp(q·log p), defined for p > 0.
template <typename T>
HyperDual<T> pow(const HyperDual<T>& p, const HyperDual<T>& q) {
  return exp(q * log(p));
}

}  // namespace funnel_sqp
