#pragma once

#include "holodyn/types.hpp"

#include <array>

namespace holodyn {

// Complex value with up to kMaxDim complex partials (forward mode).
struct Dual {
  cplx v{};
  std::array<cplx, kMaxDim> d{};

  Dual() = default;
  Dual(cplx value) : v(value) {}  // NOLINT: constants promote implicitly

  static Dual variable(cplx value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < kMaxDim; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < kMaxDim; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < kMaxDim; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(cplx s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator*(Dual a, cplx s) { return a *= s; }
inline Dual operator*(cplx s, Dual a) { return a *= s; }
inline Dual operator-(Dual a) { return a *= cplx(-1.0); }

inline Dual exp(const Dual& a) {
  Dual r;
  r.v = std::exp(a.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = r.v * a.d[i];
  return r;
}

inline Dual sin(const Dual& a) {
  Dual r;
  r.v = std::sin(a.v);
  cplx c = std::cos(a.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = c * a.d[i];
  return r;
}

// x^k by repeated squaring; k >= 0.
template <class T>
T ipow(T x, int k) {
  T r(cplx(1.0));
  while (k > 0) {
    if (k & 1) r = r * x;
    k >>= 1;
    if (k) x = x * x;
  }
  return r;
}

}  // namespace holodyn
