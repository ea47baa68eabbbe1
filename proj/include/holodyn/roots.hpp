#pragma once

#include "holodyn/types.hpp"

#include <vector>

namespace holodyn {

namespace detail {

inline cplx horner(const std::vector<cplx>& a, cplx z) {
  cplx s = 0.0;
  for (size_t k = a.size(); k-- > 0;) s = s * z + a[k];
  return s;
}

inline cplx horner_deriv(const std::vector<cplx>& a, cplx z) {
  cplx s = 0.0;
  for (size_t k = a.size(); k-- > 1;) s = s * z + static_cast<double>(k) * a[k];
  return s;
}

}  // namespace detail

// All roots of sum_k a[k] z^k (lowest degree first) by Durand-Kerner with
// Newton polish. Exact zero roots are split off first.
inline std::vector<cplx> polynomial_roots(std::vector<cplx> a, int max_sweeps = 200) {
  while (!a.empty() && a.back() == cplx(0.0)) a.pop_back();
  if (a.size() < 2) throw Error("polynomial has no roots to find");

  std::vector<cplx> roots;
  size_t zeros = 0;
  while (a[zeros] == cplx(0.0)) ++zeros;
  roots.assign(zeros, cplx(0.0));
  a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(zeros));

  const size_t d = a.size() - 1;
  if (d == 0) return roots;

  const cplx lead = a.back();
  for (auto& c : a) c /= lead;

  // Cauchy bound for the start circle.
  double bound = 0.0;
  for (size_t k = 0; k < d; ++k) bound = std::max(bound, std::abs(a[k]));
  bound += 1.0;

  std::vector<cplx> z(d);
  const cplx seed(0.4, 0.9);
  cplx w = 1.0;
  for (size_t i = 0; i < d; ++i) {
    z[i] = w * (0.5 * bound);
    w *= seed;
  }

  bool converged = (d == 1);
  if (d == 1) z[0] = -a[0];
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double worst = 0.0;
    for (size_t i = 0; i < d; ++i) {
      cplx denom = 1.0;
      for (size_t j = 0; j < d; ++j)
        if (j != i) denom *= (z[i] - z[j]);
      if (denom == cplx(0.0)) denom = 1e-300;
      cplx step = detail::horner(a, z[i]) / denom;
      z[i] -= step;
      worst = std::max(worst, std::abs(step) / std::max(1.0, std::abs(z[i])));
    }
    if (!std::isfinite(worst)) break;
    // Multiple roots are only determined to about sqrt(eps); accept a tiny
    // backward error as well as a tiny step.
    converged = true;
    for (size_t i = 0; i < d && converged; ++i) {
      double scale = 0.0, r = std::abs(z[i]), rk = 1.0;
      for (size_t k = 0; k <= d; ++k, rk *= r) scale += std::abs(a[k]) * rk;
      converged = std::abs(detail::horner(a, z[i])) <= 1e-14 * static_cast<double>(d) * scale;
    }
    converged = converged || worst <= 1e-14;
  }
  for (auto& r : z)
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) converged = false;
  if (!converged) throw Error("root iteration failed");

  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      cplx dp = detail::horner_deriv(a, r);
      if (dp == cplx(0.0)) break;
      cplx cand = r - detail::horner(a, r) / dp;
      if (std::abs(detail::horner(a, cand)) < std::abs(detail::horner(a, r)))
        r = cand;
      else
        break;
    }
  }
  // A k-fold root scatters by eps^(1/k) but the cluster mean stays accurate.
  std::vector<int> group(d);
  for (size_t i = 0; i < d; ++i) group[i] = static_cast<int>(i);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i + 1; j < d; ++j)
      if (std::abs(z[i] - z[j]) <= 1e-6 * std::max(1.0, std::abs(z[i]))) {
        int from = group[j], to = group[i];
        for (auto& g : group)
          if (g == from) g = to;
      }
  for (size_t i = 0; i < d; ++i) {
    cplx sum = 0.0;
    int count = 0;
    for (size_t j = 0; j < d; ++j)
      if (group[j] == group[i]) {
        sum += z[j];
        ++count;
      }
    if (count == 1) {
      roots.push_back(z[i]);
      continue;
    }
    // Refine the mean as the simple root of the (k-1)-th derivative.
    std::vector<cplx> q = a;
    for (int k = 1; k < count; ++k) {
      for (size_t t = 1; t < q.size(); ++t) q[t - 1] = static_cast<double>(t) * q[t];
      q.pop_back();
    }
    cplx r = sum / static_cast<double>(count);
    for (int it = 0; it < 5; ++it) {
      cplx dq = detail::horner_deriv(q, r);
      if (dq == cplx(0.0)) break;
      cplx cand = r - detail::horner(q, r) / dq;
      if (std::abs(cand - r) > 1e-6 * std::max(1.0, std::abs(r))) break;
      r = cand;
    }
    roots.push_back(r);
  }
  return roots;
}

}  // namespace holodyn
