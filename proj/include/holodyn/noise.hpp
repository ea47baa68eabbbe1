#pragma once

#include "holodyn/polymap.hpp"
#include "holodyn/qmc.hpp"

#include <random>

namespace holodyn {

// Point on the distinguished boundary of K (product of the coordinate
// rectangles' perimeters, or of circles for a polydisc), u in [0,1)^n.
inline CVec distinguished_boundary_point(const Window& K, const double* u) {
  const int n = K.dim();
  CVec p(n);
  for (int i = 0; i < n; ++i) {
    const Interval& re = K.axes[2 * i];
    const Interval& im = K.axes[2 * i + 1];
    if (K.shape == Window::Shape::polydisc) {
      p[i] = cplx(re.mid(), im.mid()) + std::polar(0.5 * re.width(), 2.0 * std::numbers::pi * u[i]);
      continue;
    }
    const double w = re.width(), h = im.width();
    double s = u[i] * 2.0 * (w + h);
    if (s < w) {
      p[i] = {re.lo + s, im.lo};
    } else if ((s -= w) < h) {
      p[i] = {re.hi, im.lo + s};
    } else if ((s -= h) < w) {
      p[i] = {re.hi - s, im.hi};
    } else {
      p[i] = {re.lo, im.hi - (s - w)};
    }
  }
  return p;
}

// Sup-norm of a polynomial map on K. By the maximum principle in each
// variable the supremum sits on the distinguished boundary, so that is where
// the quasi-random samples go.
inline double sampled_sup_norm(const PolyMap& g, const Window& K, int samples = 10000) {
  if (K.dim() != g.dim()) throw Error("window dimension does not match map");
  Halton h(g.dim(), 0);
  double best = 0.0;
  std::array<double, 6> u{};
  CVec y;
  for (int s = 0; s < samples; ++s) {
    h.point(s, u.data());
    if (!eval_into(g, distinguished_boundary_point(K, u.data()), y)) return std::numeric_limits<double>::infinity();
    best = std::max(best, sup_norm(y));
  }
  return best;
}

// All exponent vectors of total degree <= d in n variables, graded then lex.
inline std::vector<std::array<int, kMaxDim>> monomials(int n, int d) {
  std::vector<std::array<int, kMaxDim>> out;
  for (int total = 0; total <= d; ++total) {
    std::array<int, kMaxDim> e{};
    if (n == 1) {
      e[0] = total;
      out.push_back(e);
      continue;
    }
    for (int a = total; a >= 0; --a) {
      if (n == 2) {
        out.push_back({a, total - a, 0});
        continue;
      }
      for (int b = total - a; b >= 0; --b) out.push_back({a, b, total - a - b});
    }
  }
  return out;
}

inline PolyMap scale_map(const PolyMap& g, cplx s) {
  std::vector<std::vector<Term>> comps = g.components();
  for (auto& c : comps)
    for (auto& t : c) t.coef *= s;
  return PolyMap(g.dim(), std::move(comps));
}

// Gaussian coefficient noise on every monomial of degree <= deg f, rescaled
// so its sampled sup-norm on K is eps.
inline PolyMap random_perturbation(const PolyMap& f, double eps, const Window& K, std::uint64_t seed,
                                   int samples = 4096) {
  if (f.is_entire()) throw Error("perturbations need a polynomial map");
  if (!(eps >= 0.0)) throw Error("perturbation size must be non-negative");
  if (eps == 0.0) return f;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const auto basis = monomials(f.dim(), std::max(1, f.degree()));
  std::vector<std::vector<Term>> comps(f.dim());
  for (auto& c : comps)
    for (const auto& e : basis) {
      double re = gauss(rng);
      double im = gauss(rng);
      c.push_back({e, cplx(re, im)});
    }
  PolyMap delta(f.dim(), std::move(comps));
  double s = sampled_sup_norm(delta, K, samples);
  return f + scale_map(delta, eps / s);
}

}  // namespace holodyn
