#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace holodyn {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;

// Fixed-capacity storage, so small vectors never touch the heap.
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite value while iterating; index is the orbit step that produced it.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, int index) : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

// Declared failure of a construction (exit code 3 at the command line).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int stage = -1, double min_eps = 0.0)
      : Error(what), stage_(stage), min_eps_(min_eps) {}
  int stage() const { return stage_; }
  double min_feasible_eps() const { return min_eps_; }

 private:
  int stage_;
  double min_eps_;
};

inline bool all_finite(const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  return true;
}

inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

// max_i |z_i|
inline double sup_norm(const CVec& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s = std::max(s, std::abs(v[i]));
  return s;
}

inline double sup_dist(const CVec& a, const CVec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

inline double max_abs(const CMatrix& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) s = std::max(s, std::abs(m(i, j)));
  return s;
}

// Real coordinate k of p: k = 2i is re z_i, k = 2i+1 is im z_i.
inline double real_coord(const CVec& p, int k) {
  return (k % 2 == 0) ? p[k / 2].real() : p[k / 2].imag();
}

inline void set_real_coord(CVec& p, int k, double x) {
  if (k % 2 == 0)
    p[k / 2].real(x);
  else
    p[k / 2].imag(x);
}

inline bool lex_less(const CVec& a, const CVec& b) {
  for (int k = 0; k < 2 * static_cast<int>(a.size()); ++k) {
    double x = real_coord(a, k), y = real_coord(b, k);
    if (x < y) return true;
    if (x > y) return false;
  }
  return false;
}

inline CVec make_point(std::initializer_list<cplx> zs) {
  CVec p(static_cast<Eigen::Index>(zs.size()));
  Eigen::Index i = 0;
  for (cplx z : zs) p[i++] = z;
  return p;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Product of 2n closed intervals (re z1, im z1, re z2, ...). A polydisc window
// uses the same bounding intervals but tests membership by |z_i - c_i| <= r_i.
struct Window {
  enum class Shape { box, polydisc };

  std::vector<Interval> axes;
  Shape shape = Shape::box;

  Window() = default;
  Window(std::vector<Interval> a, Shape s = Shape::box) : axes(std::move(a)), shape(s) { validate(); }

  static Window square(int n, double lo, double hi) {
    return Window(std::vector<Interval>(2 * n, Interval{lo, hi}));
  }
  static Window polydisc(int n, double radius) {
    return Window(std::vector<Interval>(2 * n, Interval{-radius, radius}), Shape::polydisc);
  }
  // Square box of half-width r around c.
  static Window around(const CVec& c, double r) {
    std::vector<Interval> a;
    for (int k = 0; k < 2 * static_cast<int>(c.size()); ++k)
      a.push_back({real_coord(c, k) - r, real_coord(c, k) + r});
    return Window(std::move(a));
  }

  void validate() const {
    if (axes.empty() || axes.size() % 2 != 0 || axes.size() > 2 * kMaxDim)
      throw Error("window needs 2n intervals with n in 1..3");
    for (const auto& iv : axes)
      if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw Error("window interval must satisfy lower < upper");
    if (shape == Shape::polydisc)
      for (size_t i = 0; i < axes.size(); i += 2)
        if (std::abs(axes[i].width() - axes[i + 1].width()) > 1e-12 * axes[i].width())
          throw Error("polydisc window needs square coordinate boxes");
  }

  int dim() const { return static_cast<int>(axes.size() / 2); }
  int real_dim() const { return static_cast<int>(axes.size()); }

  CVec center() const {
    CVec c(dim());
    for (int k = 0; k < real_dim(); ++k) set_real_coord(c, k, axes[k].mid());
    return c;
  }

  bool contains(const CVec& p) const {
    if (shape == Shape::polydisc) {
      for (int i = 0; i < dim(); ++i) {
        cplx c(axes[2 * i].mid(), axes[2 * i + 1].mid());
        if (std::abs(p[i] - c) > 0.5 * axes[2 * i].width()) return false;
      }
      return true;
    }
    for (int k = 0; k < real_dim(); ++k) {
      double x = real_coord(p, k);
      if (x < axes[k].lo || x > axes[k].hi) return false;
    }
    return true;
  }

  // Point at unit-cube coordinates u in [0,1]^{2n}. For polydiscs the pairs
  // (u_{2i}, u_{2i+1}) are mapped area-preservingly onto the disc.
  CVec at_unit(const double* u) const {
    CVec p(dim());
    if (shape == Shape::polydisc) {
      for (int i = 0; i < dim(); ++i) {
        double r = 0.5 * axes[2 * i].width() * std::sqrt(u[2 * i]);
        double t = 2.0 * std::numbers::pi * u[2 * i + 1];
        p[i] = cplx(axes[2 * i].mid() + r * std::cos(t), axes[2 * i + 1].mid() + r * std::sin(t));
      }
      return p;
    }
    for (int k = 0; k < real_dim(); ++k) set_real_coord(p, k, axes[k].lo + u[k] * axes[k].width());
    return p;
  }

  // Gauge relative to the centre: 1 on the boundary, < 1 inside.
  double gauge(const CVec& p) const {
    double g = 0.0;
    if (shape == Shape::polydisc) {
      for (int i = 0; i < dim(); ++i) {
        cplx c(axes[2 * i].mid(), axes[2 * i + 1].mid());
        g = std::max(g, std::abs(p[i] - c) / (0.5 * axes[2 * i].width()));
      }
      return g;
    }
    for (int k = 0; k < real_dim(); ++k)
      g = std::max(g, std::abs(real_coord(p, k) - axes[k].mid()) / (0.5 * axes[k].width()));
    return g;
  }
};

}  // namespace holodyn
