#pragma once

#include "holodyn/dual.hpp"
#include "holodyn/types.hpp"

#include <Eigen/SVD>

#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace holodyn {

struct Term {
  std::array<int, kMaxDim> exps{};
  cplx coef{};

  int degree() const { return exps[0] + exps[1] + exps[2]; }
};

// Composition tree for 1-D entire maps. A null inner node is the identity.
struct EntireNode {
  enum class Kind { poly, exp, sin };
  Kind kind = Kind::poly;
  std::vector<std::pair<int, cplx>> poly;  // (power, coefficient) for Kind::poly
  std::shared_ptr<const EntireNode> inner;
};

class PolyMap {
 public:
  PolyMap() = default;

  PolyMap(int n, std::vector<std::vector<Term>> components) : n_(n), comps_(std::move(components)) {
    if (n_ < 1 || n_ > kMaxDim) throw Error("map dimension must be 1, 2 or 3");
    if (static_cast<int>(comps_.size()) != n_) throw Error("map needs one term list per coordinate");
    for (const auto& c : comps_) {
      std::map<std::array<int, kMaxDim>, int> seen;
      for (const auto& t : c) {
        for (int j = 0; j < kMaxDim; ++j) {
          if (t.exps[j] < 0) throw Error("negative exponent");
          if (j >= n_ && t.exps[j] != 0) throw Error("exponent vector longer than n");
        }
        if (seen[t.exps]++) throw Error("duplicate exponent vector in a component");
      }
    }
    index_powers();
  }

  static PolyMap entire(std::shared_ptr<const EntireNode> root, double escape_radius) {
    if (!root) throw Error("empty entire tree");
    if (!(escape_radius > 0.0)) throw Error("entire maps need a positive escape radius");
    PolyMap f;
    f.n_ = 1;
    f.comps_.resize(1);
    f.root_ = std::move(root);
    f.user_radius_ = escape_radius;
    return f;
  }

  int dim() const { return n_; }
  const std::vector<std::vector<Term>>& components() const { return comps_; }
  bool is_entire() const { return root_ != nullptr; }
  const EntireNode* entire_root() const { return root_.get(); }
  std::shared_ptr<const EntireNode> entire_root_ptr() const { return root_; }
  double user_escape_radius() const { return user_radius_; }

  int component_degree(int i) const {
    int d = 0;
    for (const auto& t : comps_[i])
      if (t.coef != cplx(0.0)) d = std::max(d, t.degree());
    return d;
  }
  int degree() const {
    int d = 0;
    for (int i = 0; i < n_; ++i) d = std::max(d, component_degree(i));
    return d;
  }
  bool is_constant() const { return !is_entire() && degree() == 0; }

  // out[i] = f_i(x). Works for cplx and Dual.
  template <class T>
  void apply(const T* x, T* out) const {
    if (root_) {
      out[0] = eval_node(*root_, x[0]);
      return;
    }
    thread_local std::vector<T> pw;
    if (pw.size() < static_cast<size_t>(pow_total_)) pw.resize(pow_total_);
    for (int j = 0; j < n_; ++j) {
      T* b = pw.data() + pow_offset_[j];
      b[0] = T(cplx(1.0));
      for (int k = 1; k <= max_exp_[j]; ++k) b[k] = b[k - 1] * x[j];
    }
    for (int i = 0; i < n_; ++i) {
      T acc(cplx(0.0));
      for (const auto& t : comps_[i]) {
        T term(t.coef);
        for (int j = 0; j < n_; ++j)
          if (t.exps[j]) term = term * pw[pow_offset_[j] + t.exps[j]];
        acc = acc + term;
      }
      out[i] = acc;
    }
  }

 private:
  template <class T>
  static T eval_node(const EntireNode& node, const T& x) {
    using std::exp;
    using std::sin;
    T y = node.inner ? eval_node(*node.inner, x) : x;
    switch (node.kind) {
      case EntireNode::Kind::exp:
        return exp(y);
      case EntireNode::Kind::sin:
        return sin(y);
      case EntireNode::Kind::poly: {
        T acc(cplx(0.0));
        for (const auto& [k, c] : node.poly) acc = acc + ipow(y, k) * c;
        return acc;
      }
    }
    return y;
  }

  void index_powers() {
    pow_total_ = 0;
    for (int j = 0; j < n_; ++j) {
      max_exp_[j] = 0;
      for (const auto& c : comps_)
        for (const auto& t : c) max_exp_[j] = std::max(max_exp_[j], t.exps[j]);
      pow_offset_[j] = pow_total_;
      pow_total_ += max_exp_[j] + 1;
    }
  }

  int n_ = 0;
  std::vector<std::vector<Term>> comps_;
  std::shared_ptr<const EntireNode> root_;
  double user_radius_ = 0.0;
  std::array<int, kMaxDim> max_exp_{};
  std::array<int, kMaxDim> pow_offset_{};
  int pow_total_ = 0;
};

// Coefficient-wise sum; polynomial maps only.
inline PolyMap operator+(const PolyMap& f, const PolyMap& g) {
  if (f.is_entire() || g.is_entire()) throw Error("sums are defined for polynomial maps only");
  if (f.dim() != g.dim()) throw Error("dimension mismatch");
  std::vector<std::vector<Term>> comps(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    std::map<std::array<int, kMaxDim>, cplx> acc;
    for (const auto& t : f.components()[i]) acc[t.exps] += t.coef;
    for (const auto& t : g.components()[i]) acc[t.exps] += t.coef;
    for (const auto& [e, c] : acc) comps[i].push_back({e, c});
  }
  return PolyMap(f.dim(), std::move(comps));
}

struct Jet {
  CVec value;
  CMatrix jacobian;
};

// Unchecked evaluation for hot loops; returns false on a non-finite result.
inline bool eval_into(const PolyMap& f, const CVec& p, CVec& out) {
  std::array<cplx, kMaxDim> x{}, y{};
  for (int j = 0; j < f.dim(); ++j) x[j] = p[j];
  f.apply(x.data(), y.data());
  out.resize(f.dim());
  for (int j = 0; j < f.dim(); ++j) out[j] = y[j];
  return all_finite(out);
}

inline void check_dim(const PolyMap& f, const CVec& p) {
  if (p.size() != f.dim()) throw Error("point dimension does not match map");
}

inline CVec eval(const PolyMap& f, const CVec& p) {
  check_dim(f, p);
  CVec out;
  if (!eval_into(f, p, out)) throw OverflowError("numeric overflow", 1);
  return out;
}

inline bool jet_into(const PolyMap& f, const CVec& p, Jet& out) {
  const int n = f.dim();
  std::array<Dual, kMaxDim> x{}, y{};
  for (int j = 0; j < n; ++j) x[j] = Dual::variable(p[j], j);
  f.apply(x.data(), y.data());
  out.value.resize(n);
  out.jacobian.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.value[i] = y[i].v;
    for (int j = 0; j < n; ++j) out.jacobian(i, j) = y[i].d[j];
  }
  return all_finite(out.value) && all_finite(out.jacobian);
}

inline Jet jet(const PolyMap& f, const CVec& p) {
  check_dim(f, p);
  Jet j;
  if (!jet_into(f, p, j)) throw OverflowError("numeric overflow", 1);
  return j;
}

// value = f^m(p), jacobian = Df(p_{m-1}) ... Df(p_0).
inline Jet iterated_jet(const PolyMap& f, const CVec& p, int m) {
  check_dim(f, p);
  if (m < 1) throw Error("iterate count must be positive");
  Jet acc{p, CMatrix::Identity(f.dim(), f.dim())};
  Jet step;
  for (int k = 0; k < m; ++k) {
    bool ok = jet_into(f, acc.value, step);
    acc.value = step.value;
    if (ok) {
      acc.jacobian = step.jacobian * acc.jacobian;
      ok = all_finite(acc.jacobian);
    }
    if (!ok) throw OverflowError("numeric overflow at orbit index " + std::to_string(k + 1), k + 1);
  }
  return acc;
}

// Largest singular value, i.e. the Euclidean operator norm on R^{2n}.
inline double operator_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

inline int matrix_rank(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * s[0]) ++r;
  return r;
}

inline int rank_check(const PolyMap& f, const CVec& p) { return matrix_rank(jet(f, p).jacobian); }

namespace detail {

// Positive root of a r^d - sum_k b_k r^k - 2r, which has one sign change.
inline double escape_root(double a, int d, const std::vector<double>& lower) {
  auto g = [&](double r) {
    double s = a * std::pow(r, d) - 2.0 * r;
    for (size_t k = 0; k < lower.size(); ++k) s -= lower[k] * std::pow(r, static_cast<double>(k));
    return s;
  };
  double hi = 1.0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e150) throw Error("no polynomial escape bound");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace detail

// R with |p| > R  =>  |f(p)| >= 2|p| in the sup-norm. Exact root of the
// coefficient bound for n = 1; for n >= 2 the least size of the top-degree part
// on the unit sphere is sampled and halved.
inline double escape_radius(const PolyMap& f) {
  if (f.is_entire()) return f.user_escape_radius();
  const int n = f.dim();
  const int d = f.degree();
  if (d < 2) throw Error("no polynomial escape bound");

  std::vector<int> top;
  for (int i = 0; i < n; ++i)
    if (f.component_degree(i) == d) top.push_back(i);

  std::vector<double> lower(d, 0.0);
  for (int i : top) {
    std::vector<double> li(d, 0.0);
    for (const auto& t : f.components()[i])
      if (t.degree() < d) li[t.degree()] += std::abs(t.coef);
    for (int k = 0; k < d; ++k) lower[k] = std::max(lower[k], li[k]);
  }

  double lead;
  if (n == 1) {
    lead = 0.0;
    for (const auto& t : f.components()[0])
      if (t.degree() == d) lead = std::abs(t.coef);
  } else {
    // Deterministic directions on the unit sup-sphere.
    lead = std::numeric_limits<double>::infinity();
    const int samples = 4096;
    std::array<cplx, kMaxDim> u{};
    for (int s = 0; s < samples; ++s) {
      const int pin = s % n;
      for (int j = 0; j < n; ++j) {
        double a = std::fmod(0.5 + (s + 1) * (0.7548776662466927 + 0.1234567 * j), 1.0);
        double b = std::fmod(0.5 + (s + 1) * (0.5698402909980532 + 0.3141592 * j), 1.0);
        u[j] = std::polar(j == pin ? 1.0 : std::sqrt(a), 2.0 * std::numbers::pi * b);
      }
      double best = 0.0;
      for (int i : top) {
        cplx acc = 0.0;
        for (const auto& t : f.components()[i])
          if (t.degree() == d) {
            cplx m = t.coef;
            for (int j = 0; j < n; ++j) m *= ipow(u[j], t.exps[j]);
            acc += m;
          }
        best = std::max(best, std::abs(acc));
      }
      lead = std::min(lead, best);
    }
    lead *= 0.5;
    if (!(lead > 1e-12)) throw Error("no polynomial escape bound: top-degree part vanishes off the origin");
  }
  return detail::escape_root(lead, d, lower);
}

}  // namespace holodyn
