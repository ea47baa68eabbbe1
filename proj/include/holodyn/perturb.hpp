#pragma once

#include "holodyn/noise.hpp"
#include "holodyn/orbits.hpp"
#include "holodyn/periodic.hpp"
#include "holodyn/spectrum.hpp"

#include "json.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace holodyn {

struct JetConstraint {
  CVec at;
  CVec value;
  std::optional<CMatrix> jacobian;
};

struct Correction {
  PolyMap base;
  PolyMap delta;
  int budget = 0;
  std::vector<std::array<int, kMaxDim>> basis;
  Eigen::MatrixXcd coefficients;  // basis.size() x n, column i is component i
  double sup_norm_on_K = 0.0;
  double constraint_residual = 0.0;
  double coefficient_norm = 0.0;
  double condition_number = 1.0;

  PolyMap map() const { return base + delta; }
};

namespace detail {

using cplxl = std::complex<long double>;
using MatrixXcl = Eigen::Matrix<cplxl, Eigen::Dynamic, Eigen::Dynamic>;

inline cplxl monomial(const CVec& x, const std::array<int, kMaxDim>& e) {
  cplxl v = 1.0L;
  for (int j = 0; j < static_cast<int>(x.size()); ++j)
    for (int k = 0; k < e[j]; ++k) v *= cplxl(x[j]);
  return v;
}

inline cplxl monomial_partial(const CVec& x, const std::array<int, kMaxDim>& e, int j) {
  if (e[j] == 0) return 0.0L;
  auto d = e;
  --d[j];
  return static_cast<long double>(e[j]) * monomial(x, d);
}

inline PolyMap map_from_coefficients(int n, const std::vector<std::array<int, kMaxDim>>& basis,
                                     const Eigen::MatrixXcd& X) {
  std::vector<std::vector<Term>> comps(n);
  for (int i = 0; i < n; ++i)
    for (size_t k = 0; k < basis.size(); ++k)
      if (X(k, i) != cplx(0.0)) comps[i].push_back({basis[k], X(k, i)});
  return PolyMap(n, std::move(comps));
}

// Rows: one value row per constraint, then n derivative rows if a Jacobian is prescribed.
inline MatrixXcl constraint_matrix(const std::vector<JetConstraint>& cs,
                                   const std::vector<std::array<int, kMaxDim>>& basis) {
  size_t rows = 0;
  for (const auto& c : cs) rows += 1 + (c.jacobian ? c.at.size() : 0);
  MatrixXcl A(rows, basis.size());
  size_t r = 0;
  for (const auto& c : cs) {
    for (size_t k = 0; k < basis.size(); ++k) A(r, k) = monomial(c.at, basis[k]);
    ++r;
    if (!c.jacobian) continue;
    for (int j = 0; j < c.at.size(); ++j, ++r)
      for (size_t k = 0; k < basis.size(); ++k) A(r, k) = monomial_partial(c.at, basis[k], j);
  }
  return A;
}

inline double constraint_error(const PolyMap& h, const std::vector<JetConstraint>& cs) {
  double err = 0.0;
  for (const auto& c : cs) {
    Jet j;
    if (!jet_into(h, c.at, j)) return std::numeric_limits<double>::infinity();
    err = std::max(err, sup_dist(j.value, c.value));
    if (c.jacobian) err = std::max(err, max_abs(j.jacobian - *c.jacobian));
  }
  return err;
}

}  // namespace detail

// Minimum Euclidean coefficient norm delta (all monomials of degree <= budget)
// with f + delta meeting every value/1-jet constraint.
inline Correction interpolate_correction(const PolyMap& f, const std::vector<JetConstraint>& cs, int budget,
                                         const Window& K) {
  if (f.is_entire()) throw Error("perturbations need a polynomial map");
  if (budget < 0) throw Error("degree budget must be non-negative");
  if (K.dim() != f.dim()) throw Error("window dimension does not match map");
  const int n = f.dim();
  for (size_t a = 0; a < cs.size(); ++a) {
    const auto& c = cs[a];
    if (c.at.size() != n || c.value.size() != n) throw Error("constraint dimension does not match map");
    if (c.jacobian && (c.jacobian->rows() != n || c.jacobian->cols() != n))
      throw Error("constraint Jacobian must be n x n");
    if (!all_finite(c.at) || !all_finite(c.value)) throw Error("constraint is not finite");
    for (size_t b = 0; b < a; ++b)
      if (sup_dist(cs[b].at, c.at) < 1e-8) throw Error("constraint points must be distinct");
  }

  Correction out;
  out.base = f;
  out.budget = budget;
  out.basis = monomials(n, budget);
  const auto M = static_cast<Eigen::Index>(out.basis.size());
  out.coefficients = Eigen::MatrixXcd::Zero(M, n);
  if (!cs.empty()) {
    // Extended precision: nearby orbit points make the monomial system badly
    // conditioned, and the jets must hold to ~1e-12.
    detail::MatrixXcl A = detail::constraint_matrix(cs, out.basis);
    detail::MatrixXcl B(A.rows(), n);
    Eigen::Index r = 0;
    for (const auto& c : cs) {
      Jet j;
      if (!jet_into(f, c.at, j)) throw OverflowError("numeric overflow", 1);
      for (int i = 0; i < n; ++i) B(r, i) = detail::cplxl(c.value[i]) - detail::cplxl(j.value[i]);
      ++r;
      if (!c.jacobian) continue;
      // Row for d/dz_j carries column j of the Jacobian difference.
      for (int col = 0; col < n; ++col, ++r)
        for (int i = 0; i < n; ++i) B(r, i) = detail::cplxl((*c.jacobian)(i, col)) - detail::cplxl(j.jacobian(i, col));
    }
    Eigen::CompleteOrthogonalDecomposition<detail::MatrixXcl> cod(A);
    detail::MatrixXcl X = cod.solve(B);
    X += cod.solve(detail::MatrixXcl(B - A * X));  // one refinement step; stays in the row space
    out.coefficients = X.unaryExpr([](const detail::cplxl& z) { return cplx(z); });
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A.unaryExpr([](const detail::cplxl& z) { return cplx(z); }));
    const auto& s = svd.singularValues();
    out.condition_number =
        s.size() == 0 ? 1.0 : (s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY);
  }
  out.delta = detail::map_from_coefficients(n, out.basis, out.coefficients);
  out.coefficient_norm = out.coefficients.norm();
  double scale = 1.0;
  for (const auto& c : cs) {
    scale = std::max(scale, sup_norm(c.value));
    if (c.jacobian) scale = std::max(scale, max_abs(*c.jacobian));
  }
  out.constraint_residual = detail::constraint_error(out.map(), cs);
  if (!(out.constraint_residual <= 1e-8 * scale)) throw Error("constraint system infeasible; raise degree_budget");
  out.sup_norm_on_K = sampled_sup_norm(out.delta, K, 10000);
  return out;
}

struct ClosedOrbit {
  PolyMap h;
  Cycle cycle;
  Correction correction;
  std::vector<cplx> law_multipliers;  // eigenvalues of prescribed_jac * D f^m(q)
  double law_error = 0.0;
};

// Pins the 1-jet of f along q, f(q), ..., f^{m-1}(q) and sends f^m(q) back to q
// with the prescribed Jacobian, giving an (m+1)-cycle of h.
inline ClosedOrbit close_orbit(const PolyMap& f, const CVec& q, int m, const CMatrix& prescribed_jac, const Window& K,
                               int budget) {
  check_dim(f, q);
  if (m < 0) throw Error("m must be non-negative");
  const int n = f.dim();
  if (prescribed_jac.rows() != n || prescribed_jac.cols() != n) throw Error("prescribed Jacobian must be n x n");
  std::vector<CVec> pts{q};
  for (int k = 0; k < m; ++k) pts.push_back(eval(f, pts.back()));
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = 0; b < a; ++b)
      if (sup_dist(pts[a], pts[b]) < 1e-8) throw Error("degenerate orbit; cannot prescribe jet");
  CMatrix dfm = CMatrix::Identity(n, n);
  if (m > 0) {
    dfm = iterated_jet(f, q, m).jacobian;
    if (matrix_rank(dfm) < n) throw Error("degenerate orbit; cannot prescribe jet");
  }

  std::vector<JetConstraint> cs;
  for (int k = 0; k < m; ++k) cs.push_back({pts[k], pts[k + 1], jet(f, pts[k]).jacobian});
  cs.push_back({pts[m], q, prescribed_jac});

  ClosedOrbit out;
  out.correction = interpolate_correction(f, cs, budget, K);
  out.h = out.correction.map();
  out.cycle = classify(out.h, pts);
  out.law_multipliers = eigenvalues(CMatrix(prescribed_jac * dfm));
  for (size_t i = 0; i < out.law_multipliers.size(); ++i)
    out.law_error = std::max(out.law_error, std::abs(out.law_multipliers[i] - out.cycle.multipliers[i]));
  return out;
}

// Jacobian choices: 0 (super-attracting), 10 (D f^m)^{-1} (multipliers all 10),
// diag(1/2, 2, ...) (D f^m)^{-1} (saddle).
inline ClosedOrbit make_periodic_point(const PolyMap& f, const CVec& q, int m, Stability kind, const Window& K,
                                       int budget) {
  check_dim(f, q);
  const int n = f.dim();
  if (kind == Stability::saddle && n < 2) throw Error("saddle cycles need dimension >= 2");
  if (kind != Stability::super_attracting && kind != Stability::repelling && kind != Stability::saddle)
    throw Error("kind must be super_attracting, repelling or saddle");
  CMatrix P = CMatrix::Zero(n, n);
  if (kind != Stability::super_attracting) {
    CMatrix dfm = m > 0 ? iterated_jet(f, q, m).jacobian : CMatrix(CMatrix::Identity(n, n));
    if (matrix_rank(dfm) < n) throw Error("degenerate orbit; cannot prescribe jet");
    CMatrix target = CMatrix::Identity(n, n) * 10.0;
    if (kind == Stability::saddle) {
      target = CMatrix::Identity(n, n) * 2.0;
      target(0, 0) = 0.5;
    }
    P = target * dfm.inverse();
  }
  ClosedOrbit out = close_orbit(f, q, m, P, K, budget);
  if (out.cycle.kind != kind)
    throw Error(std::string("produced cycle is ") + to_string(out.cycle.kind) + ", expected " + to_string(kind));
  return out;
}

struct EscapeStage {
  int index = 0;
  CVec endpoint;       // point whose image is moved
  CVec target;
  double norm_on_K = 0.0;   // sampled on K_index
  double allowance = 0.0;   // eps / 2^(index+1)
  double coefficient_norm = 0.0;
  double residual = 0.0;
  bool corrected = false;
};

struct EscapingResult {
  PolyMap h;
  int m = 0;                  // first exit from K_0 (0 when forced)
  bool forced = false;
  std::vector<CVec> orbit;    // direct iteration of h, m + N + 1 points
  std::vector<EscapeStage> stages;
  double geometric_sum = 0.0;
  double total_norm_K0 = 0.0; // sampled sup of h - f on K_0
  bool exits = false;
  double min_feasible_eps = 0.0;
};

namespace detail {

// Largest s in [0, hi] with c + s d in K (K convex, c in K); bisection.
inline double ray_exit(const Window& K, const CVec& c, const CVec& d, double hi) {
  double lo = 0.0;
  while (K.contains(c + hi * d)) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (K.contains(c + mid * d) ? lo : hi) = mid;
  }
  return lo;
}

// y if it lies outside K_in; otherwise the point on the ray from K_in's centre
// halfway across the shell to K_out (or 5% beyond K_in when there is no K_out).
inline CVec push_outside(const CVec& y, const Window& K_in, const Window* K_out) {
  if (!K_in.contains(y)) return y;
  const CVec c = K_in.center();
  CVec d = y - c;
  if (sup_norm(d) < 1e-12) {
    d = CVec::Zero(y.size());
    d[0] = 1.0;
  }
  d /= sup_norm(d);
  const double a = ray_exit(K_in, c, d, 1.0);
  double s = 1.05 * a;
  if (K_out && K_out->contains(c)) {
    const double b = ray_exit(*K_out, c, d, a);
    if (b > a) s = 0.5 * (a + b);
  }
  return c + s * d;
}

}  // namespace detail

// Staged build: stage n moves the image of the current endpoint h^{m+n}(q) to
// a point outside K_{n+1} (a natural image already outside is kept) while
// pinning the values along the earlier orbit. Nothing depends on eps, which
// is only compared against the stage norms afterwards.
inline EscapingResult escaping_construction(const PolyMap& f, const CVec& q, const std::vector<Window>& windows,
                                            double eps, int budget, int horizon = 1000) {
  check_dim(f, q);
  if (f.is_entire()) throw Error("perturbations need a polynomial map");
  if (windows.size() < 2) throw Error("need windows K_0, ..., K_N with N >= 1");
  const int N = static_cast<int>(windows.size()) - 1;
  if (N > 6) throw Error("at most 6 stages");
  if (!(eps > 0.0)) throw Error("eps must be positive");
  for (const auto& K : windows)
    if (K.dim() != f.dim()) throw Error("window dimension does not match map");
  for (int i = 0; i < N; ++i)
    if (!windows[i + 1].contains(windows[i].center())) throw Error("windows must be nested");
  if (!windows[0].contains(q)) throw Error("q must lie in K_0");

  EscapingResult res;
  std::vector<CVec> prefix{q};  // q, ..., f^m(q)
  for (int k = 1; k <= horizon; ++k) {
    CVec y;
    if (!eval_into(f, prefix.back(), y)) throw OverflowError("numeric overflow at orbit index " + std::to_string(k), k);
    prefix.push_back(y);
    if (!windows[0].contains(y)) {
      res.m = k;
      break;
    }
  }
  if (res.m == 0) {
    res.forced = true;
    prefix = {q};
  }

  PolyMap h = f;
  bool changed = false;
  std::vector<CVec> ends{prefix.back()};  // e_0 = h^m(q), e_{n+1} = target of stage n
  for (int n = 0; n < N; ++n) {
    EscapeStage st;
    st.index = n;
    st.endpoint = ends[n];
    st.allowance = eps / std::ldexp(1.0, n + 1);
    const CVec natural = eval(h, ends[n]);
    st.target = detail::push_outside(natural, windows[n + 1], n + 2 <= N ? &windows[n + 2] : nullptr);
    st.corrected = sup_dist(natural, st.target) > 0.0;
    if (st.corrected) {
      std::vector<JetConstraint> cs;
      for (size_t k = 0; k + 1 < prefix.size(); ++k) cs.push_back({prefix[k], prefix[k + 1], std::nullopt});
      for (int j = 0; j < n; ++j) cs.push_back({ends[j], ends[j + 1], std::nullopt});
      cs.push_back({ends[n], st.target, std::nullopt});
      Correction c = interpolate_correction(h, cs, budget, windows[n]);
      st.norm_on_K = c.sup_norm_on_K;
      st.coefficient_norm = c.coefficient_norm;
      st.residual = c.constraint_residual;
      h = c.map();
      changed = true;
    }
    ends.push_back(st.target);
    res.geometric_sum += st.norm_on_K;
    res.min_feasible_eps = std::max(res.min_feasible_eps, std::ldexp(st.norm_on_K, n + 1));
    res.stages.push_back(st);
  }

  for (const auto& st : res.stages)
    if (!(st.norm_on_K < st.allowance))
      throw InfeasibleError("stage " + std::to_string(st.index) + " infeasible: sampled norm " + fmt_double(st.norm_on_K) +
                                " exceeds eps/2^" + std::to_string(st.index + 1) + "; minimal feasible eps " +
                                fmt_double(res.min_feasible_eps),
                            st.index, res.min_feasible_eps);

  res.h = h;
  res.total_norm_K0 = !changed ? 0.0 : sampled_sup_norm(h + scale_map(f, -1.0), windows[0], 10000);
  res.orbit = {q};
  const int steps = (res.forced ? 0 : res.m) + N;
  for (int k = 0; k < steps; ++k) {
    CVec y;
    if (!eval_into(h, res.orbit.back(), y)) break;
    res.orbit.push_back(y);
  }
  res.exits = static_cast<int>(res.orbit.size()) == steps + 1 && !windows[N].contains(res.orbit.back());
  return res;
}

inline PolyMap hakim_map(int dim) {
  if (dim < 1 || dim > kMaxDim) throw Error("dimension must be 1, 2 or 3");
  std::vector<std::vector<Term>> comps(dim);
  for (int i = 0; i < dim; ++i) {
    std::array<int, kMaxDim> e1{}, e2{};
    e1[i] = 1;
    e2[i] = 2;
    comps[i] = {{e1, 1.0}, {e2, 1.0}};
  }
  return PolyMap(dim, std::move(comps));
}

struct HakimReport {
  int dim = 1;
  std::vector<std::pair<int, double>> decay;  // (k, |f^k(start)|) at k = 10^j and steps
  bool monotone = true;
  double rate_constant = 0.0;  // midpoint of k |f^k| over k in [10^3, 10^4]
  double rate_spread = 0.0;    // max |k |f^k| - c| / c over that range
  bool rate_measured = false;
  Cycle origin;
  std::vector<std::pair<int, double>> derivative_growth;  // (k, sampled sup |D f^k| on a shell)
};

// Orbit of a petal start under (z_i + z_i^2)_i. The petal is on the negative
// real side of each coordinate with these signs.
inline HakimReport hakim_experiment(int dim, const CVec& start, int steps) {
  PolyMap f = hakim_map(dim);
  check_dim(f, start);
  if (steps < 1) throw Error("steps must be positive");
  HakimReport rep;
  rep.dim = dim;
  const double R = iteration_radius(f);
  CVec x = start, y;
  double prev = sup_norm(x);
  double lo = INFINITY, hi = 0.0;
  int next_mark = 1;
  for (int k = 1; k <= steps; ++k) {
    if (!eval_into(f, x, y) || sup_norm(y) > R) throw Error("start not in petal");
    x = y;
    double a = sup_norm(x);
    if (a > prev) rep.monotone = false;
    prev = a;
    if (k == next_mark || k == steps) {
      rep.decay.emplace_back(k, a);
      if (k == next_mark) next_mark *= 10;
    }
    if (k >= 1000 && k <= 10000) {
      lo = std::min(lo, k * a);
      hi = std::max(hi, k * a);
    }
  }
  if (steps >= 10000 && hi > 0.0) {
    rep.rate_measured = true;
    rep.rate_constant = 0.5 * (lo + hi);
    rep.rate_spread = (hi - lo) / (hi + lo);
  }
  rep.origin = classify(f, {CVec::Zero(dim)});

  // Non-normality proxy: |D f^k| on a small shell around 0 blows up on the
  // repelling side; overflow counts as infinite.
  const auto shell = shell_points(CVec::Zero(dim), 0.05);
  for (int k : {1, 10, 100, 1000}) {
    double best = 0.0;
    for (const auto& p : shell) {
      double v = INFINITY;
      try {
        v = operator_norm(iterated_jet(f, p, k).jacobian);
      } catch (const OverflowError&) {
      }
      best = std::max(best, v);
    }
    rep.derivative_growth.emplace_back(k, best);
  }
  return rep;
}

inline nlohmann::json correction_json(const Correction& c, const std::vector<JetConstraint>& cs) {
  using nlohmann::json;
  json jc = json::array();
  for (const auto& k : cs) {
    json at = json::array(), val = json::array();
    for (int i = 0; i < k.at.size(); ++i) {
      at.push_back({k.at[i].real(), k.at[i].imag()});
      val.push_back({k.value[i].real(), k.value[i].imag()});
    }
    json e = {{"at", at}, {"value", val}, {"jet", k.jacobian.has_value()}};
    jc.push_back(e);
  }
  return {{"constraints", jc},
          {"budget", c.budget},
          {"coefficient_norm", c.coefficient_norm},
          {"sup_norm_on_K", c.sup_norm_on_K},
          {"constraint_residual", c.constraint_residual},
          {"condition_number", std::isfinite(c.condition_number) ? json(c.condition_number) : json(nullptr)}};
}

inline nlohmann::json point_json(const CVec& p) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < p.size(); ++i) a.push_back({p[i].real(), p[i].imag()});
  return a;
}

inline nlohmann::json cycle_json(const Cycle& c) {
  using nlohmann::json;
  json pts = json::array(), mult = json::array();
  for (const auto& p : c.points) pts.push_back(point_json(p));
  for (cplx l : c.multipliers) mult.push_back({l.real(), l.imag()});
  return {{"period", c.period()},
          {"points", pts},
          {"multipliers", mult},
          {"class", to_string(c.kind)},
          {"transverse", c.transverse},
          {"residual", c.newton_residual}};
}

inline nlohmann::json escaping_json(const EscapingResult& r) {
  using nlohmann::json;
  json st = json::array();
  for (const auto& s : r.stages)
    st.push_back({{"stage", s.index},
                  {"endpoint", point_json(s.endpoint)},
                  {"target", point_json(s.target)},
                  {"corrected", s.corrected},
                  {"sup_norm_on_K", s.norm_on_K},
                  {"allowance", s.allowance},
                  {"coefficient_norm", s.coefficient_norm},
                  {"residual", s.residual}});
  json orb = json::array();
  for (const auto& p : r.orbit) orb.push_back(point_json(p));
  return {{"m", r.m},
          {"forced", r.forced},
          {"stages", st},
          {"geometric_sum", r.geometric_sum},
          {"total_norm_K0", r.total_norm_K0},
          {"min_feasible_eps", r.min_feasible_eps},
          {"exits", r.exits},
          {"orbit", orb}};
}

inline nlohmann::json hakim_json(const HakimReport& r) {
  using nlohmann::json;
  json decay = json::array(), growth = json::array();
  for (auto [k, v] : r.decay) decay.push_back({k, v});
  for (auto [k, v] : r.derivative_growth) growth.push_back({k, std::isfinite(v) ? json(v) : json("inf")});
  json out = {{"dim", r.dim},
              {"decay", decay},
              {"monotone", r.monotone},
              {"origin", cycle_json(r.origin)},
              {"derivative_growth", growth}};
  if (r.rate_measured) {
    out["rate_constant"] = r.rate_constant;
    out["rate_spread"] = r.rate_spread;
  }
  return out;
}

}  // namespace holodyn
