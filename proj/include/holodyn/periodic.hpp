#pragma once

#include "holodyn/parallel.hpp"
#include "holodyn/polymap.hpp"
#include "holodyn/qmc.hpp"
#include "holodyn/spectrum.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace holodyn {

inline constexpr double kHyperbolicMargin = 1e-6;
inline constexpr double kTransverseMargin = 1e-6;
inline constexpr double kSuperAttracting = 1e-9;  // max |entry| of D f^m
inline constexpr double kDedupTol = 1e-8;

enum class Stability { super_attracting, attracting, repelling, saddle, non_hyperbolic };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::super_attracting: return "super_attracting";
    case Stability::attracting: return "attracting";
    case Stability::repelling: return "repelling";
    case Stability::saddle: return "saddle";
    case Stability::non_hyperbolic: return "non_hyperbolic";
  }
  return "?";
}

inline bool is_attracting(Stability s) {
  return s == Stability::attracting || s == Stability::super_attracting;
}

struct Cycle {
  std::vector<CVec> points;
  std::vector<cplx> multipliers;
  Stability kind = Stability::non_hyperbolic;
  bool transverse = false;
  double newton_residual = 0.0;

  int period() const { return static_cast<int>(points.size()); }
};

inline bool transverse_multipliers(const std::vector<cplx>& mult) {
  for (cplx l : mult)
    if (std::abs(l - 1.0) <= kTransverseMargin) return false;
  return true;
}

inline Stability stability_of(const std::vector<cplx>& mult, const CMatrix& dfm) {
  if (max_abs(dfm) <= kSuperAttracting) return Stability::super_attracting;
  bool all_in = true, all_out = true, any_border = false;
  for (cplx l : mult) {
    double a = std::abs(l);
    if (!(a < 1.0 - kHyperbolicMargin)) all_in = false;
    if (!(a > 1.0 + kHyperbolicMargin)) all_out = false;
    if (std::abs(a - 1.0) <= kHyperbolicMargin) any_border = true;
  }
  if (all_in) return Stability::attracting;
  if (all_out) return Stability::repelling;
  if (!any_border) return Stability::saddle;
  return Stability::non_hyperbolic;
}

// Largest residual |f(p_i) - p_{i+1}| around the cycle, and of f^m at each point.
inline double cycle_residual(const PolyMap& f, const std::vector<CVec>& pts) {
  const int m = static_cast<int>(pts.size());
  double r = 0.0;
  for (int i = 0; i < m; ++i) {
    CVec y;
    if (!eval_into(f, pts[i], y)) return std::numeric_limits<double>::infinity();
    r = std::max(r, sup_dist(y, pts[(i + 1) % m]));
  }
  return r;
}

inline Cycle classify(const PolyMap& f, const std::vector<CVec>& points) {
  if (points.empty()) throw Error("empty cycle");
  for (const auto& p : points) check_dim(f, p);
  const int m = static_cast<int>(points.size());
  double step_res = cycle_residual(f, points);
  if (!(step_res <= 1e-6 * std::max(1.0, sup_norm(points[0]))))
    throw Error("points do not form a cycle");

  Cycle c;
  c.points = points;
  // Chain rule along the given points rather than along a re-iterated orbit,
  // which drifts off the cycle by the step residual.
  CMatrix dfm = CMatrix::Identity(f.dim(), f.dim());
  for (const auto& p : points) dfm = jet(f, p).jacobian * dfm;
  c.multipliers = eigenvalues(dfm);
  c.kind = stability_of(c.multipliers, dfm);
  c.transverse = transverse_multipliers(c.multipliers);
  c.newton_residual = 0.0;
  for (const auto& p : points) c.newton_residual = std::max(c.newton_residual, sup_dist(iterated_jet(f, p, m).value, p));
  return c;
}

inline double periodic_residual(const PolyMap& f, const CVec& p, int m) {
  CVec x = p, y;
  for (int k = 0; k < m; ++k) {
    if (!eval_into(f, x, y)) return std::numeric_limits<double>::infinity();
    x = y;
  }
  return sup_dist(x, p);
}

inline int minimal_period(const PolyMap& f, const CVec& p, int m, double tol) {
  check_dim(f, p);
  if (m < 1) throw Error("period must be positive");
  if (!(periodic_residual(f, p, m) < tol)) throw Error("not periodic at tolerance");
  for (int d = 1; d < m; ++d)
    if (m % d == 0 && periodic_residual(f, p, d) < tol) return d;
  return m;
}

struct FinderOptions {
  int seeds = 256;
  double tol = 1e-10;
  int max_steps = 50;
  int max_halvings = 30;
  std::uint64_t seed = 1;
  std::vector<CVec> hints;  // tried before the quasi-random seeds, for every period
};

struct NewtonOutcome {
  enum class Status { converged, diverged, singular } status = Status::diverged;
  CVec x;
  double residual = std::numeric_limits<double>::infinity();
  // Dedup radius for x. Near a multiple root the residual reaches rounding
  // (even exact zero) long before x settles.
  double uncertainty = 0.0;
};

// Damped Newton on g(x) = f^m(x) - x. After the residual drops below tol the
// iteration continues while it still decreases the residual, so points at
// multiple roots (multiplier 1) are pinned down rather than left at sqrt(tol).
inline NewtonOutcome periodic_newton(const PolyMap& f, const CVec& x0, int m, const FinderOptions& opt) {
  using S = NewtonOutcome::Status;
  const int n = f.dim();
  NewtonOutcome out;
  out.x = x0;
  auto residual_at = [&](const CVec& x, Jet& j) {
    try {
      j = iterated_jet(f, x, m);
    } catch (const OverflowError&) {
      return std::numeric_limits<double>::infinity();
    }
    return sup_norm(j.value - x);
  };
  Jet J;
  double r = residual_at(out.x, J);
  if (!std::isfinite(r)) return out;

  bool below = r < opt.tol;
  double last_step = 0.0;
  for (int step = 0; step < opt.max_steps && r > 0.0; ++step) {
    CMatrix A = J.jacobian - CMatrix::Identity(n, n);
    Eigen::JacobiSVD<CMatrix> svd(A);
    const auto& s = svd.singularValues();
    if (s[0] == 0.0 || s[n - 1] <= 1e-14 * s[0]) {
      if (below) break;
      out.status = S::singular;
      out.residual = r;
      return out;
    }
    CVec delta = -A.partialPivLu().solve(J.value - out.x);
    double t = 1.0;
    bool accepted = false;
    Jet Jn;
    CVec xn;
    double rn = r;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      xn = out.x + t * delta;
      rn = residual_at(xn, Jn);
      if (rn < r) {
        accepted = true;
        break;
      }
      if (below) break;  // polishing: never damp, just stop
    }
    if (!accepted) break;
    out.x = xn;
    J = Jn;
    r = rn;
    last_step = sup_norm(t * delta);
    below = below || r < opt.tol;
    if (below && sup_norm(t * delta) <= 1e-15 * std::max(1.0, sup_norm(out.x))) break;
  }
  out.residual = r;
  out.status = r < opt.tol ? S::converged : S::diverged;
  CMatrix A = J.jacobian - CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(A);
  const double smin = svd.singularValues()[n - 1];
  CVec delta = A.partialPivLu().solve(J.value - out.x);
  out.uncertainty = all_finite(delta) ? 10.0 * sup_norm(delta) : 0.0;
  // A k-fold root leaves smin ~ e^(k-1) at distance e; the cube root covers k <= 4.
  if (smin < 1e-3) out.uncertainty = std::max({out.uncertainty, 10.0 * last_step, std::cbrt(smin)});
  out.uncertainty = std::min(out.uncertainty, 1e-3);
  return out;
}

namespace detail {

// Points deduplicated at kDedupTol, bucketed by re z_1.
class PointSet {
 public:
  bool contains(const CVec& p, double tol = kDedupTol) const {
    double key = p[0].real();
    for (auto it = index_.lower_bound(key - tol); it != index_.end() && it->first <= key + tol; ++it)
      if (sup_dist(points_[it->second], p) <= tol) return true;
    return false;
  }
  void insert(const CVec& p) {
    index_.emplace(p[0].real(), points_.size());
    points_.push_back(p);
  }

 private:
  std::vector<CVec> points_;
  std::multimap<double, size_t> index_;
};

inline void polish(const PolyMap& f, CVec& p, int d, double tol) {
  FinderOptions o;
  o.tol = tol;
  o.max_steps = 64;
  o.max_halvings = 0;
  auto r = periodic_newton(f, p, d, o);
  if (r.status == NewtonOutcome::Status::converged && r.residual <= periodic_residual(f, p, d)) p = r.x;
}

}  // namespace detail

struct PeriodCount {
  int period = 0;
  long long found = 0;   // distinct fixed points of f^period, any location
  double bound = 0.0;    // D^(period*n); 0 when unknown (entire maps)
  bool complete = false;
};

struct PeriodicSearch {
  std::vector<Cycle> cycles;  // cycles meeting the window
  std::vector<Cycle> outside; // found cycles that miss the window
  std::vector<PeriodCount> counts;
  long long converged = 0, diverged = 0, singular = 0, duplicates = 0;
};

inline bool cycle_less(const Cycle& a, const Cycle& b) {
  if (a.period() != b.period()) return a.period() < b.period();
  return lex_less(a.points[0], b.points[0]);
}

inline PeriodicSearch search_periodic(const PolyMap& f, int m_max, const Window& window, const FinderOptions& opt) {
  if (m_max < 1) throw Error("m_max must be at least 1");
  if (opt.seeds < 1) throw Error("seeds must be at least 1");
  if (!(opt.tol > 0.0)) throw Error("tolerance must be positive");
  if (window.dim() != f.dim()) throw Error("window dimension does not match map");

  using S = NewtonOutcome::Status;
  const int n = f.dim();
  Halton qmc(2 * n, opt.seed);
  detail::PointSet known;
  PeriodicSearch out;
  std::vector<Cycle> all;

  for (int m = 1; m <= m_max; ++m) {
    std::vector<CVec> starts = opt.hints;
    for (int i = 0; i < opt.seeds; ++i) {
      std::array<double, 6> u{};
      qmc.point(static_cast<std::uint64_t>(m - 1) * opt.seeds + i, u.data());
      starts.push_back(window.at_unit(u.data()));
    }
    std::vector<NewtonOutcome> res(starts.size());
    parallel_for(starts.size(), [&](size_t i) { res[i] = periodic_newton(f, starts[i], m, opt); });

    for (const auto& r : res) {
      if (r.status == S::singular) {
        ++out.singular;
        continue;
      }
      if (r.status == S::diverged) {
        ++out.diverged;
        continue;
      }
      ++out.converged;
      const double near = std::max(kDedupTol, r.uncertainty);
      if (known.contains(r.x, near)) {
        ++out.duplicates;
        continue;
      }
      int d = m;
      for (int e = 1; e < m; ++e)
        if (m % e == 0 && periodic_residual(f, r.x, e) < std::max(opt.tol, near)) {
          d = e;
          break;
        }
      std::vector<CVec> orbit{r.x};
      CVec y;
      bool ok = true;
      for (int k = 1; k < d && ok; ++k) {
        ok = eval_into(f, orbit.back(), y);
        orbit.push_back(y);
      }
      if (!ok) continue;
      for (auto& p : orbit) detail::polish(f, p, d, opt.tol);
      bool fresh = true;
      for (const auto& p : orbit) fresh = fresh && !known.contains(p, near);
      for (const auto& p : orbit)
        if (!known.contains(p, near)) known.insert(p);
      if (!fresh) {
        ++out.duplicates;
        continue;
      }

      int start = -1;
      for (int k = 0; k < d; ++k)
        if (window.contains(orbit[k]) && (start < 0 || lex_less(orbit[k], orbit[start]))) start = k;
      std::vector<CVec> rotated;
      for (int k = 0; k < d; ++k) rotated.push_back(orbit[(std::max(start, 0) + k) % d]);
      Cycle c;
      try {
        c = classify(f, rotated);
      } catch (const Error&) {
        continue;
      }
      (start >= 0 ? out.cycles : out.outside).push_back(std::move(c));
    }
  }

  for (int m = 1; m <= m_max; ++m) {
    PeriodCount pc;
    pc.period = m;
    for (const auto* list : {&out.cycles, &out.outside})
      for (const auto& c : *list)
        if (m % c.period() == 0) pc.found += c.period();
    if (!f.is_entire()) {
      pc.bound = std::pow(static_cast<double>(f.degree()), static_cast<double>(m) * n);
      pc.complete = static_cast<double>(pc.found) == pc.bound;
    }
    out.counts.push_back(pc);
  }
  std::sort(out.cycles.begin(), out.cycles.end(), cycle_less);
  std::sort(out.outside.begin(), out.outside.end(), cycle_less);
  return out;
}

inline std::vector<Cycle> find_periodic(const PolyMap& f, int m_max, const Window& window, int seeds = 256,
                                        double tol = 1e-10) {
  FinderOptions o;
  o.seeds = seeds;
  o.tol = tol;
  return search_periodic(f, m_max, window, o).cycles;
}

struct HyperbolicityReport {
  std::vector<Cycle> cycles;
  bool all_transverse = true;
  bool all_hyperbolic = true;
  double fraction_transverse = 1.0;
  double fraction_hyperbolic = 1.0;
  PeriodicSearch search;
};

inline HyperbolicityReport hyperbolicity_report(const PolyMap& f, int m_max, const Window& window,
                                                const FinderOptions& opt = {}) {
  HyperbolicityReport r;
  r.search = search_periodic(f, m_max, window, opt);
  r.cycles = r.search.cycles;
  int hyp = 0, tr = 0;
  for (const auto& c : r.cycles) {
    if (c.kind != Stability::non_hyperbolic) ++hyp;
    if (c.transverse) ++tr;
  }
  r.all_hyperbolic = hyp == static_cast<int>(r.cycles.size());
  r.all_transverse = tr == static_cast<int>(r.cycles.size());
  if (!r.cycles.empty()) {
    r.fraction_hyperbolic = static_cast<double>(hyp) / r.cycles.size();
    r.fraction_transverse = static_cast<double>(tr) / r.cycles.size();
  }
  return r;
}

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string cycles_csv(const std::vector<Cycle>& cycles, int n) {
  std::ostringstream os;
  os << "period";
  for (int i = 1; i <= n; ++i) os << ",re_p" << i << ",im_p" << i;
  for (int i = 1; i <= n; ++i) os << ",abs_lambda" << i;
  os << ",class,transverse,residual\n";
  for (const auto& c : cycles) {
    os << c.period();
    for (int i = 0; i < n; ++i) os << ',' << fmt_double(c.points[0][i].real()) << ',' << fmt_double(c.points[0][i].imag());
    for (int i = 0; i < n; ++i) os << ',' << fmt_double(std::abs(c.multipliers[i]));
    os << ',' << to_string(c.kind) << ',' << (c.transverse ? "true" : "false") << ',' << fmt_double(c.newton_residual)
       << '\n';
  }
  return os.str();
}

}  // namespace holodyn
