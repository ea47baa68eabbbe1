#pragma once

#include "holodyn/noise.hpp"
#include "holodyn/parallel.hpp"
#include "holodyn/periodic.hpp"

#include "json.hpp"

#include <optional>
#include <sstream>

namespace holodyn {

struct Orbit {
  std::vector<CVec> points;
  bool escaped = false;
  std::optional<int> escape_index;
  std::optional<Window> bounded_in;
};

// Escape radius for iteration: the polynomial bound, the user radius of an
// entire map, or a large cut-off for affine maps (which have no bound).
inline double iteration_radius(const PolyMap& f) {
  if (f.is_entire()) return f.user_escape_radius();
  if (f.degree() < 2) return 1e12;
  return escape_radius(f);
}

inline double checked_radius(const PolyMap& f, double R) {
  if (R <= 0.0) return iteration_radius(f);
  if (!f.is_entire() && f.degree() >= 2 && R < escape_radius(f) * (1.0 - 1e-12))
    throw Error("escape radius below the map's bound");
  return R;
}

inline Orbit orbit(const PolyMap& f, const CVec& p, int n_max, double R = 0.0) {
  check_dim(f, p);
  if (n_max < 1) throw Error("n_max must be at least 1");
  R = checked_radius(f, R);
  Orbit o;
  o.points.push_back(p);
  if (sup_norm(p) > R) {
    o.escaped = true;
    o.escape_index = 0;
    return o;
  }
  CVec y;
  for (int k = 1; k <= n_max; ++k) {
    if (!eval_into(f, o.points.back(), y)) {
      o.escaped = true;
      o.escape_index = k;
      return o;
    }
    o.points.push_back(y);
    if (sup_norm(y) > R) {
      o.escaped = true;
      o.escape_index = k;
      return o;
    }
  }
  std::vector<Interval> box(2 * f.dim(), Interval{std::numeric_limits<double>::infinity(),
                                                  -std::numeric_limits<double>::infinity()});
  for (const auto& q : o.points)
    for (int k = 0; k < 2 * f.dim(); ++k) {
      box[k].lo = std::min(box[k].lo, real_coord(q, k));
      box[k].hi = std::max(box[k].hi, real_coord(q, k));
    }
  for (auto& iv : box)
    if (!(iv.lo < iv.hi)) {
      double pad = 1e-12 * std::max(1.0, std::abs(iv.lo));
      iv.lo -= pad;
      iv.hi += pad;
    }
  o.bounded_in = Window(box);
  return o;
}

inline std::vector<CVec> omega_limit(const PolyMap& f, const CVec& p, int burn_in = 500, int samples = 500,
                                     double cluster_tol = 1e-6) {
  if (samples < 1 || burn_in < 0) throw Error("omega_limit needs samples >= 1 and burn_in >= 0");
  Orbit o = orbit(f, p, burn_in + samples);
  if (o.escaped) throw Error("orbit escaped");
  std::vector<CVec> reps;
  for (size_t k = burn_in + 1; k < o.points.size(); ++k) {
    bool near = false;
    for (const auto& r : reps)
      if (sup_dist(r, o.points[k]) <= cluster_tol) {
        near = true;
        break;
      }
    if (!near) reps.push_back(o.points[k]);
  }
  std::sort(reps.begin(), reps.end(), lex_less);
  return reps;
}

inline double distance_to_set(const CVec& p, const std::vector<CVec>& set) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& q : set) d = std::min(d, sup_dist(p, q));
  return d;
}

// f^{mk}(p) enters the tol-ball of one cycle point and stays there through
// the horizon of n_max applications of f.
inline bool basin_test_B1(const PolyMap& f, const Cycle& cycle, const CVec& p, int n_max = 2000, double tol = 1e-6) {
  if (!is_attracting(cycle.kind)) throw Error("basin tests need an attracting cycle");
  check_dim(f, p);
  const int m = cycle.period();
  const double R = iteration_radius(f);
  CVec x = p, y;
  int target = -1;
  for (int steps = 0;; steps += m) {
    int near = -1;
    for (int j = 0; j < m; ++j)
      if (sup_dist(x, cycle.points[j]) < tol) near = j;
    if (target >= 0 && near != target) return false;
    if (target < 0) target = near;
    if (steps + m > n_max) break;
    for (int s = 0; s < m; ++s) {
      if (!eval_into(f, x, y) || sup_norm(y) > R) return false;
      x = y;
    }
  }
  return target >= 0;
}

// Center plus 16 points on each great circle spanned by a pair of real axes.
inline std::vector<CVec> shell_points(const CVec& p, double radius) {
  std::vector<CVec> out{p};
  const int d = 2 * static_cast<int>(p.size());
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int s = 0; s < 16; ++s) {
        double t = 2.0 * std::numbers::pi * s / 16.0;
        CVec q = p;
        set_real_coord(q, a, real_coord(q, a) + radius * std::cos(t));
        set_real_coord(q, b, real_coord(q, b) + radius * std::sin(t));
        out.push_back(q);
      }
  return out;
}

// Every shell orbit is in the tol-neighbourhood of the cycle set from some
// step on, with at least one full period inside before n_max. Single steps may
// expand (|f'| > 1 at a cycle point) even when the cycle attracts, so an early
// exit followed by re-entry is allowed.
inline bool basin_test_B2prime(const PolyMap& f, const Cycle& cycle, const CVec& p, double radius,
                               int n_max = 2000, double tol = 1e-6) {
  if (!is_attracting(cycle.kind)) throw Error("basin tests need an attracting cycle");
  check_dim(f, p);
  const double R = iteration_radius(f);
  const auto starts = shell_points(p, radius);
  std::vector<char> ok(starts.size(), 0);
  parallel_for(starts.size(), [&](size_t i) {
    CVec x = starts[i], y;
    int last_out = distance_to_set(x, cycle.points) < tol ? -1 : 0;
    for (int k = 1; k <= n_max; ++k) {
      if (!eval_into(f, x, y) || sup_norm(y) > R) return;
      x = y;
      if (distance_to_set(x, cycle.points) >= tol) last_out = k;
    }
    ok[i] = last_out + cycle.period() <= n_max;
  });
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

struct RneReport {
  bool robust = true;
  int maps = 0;          // f plus its perturbations
  int starts = 0;
  int failed_orbits = 0;
  double worst_gauge = 0.0;  // largest K-gauge seen; 1 is the boundary of K
};

// Sampling proxy: true is evidence, not proof.
inline RneReport rne_probe(const PolyMap& f, const CVec& p, double nbhd_radius, const Window& K, int pert_count,
                           double pert_eps, int horizon, std::uint64_t seed = 1) {
  check_dim(f, p);
  if (!K.contains(p)) throw Error("rne_probe needs p in K");
  std::vector<PolyMap> maps{f};
  for (int i = 0; i < pert_count; ++i) maps.push_back(random_perturbation(f, pert_eps, K, seed + i));
  const auto starts = shell_points(p, nbhd_radius);
  RneReport rep;
  rep.maps = static_cast<int>(maps.size());
  rep.starts = static_cast<int>(starts.size());
  const size_t total = maps.size() * starts.size();
  std::vector<double> gauge(total, 0.0);
  std::vector<char> failed(total, 0);
  parallel_for(total, [&](size_t idx) {
    const PolyMap& g = maps[idx / starts.size()];
    CVec x = starts[idx % starts.size()], y;
    double worst = K.gauge(x);
    bool out = !K.contains(x);
    for (int k = 1; k <= horizon && !out; ++k) {
      if (!eval_into(g, x, y)) {
        out = true;
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      x = y;
      worst = std::max(worst, K.gauge(x));
      out = !K.contains(x);
    }
    gauge[idx] = worst;
    failed[idx] = out;
  });
  for (size_t i = 0; i < total; ++i) {
    rep.worst_gauge = std::max(rep.worst_gauge, gauge[i]);
    rep.failed_orbits += failed[i];
  }
  rep.robust = rep.failed_orbits == 0;
  return rep;
}

inline std::string orbit_csv(const Orbit& o) {
  std::ostringstream os;
  const int n = o.points.empty() ? 0 : static_cast<int>(o.points[0].size());
  os << "k";
  for (int i = 1; i <= n; ++i) os << ",re_z" << i << ",im_z" << i;
  os << '\n';
  for (size_t k = 0; k < o.points.size(); ++k) {
    os << k;
    for (int i = 0; i < n; ++i) os << ',' << fmt_double(o.points[k][i].real()) << ',' << fmt_double(o.points[k][i].imag());
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json rne_json(const RneReport& r) {
  return {{"robust", r.robust},
          {"maps", r.maps},
          {"starts_per_map", r.starts},
          {"failed_orbits", r.failed_orbits},
          {"worst_gauge", r.worst_gauge}};
}

}  // namespace holodyn
