#pragma once

#include "holodyn/orbits.hpp"
#include "holodyn/parallel.hpp"
#include "holodyn/periodic.hpp"
#include "holodyn/roots.hpp"

#include <fstream>
#include <random>

namespace holodyn {

// Cells are indexed with the first gridded axis varying fastest.
struct EscapeGrid {
  Window window;
  int res = 0;
  std::vector<int> axes;   // gridded real axes; the others are fixed at base
  CVec base;
  int n_max = 0;
  double R = 0.0;
  std::vector<int> escape_iter;  // -1 for bounded cells

  size_t size() const { return escape_iter.size(); }
  bool escaped(size_t i) const { return escape_iter[i] >= 0; }
  double cell_width(int a) const { return window.axes[axes[a]].width() / res; }
  double max_cell_width() const {
    double w = 0.0;
    for (size_t a = 0; a < axes.size(); ++a) w = std::max(w, cell_width(static_cast<int>(a)));
    return w;
  }
  CVec center(size_t idx) const {
    CVec p = base;
    for (size_t a = 0; a < axes.size(); ++a) {
      int c = static_cast<int>(idx % res);
      idx /= res;
      const Interval& iv = window.axes[axes[a]];
      set_real_coord(p, axes[a], iv.lo + (c + 0.5) * iv.width() / res);
    }
    return p;
  }
  size_t bounded_count() const {
    return static_cast<size_t>(std::count(escape_iter.begin(), escape_iter.end(), -1));
  }
  // Measure of the bounded cells in the gridded coordinates.
  double bounded_measure() const {
    double cell = 1.0;
    for (size_t a = 0; a < axes.size(); ++a) cell *= cell_width(static_cast<int>(a));
    return cell * static_cast<double>(bounded_count());
  }
};

struct PointCloud {
  std::vector<CVec> points;
  std::string tag;
  std::string warning;

  bool empty() const { return points.empty(); }
  size_t size() const { return points.size(); }
};

// Sorted lexicographically, then near-duplicates (1e-8) dropped.
inline void normalize_cloud(PointCloud& c) {
  std::sort(c.points.begin(), c.points.end(), lex_less);
  std::vector<CVec> kept;
  detail::PointSet seen;
  for (const auto& p : c.points)
    if (!seen.contains(p)) {
      seen.insert(p);
      kept.push_back(p);
    }
  c.points = std::move(kept);
}

inline EscapeGrid escape_grid(const PolyMap& f, const Window& window, int res, int n_max, double R = 0.0,
                              std::vector<int> axes = {}, std::optional<CVec> base = std::nullopt) {
  if (window.dim() != f.dim()) throw Error("window dimension does not match map");
  if (res < 2) throw Error("grid resolution must be at least 2");
  if (n_max < 1) throw Error("n_max must be at least 1");
  if (axes.empty()) axes = {0, 1};
  for (int a : axes)
    if (a < 0 || a >= window.real_dim()) throw Error("grid axis out of range");
  double cells = std::pow(static_cast<double>(res), static_cast<double>(axes.size()));
  if (cells > 6.7e7) throw Error("grid too large");

  EscapeGrid g;
  g.window = window;
  g.res = res;
  g.axes = std::move(axes);
  g.base = base ? *base : window.center();
  if (g.base.size() != f.dim()) throw Error("slice point dimension does not match map");
  g.n_max = n_max;
  g.R = checked_radius(f, R);
  g.escape_iter.assign(static_cast<size_t>(cells), -1);

  const size_t rows = static_cast<size_t>(cells) / res;
  parallel_for(rows, [&](size_t row) {
    CVec x, y;
    for (size_t c = 0; c < static_cast<size_t>(res); ++c) {
      const size_t idx = row * res + c;
      x = g.center(idx);
      int k = 0;
      if (sup_norm(x) > g.R) {
        g.escape_iter[idx] = 0;
        continue;
      }
      for (k = 1; k <= n_max; ++k) {
        if (!eval_into(f, x, y) || sup_norm(y) > g.R) {
          g.escape_iter[idx] = k;
          break;
        }
        x = y;
      }
    }
  });
  return g;
}

// Bounded cells with an escaped neighbour along one gridded axis.
inline PointCloud boundary_extract(const EscapeGrid& g) {
  PointCloud out;
  out.tag = "boundary";
  const size_t nb = g.bounded_count();
  if (nb == 0 || nb == g.size()) {
    out.warning = nb == 0 ? "all cells escaped; boundary empty" : "all cells bounded; boundary empty";
    return out;
  }
  for (size_t idx = 0; idx < g.size(); ++idx) {
    if (g.escaped(idx)) continue;
    bool edge = false;
    size_t stride = 1, rest = idx;
    for (size_t a = 0; a < g.axes.size() && !edge; ++a, stride *= g.res) {
      int c = static_cast<int>(rest % g.res);
      rest /= g.res;
      if (c > 0 && g.escaped(idx - stride)) edge = true;
      if (c + 1 < g.res && g.escaped(idx + stride)) edge = true;
    }
    if (edge) out.points.push_back(g.center(idx));
  }
  normalize_cloud(out);
  return out;
}

struct RepellerOptions {
  FinderOptions finder;
  bool include_saddles = false;
};

inline PointCloud repeller_cloud(const PolyMap& f, int m_max, const Window& window, const RepellerOptions& opt = {}) {
  auto s = search_periodic(f, m_max, window, opt.finder);
  PointCloud out;
  out.tag = "repellers";
  for (const auto& c : s.cycles)
    if (c.kind == Stability::repelling || (opt.include_saddles && c.kind == Stability::saddle))
      out.points.insert(out.points.end(), c.points.begin(), c.points.end());
  normalize_cloud(out);
  return out;
}

// max over a in A of the sup-norm distance to B, exact. B is scanned outward
// from re z1 = re a1 in sorted order; |re difference| bounds the distance.
inline double directed_hausdorff(const std::vector<CVec>& A, const std::vector<CVec>& B) {
  if (B.empty()) return std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, size_t>> keys(B.size());
  for (size_t i = 0; i < B.size(); ++i) keys[i] = {B[i][0].real(), i};
  std::sort(keys.begin(), keys.end());
  double h = 0.0;
  for (const auto& a : A) {
    const double x = a[0].real();
    double best = std::numeric_limits<double>::infinity();
    auto mid = std::lower_bound(keys.begin(), keys.end(), std::make_pair(x, size_t{0}));
    for (auto it = mid; it != keys.end() && it->first - x < best; ++it) best = std::min(best, sup_dist(a, B[it->second]));
    for (auto it = mid; it != keys.begin();) {
      --it;
      if (x - it->first >= best) break;
      best = std::min(best, sup_dist(a, B[it->second]));
    }
    h = std::max(h, best);
  }
  return h;
}

inline double hausdorff(const PointCloud& A, const PointCloud& B) {
  if (A.empty() || B.empty()) throw Error("hausdorff distance needs two nonempty clouds");
  return std::max(directed_hausdorff(A.points, B.points), directed_hausdorff(B.points, A.points));
}

// Smallest k <= k_max with f^k(sample) in V for some quasi-random sample of U.
inline std::optional<int> spread_probe(const PolyMap& f, const Window& U, const Window& V, int k_max, int samples,
                                       std::uint64_t seed = 1) {
  if (U.dim() != f.dim() || V.dim() != f.dim()) throw Error("window dimension does not match map");
  const double R = iteration_radius(f);
  Halton h(U.real_dim(), seed);
  std::vector<CVec> pts{U.center()};
  std::array<double, 6> u{};
  for (int s = 1; s < samples; ++s) {
    h.point(s, u.data());
    pts.push_back(U.at_unit(u.data()));
  }
  std::vector<int> first(pts.size(), -1);
  parallel_for(pts.size(), [&](size_t i) {
    CVec x = pts[i], y;
    for (int k = 1; k <= k_max; ++k) {
      if (!eval_into(f, x, y) || sup_norm(y) > R) return;
      x = y;
      if (V.contains(x)) {
        first[i] = k;
        return;
      }
    }
  });
  int best = -1;
  for (int k : first)
    if (k > 0 && (best < 0 || k < best)) best = k;
  if (best < 0) return std::nullopt;
  return best;
}

// A repelling cycle meeting both cells, searched with seeds in U.
inline std::optional<Cycle> cycle_through(const PolyMap& f, const Window& U, const Window& V, int m_max,
                                          const FinderOptions& opt = {}) {
  auto s = search_periodic(f, m_max, U, opt);
  for (const auto& c : s.cycles) {
    if (c.kind != Stability::repelling) continue;
    for (const auto& p : c.points)
      if (V.contains(p)) return c;
  }
  return std::nullopt;
}

// Backward orbit under random branches of f^{-1}; n = 1 polynomials only.
inline PointCloud inverse_iteration(const PolyMap& f, cplx start, int count, std::uint64_t seed = 1, int burn = 50) {
  if (f.dim() != 1 || f.is_entire() || f.degree() < 2)
    throw Error("inverse iteration needs a one-dimensional polynomial of degree >= 2");
  std::vector<cplx> a(f.degree() + 1, 0.0);
  for (const auto& t : f.components()[0]) a[t.exps[0]] += t.coef;
  std::mt19937_64 rng(seed);
  PointCloud out;
  out.tag = "inverse";
  cplx w = start;
  for (int k = 0; k < burn + count; ++k) {
    auto c = a;
    c[0] -= w;
    auto roots = polynomial_roots(c);
    w = roots[std::uniform_int_distribution<size_t>(0, roots.size() - 1)(rng)];
    if (k >= burn) out.points.push_back(make_point({w}));
  }
  normalize_cloud(out);
  return out;
}

inline std::string cloud_csv(const PointCloud& c, int n) {
  std::ostringstream os;
  for (int i = 1; i <= n; ++i) os << (i > 1 ? "," : "") << "re_z" << i << ",im_z" << i;
  os << '\n';
  for (const auto& p : c.points) {
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << fmt_double(p[i].real()) << ',' << fmt_double(p[i].imag());
    os << '\n';
  }
  return os.str();
}

// Binary PGM with an optional comment line.
inline std::string pgm(int width, int height, const std::vector<unsigned char>& pixels, const std::string& comment) {
  std::string out = "P5\n";
  if (!comment.empty()) out += "# " + comment + "\n";
  out += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

// Two-axis grids only: bounded cells black, escaped cells brighter the sooner
// they leave. Top row is the largest value of the second axis.
inline std::vector<unsigned char> escape_pixels(const EscapeGrid& g) {
  if (g.axes.size() != 2) throw Error("images need a two-axis grid");
  std::vector<unsigned char> px(g.size());
  for (int row = 0; row < g.res; ++row)
    for (int col = 0; col < g.res; ++col) {
      int it = g.escape_iter[static_cast<size_t>(g.res - 1 - row) * g.res + col];
      px[static_cast<size_t>(row) * g.res + col] =
          it < 0 ? 0 : static_cast<unsigned char>(255 - (254LL * std::min(it, g.n_max)) / std::max(1, g.n_max));
    }
  return px;
}

}  // namespace holodyn
