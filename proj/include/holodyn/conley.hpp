#pragma once

#include "holodyn/orbits.hpp"
#include "holodyn/parallel.hpp"
#include "holodyn/periodic.hpp"
#include "holodyn/qmc.hpp"

#include "json.hpp"

#include <deque>
#include <optional>
#include <sstream>

namespace holodyn {

// Uniform lattice of 2^depth boxes per real axis.
struct BoxGrid {
  Window window;
  int depth = 0;
  int per_axis = 0;
  int dims = 0;
  std::uint32_t count = 0;

  BoxGrid() = default;
  BoxGrid(Window w, int d) : window(std::move(w)), depth(d) {
    if (depth < 1) throw Error("depth must be at least 1");
    dims = window.real_dim();
    if (depth * dims > 22) throw Error("box grid too large (depth * real dimension must be <= 22)");
    per_axis = 1 << depth;
    count = 1u << (depth * dims);
  }

  std::uint32_t infinity() const { return count; }
  std::uint32_t node_count() const { return count + 1; }

  int coord(std::uint32_t idx, int axis) const { return static_cast<int>((idx >> (depth * axis)) & (per_axis - 1)); }
  std::uint32_t index(const std::array<int, 6>& c) const {
    std::uint32_t idx = 0;
    for (int a = dims - 1; a >= 0; --a) idx = (idx << depth) | static_cast<std::uint32_t>(c[a]);
    return idx;
  }
  double width(int axis) const { return window.axes[axis].width() / per_axis; }
  Interval bounds(std::uint32_t idx, int axis) const {
    double lo = window.axes[axis].lo + coord(idx, axis) * width(axis);
    return {lo, lo + width(axis)};
  }
  CVec center(std::uint32_t idx) const {
    CVec p(dims / 2);
    for (int a = 0; a < dims; ++a) set_real_coord(p, a, bounds(idx, a).mid());
    return p;
  }
  double radius() const {
    double s = 0.0;
    for (int a = 0; a < dims; ++a) s += 0.25 * width(a) * width(a);
    return std::sqrt(s);
  }
  // Half-open boxes, with the upper window edge assigned to the last box.
  std::optional<std::uint32_t> locate(const CVec& p) const {
    std::array<int, 6> c{};
    for (int a = 0; a < dims; ++a) {
      double x = real_coord(p, a);
      const Interval& iv = window.axes[a];
      if (!(x >= iv.lo && x <= iv.hi)) return std::nullopt;
      c[a] = std::min(per_axis - 1, static_cast<int>((x - iv.lo) / width(a)));
    }
    return index(c);
  }
};

struct PadMode {
  enum class Kind { jacobian, fixed } kind = Kind::jacobian;
  double value = 0.0;

  static PadMode parse(const std::string& s) {
    if (s == "jacobian") return {};
    if (s.rfind("fixed:", 0) == 0) {
      PadMode p;
      p.kind = Kind::fixed;
      try {
        p.value = std::stod(s.substr(6));
      } catch (const std::exception&) {
        throw Error("bad pad mode: " + s);
      }
      if (!(p.value >= 0.0)) throw Error("fixed pad must be non-negative");
      return p;
    }
    throw Error("pad mode must be 'jacobian' or 'fixed:<c>'");
  }
  std::string str() const { return kind == Kind::jacobian ? "jacobian" : "fixed:" + fmt_double(value); }
};

// Adjacency in compressed rows over grid boxes plus the infinity node.
struct BoxGraph {
  BoxGrid grid;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> targets;

  std::uint32_t node_count() const { return grid.node_count(); }
  const std::uint32_t* begin(std::uint32_t v) const { return targets.data() + offsets[v]; }
  const std::uint32_t* end(std::uint32_t v) const { return targets.data() + offsets[v + 1]; }
  std::vector<std::uint32_t> successors(std::uint32_t v) const { return {begin(v), end(v)}; }
  bool has_edge(std::uint32_t u, std::uint32_t v) const { return std::binary_search(begin(u), end(u), v); }
  size_t edge_count() const { return targets.size(); }
};

// Points sampled in one box: corners, centre, then interior quasi-random
// points (same relative positions in every box).
inline std::vector<std::array<double, 6>> box_sample_offsets(int dims, int samples_per_box) {
  std::vector<std::array<double, 6>> u;
  for (int c = 0; c < (1 << dims); ++c) {
    std::array<double, 6> x{};
    for (int a = 0; a < dims; ++a) x[a] = (c >> a) & 1;
    u.push_back(x);
  }
  std::array<double, 6> mid{};
  for (int a = 0; a < dims; ++a) mid[a] = 0.5;
  u.push_back(mid);
  Halton h(dims, 7);
  for (int s = 0; s < samples_per_box; ++s) {
    std::array<double, 6> x{};
    h.point(s, x.data());
    u.push_back(x);
  }
  return u;
}

// Jacobian padding: largest sampled operator norm times the covering radius
// of the sample set, i.e. the box radius over the samples per axis.
inline BoxGraph build_box_map(const PolyMap& f, const Window& window, int depth, int samples_per_box = 16,
                              PadMode pad = {}) {
  if (window.dim() != f.dim()) throw Error("window dimension does not match map");
  if (samples_per_box < 0) throw Error("samples_per_box must be non-negative");
  BoxGraph g;
  g.grid = BoxGrid(window, depth);
  const BoxGrid& G = g.grid;
  const int dims = G.dims;
  const auto offsets = box_sample_offsets(dims, samples_per_box);
  const double per_axis_samples =
      std::max(1.0, std::floor(std::pow(static_cast<double>(offsets.size()), 1.0 / dims) + 1e-9));
  const double cover = G.radius() / per_axis_samples;

  std::vector<std::vector<std::uint32_t>> succ(G.node_count());
  succ[G.infinity()] = {G.infinity()};

  parallel_for(G.count, [&](size_t b) {
    const auto box = static_cast<std::uint32_t>(b);
    std::vector<std::uint32_t>& out = succ[box];
    std::array<double, 6> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    bool to_inf = false, any = false;
    double norm = 0.0;
    Jet j;
    for (const auto& u : offsets) {
      CVec x(dims / 2);
      for (int a = 0; a < dims; ++a) {
        Interval iv = G.bounds(box, a);
        set_real_coord(x, a, iv.lo + u[a] * iv.width());
      }
      bool ok = pad.kind == PadMode::Kind::jacobian ? jet_into(f, x, j) : eval_into(f, x, j.value);
      if (!ok) {
        to_inf = true;
        continue;
      }
      if (pad.kind == PadMode::Kind::jacobian) norm = std::max(norm, operator_norm(j.jacobian));
      any = true;
      for (int a = 0; a < dims; ++a) {
        double y = real_coord(j.value, a);
        lo[a] = std::min(lo[a], y);
        hi[a] = std::max(hi[a], y);
      }
      if (auto c = G.locate(j.value))
        out.push_back(*c);
      else
        to_inf = true;
    }
    if (any) {
      const double r = pad.kind == PadMode::Kind::jacobian ? norm * cover : pad.value;
      if (!std::isfinite(r)) to_inf = true;
      std::array<int, 6> first{}, last{};
      bool empty = !std::isfinite(r);
      for (int a = 0; a < dims && !empty; ++a) {
        const Interval& iv = window.axes[a];
        double l = lo[a] - r, h = hi[a] + r;
        if (l < iv.lo || h > iv.hi) to_inf = true;
        l = std::max(l, iv.lo);
        h = std::min(h, iv.hi);
        if (l > h) {
          empty = true;
          break;
        }
        // Boxes whose closure meets [l, h].
        first[a] = std::clamp(static_cast<int>(std::floor((l - iv.lo) / G.width(a))), 0, G.per_axis - 1);
        last[a] = std::clamp(static_cast<int>(std::ceil((h - iv.lo) / G.width(a))) - 1, 0, G.per_axis - 1);
        if (last[a] < first[a]) last[a] = first[a];
      }
      if (!empty) {
        std::array<int, 6> c = first;
        while (true) {
          out.push_back(G.index(c));
          int a = 0;
          for (; a < dims; ++a) {
            if (++c[a] <= last[a]) break;
            c[a] = first[a];
          }
          if (a == dims) break;
        }
      }
    }
    if (to_inf || !any) out.push_back(G.infinity());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  });

  g.offsets.assign(G.node_count() + 1, 0);
  for (std::uint32_t v = 0; v < G.node_count(); ++v) g.offsets[v + 1] = g.offsets[v] + static_cast<std::uint32_t>(succ[v].size());
  g.targets.reserve(g.offsets.back());
  for (const auto& s : succ) g.targets.insert(g.targets.end(), s.begin(), s.end());
  return g;
}

// Graph given directly by adjacency lists; the last node is infinity.
inline BoxGraph graph_from_lists(const BoxGrid& grid, const std::vector<std::vector<std::uint32_t>>& succ) {
  if (succ.size() != grid.node_count()) throw Error("adjacency size does not match grid");
  BoxGraph g;
  g.grid = grid;
  g.offsets.assign(succ.size() + 1, 0);
  for (size_t v = 0; v < succ.size(); ++v) {
    auto s = succ[v];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    g.offsets[v + 1] = g.offsets[v] + static_cast<std::uint32_t>(s.size());
    g.targets.insert(g.targets.end(), s.begin(), s.end());
  }
  return g;
}

struct MorseGraph {
  std::vector<int> class_of;                        // node -> class
  std::vector<std::vector<std::uint32_t>> members;  // sorted node lists
  std::vector<char> recurrent;
  std::vector<std::vector<int>> dag;                // condensation successors
  std::vector<int> lyapunov;                        // per class, once computed
  std::vector<int> box_lyapunov;                    // per node, once computed
  int infinity_class = -1;

  size_t size() const { return members.size(); }
  bool is_sink(int c) const { return dag[c].empty(); }
};

// Tarjan, iterative. Classes are numbered by their smallest node.
inline MorseGraph morse_graph(const BoxGraph& g) {
  const std::uint32_t N = g.node_count();
  constexpr int kUnset = -1;
  std::vector<int> index(N, kUnset), low(N, 0), comp(N, kUnset);
  std::vector<char> on_stack(N, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, const std::uint32_t*>> call;
  int counter = 0, ncomp = 0;

  for (std::uint32_t root = 0; root < N; ++root) {
    if (index[root] != kUnset) continue;
    call.emplace_back(root, g.begin(root));
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      if (it != g.end(v)) {
        std::uint32_t w = *it++;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, g.begin(w));
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != done);
        ++ncomp;
      }
    }
  }

  // Renumber by smallest member.
  std::vector<std::uint32_t> min_node(ncomp, N);
  for (std::uint32_t v = 0; v < N; ++v) min_node[comp[v]] = std::min(min_node[comp[v]], v);
  std::vector<int> order(ncomp);
  for (int c = 0; c < ncomp; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return min_node[a] < min_node[b]; });
  std::vector<int> rename(ncomp);
  for (int i = 0; i < ncomp; ++i) rename[order[i]] = i;

  MorseGraph mg;
  mg.class_of.resize(N);
  mg.members.resize(ncomp);
  for (std::uint32_t v = 0; v < N; ++v) {
    mg.class_of[v] = rename[comp[v]];
    mg.members[mg.class_of[v]].push_back(v);
  }
  mg.recurrent.assign(ncomp, 0);
  mg.dag.resize(ncomp);
  for (std::uint32_t v = 0; v < N; ++v) {
    const int cv = mg.class_of[v];
    for (auto it = g.begin(v); it != g.end(v); ++it) {
      const int cw = mg.class_of[*it];
      if (cw == cv)
        mg.recurrent[cv] = 1;  // an internal edge: self-loop or size >= 2
      else
        mg.dag[cv].push_back(cw);
    }
  }
  for (auto& d : mg.dag) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  mg.infinity_class = mg.class_of[g.grid.infinity()];
  return mg;
}

// Longest path to a sink in the condensation.
inline MorseGraph lyapunov(MorseGraph mg) {
  const int C = static_cast<int>(mg.size());
  std::vector<std::vector<int>> pred(C);
  std::vector<int> outdeg(C, 0);
  for (int c = 0; c < C; ++c) {
    outdeg[c] = static_cast<int>(mg.dag[c].size());
    for (int d : mg.dag[c]) pred[d].push_back(c);
  }
  mg.lyapunov.assign(C, 0);
  std::deque<int> ready;
  for (int c = 0; c < C; ++c)
    if (outdeg[c] == 0) ready.push_back(c);
  int seen = 0;
  while (!ready.empty()) {
    int c = ready.front();
    ready.pop_front();
    ++seen;
    for (int p : pred[c]) {
      mg.lyapunov[p] = std::max(mg.lyapunov[p], mg.lyapunov[c] + 1);
      if (--outdeg[p] == 0) ready.push_back(p);
    }
  }
  if (seen != C) throw Error("internal error: condensation has a cycle");
  mg.box_lyapunov.resize(mg.class_of.size());
  for (size_t v = 0; v < mg.class_of.size(); ++v) mg.box_lyapunov[v] = mg.lyapunov[mg.class_of[v]];
  return mg;
}

inline bool condensation_acyclic(const MorseGraph& mg) {
  try {
    lyapunov(mg);
    return true;
  } catch (const Error&) {
    return false;
  }
}

struct AttractorRecord {
  int class_id = -1;
  bool at_infinity = false;
  std::vector<std::uint32_t> absorbing;
  std::vector<std::uint32_t> attractor;
  std::vector<std::uint32_t> basin;
};

inline std::vector<std::uint32_t> successor_closure(const BoxGraph& g, std::vector<std::uint32_t> seed) {
  std::vector<char> in(g.node_count(), 0);
  for (auto v : seed) in[v] = 1;
  for (size_t i = 0; i < seed.size(); ++i)
    for (auto it = g.begin(seed[i]); it != g.end(seed[i]); ++it)
      if (!in[*it]) {
        in[*it] = 1;
        seed.push_back(*it);
      }
  std::sort(seed.begin(), seed.end());
  return seed;
}

// Largest subset S of U where every node has a successor and a predecessor in S.
inline std::vector<std::uint32_t> invariant_core(const BoxGraph& g, const std::vector<std::uint32_t>& U) {
  std::vector<char> in(g.node_count(), 0);
  for (auto v : U) in[v] = 1;
  bool changed = true;
  std::vector<int> has_pred(g.node_count());
  while (changed) {
    changed = false;
    std::fill(has_pred.begin(), has_pred.end(), 0);
    for (auto v : U)
      if (in[v])
        for (auto it = g.begin(v); it != g.end(v); ++it) has_pred[*it] = 1;
    for (auto v : U) {
      if (!in[v]) continue;
      bool succ = false;
      for (auto it = g.begin(v); it != g.end(v) && !succ; ++it) succ = in[*it];
      if (!succ || !has_pred[v]) {
        in[v] = 0;
        changed = true;
      }
    }
  }
  std::vector<std::uint32_t> out;
  for (auto v : U)
    if (in[v]) out.push_back(v);
  return out;
}

inline std::vector<std::uint32_t> backward_reach(const BoxGraph& g, const std::vector<std::uint32_t>& target) {
  const std::uint32_t N = g.node_count();
  std::vector<std::vector<std::uint32_t>> pred(N);
  for (std::uint32_t v = 0; v < N; ++v)
    for (auto it = g.begin(v); it != g.end(v); ++it) pred[*it].push_back(v);
  std::vector<char> in(N, 0);
  std::vector<std::uint32_t> out = target;
  for (auto v : target) in[v] = 1;
  for (size_t i = 0; i < out.size(); ++i)
    for (auto p : pred[out[i]])
      if (!in[p]) {
        in[p] = 1;
        out.push_back(p);
      }
  std::sort(out.begin(), out.end());
  return out;
}

// One record per recurrent sink class (the infinity node included).
inline std::vector<AttractorRecord> attractors(const BoxGraph& g, const MorseGraph& mg) {
  std::vector<AttractorRecord> out;
  for (int c = 0; c < static_cast<int>(mg.size()); ++c) {
    if (!mg.recurrent[c] || !mg.is_sink(c)) continue;
    AttractorRecord r;
    r.class_id = c;
    r.at_infinity = c == mg.infinity_class;
    r.absorbing = successor_closure(g, mg.members[c]);
    if (r.absorbing != mg.members[c]) continue;  // not closed; cannot happen for a sink
    r.attractor = invariant_core(g, r.absorbing);
    r.basin = backward_reach(g, r.absorbing);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<AttractorRecord> attractors(const BoxGraph& g) { return attractors(g, morse_graph(g)); }

struct HurleyOptions {
  int samples_per_box = 16;
  PadMode pad{};
  int m_max = 4;          // period bound when looking for attracting and parabolic cycles
  int seeds = 256;
  int n_max = 2000;       // horizon of the basin test at box centres
  double basin_tol = 1e-6;
  double petal_tol = 1e-2;
  double petal_radius = 0.25;  // petal orbits never leave this ball around the parabolic point
  std::uint64_t seed = 1;
};

struct HurleyItem {
  std::string name;
  bool applicable = true;
  bool pass = true;
  size_t violations = 0;
  std::vector<std::uint32_t> witnesses;  // first few offending boxes
  std::string note;
};

struct HurleyReport {
  BoxGraph graph;
  MorseGraph morse;
  std::vector<AttractorRecord> attractors;
  std::vector<Cycle> attracting_cycles;
  std::vector<Cycle> parabolic_points;
  std::vector<HurleyItem> items;
  bool acyclic = true;
  bool lyapunov_ok = true;
  double origin_class_max_real = -std::numeric_limits<double>::infinity();
  size_t petal_boxes = 0;

  bool all_pass() const {
    return acyclic && lyapunov_ok && std::all_of(items.begin(), items.end(), [](const HurleyItem& i) { return i.pass; });
  }
};

namespace detail {
inline void witness(HurleyItem& item, std::uint32_t box) {
  item.pass = false;
  ++item.violations;
  if (item.witnesses.size() < 20) item.witnesses.push_back(box);
}
}  // namespace detail

inline bool lyapunov_consistent(const BoxGraph& g, const MorseGraph& mg) {
  for (std::uint32_t v = 0; v < g.node_count(); ++v)
    for (auto it = g.begin(v); it != g.end(v); ++it) {
      int a = mg.class_of[v], b = mg.class_of[*it];
      if (a != b && !(mg.box_lyapunov[v] > mg.box_lyapunov[*it])) return false;
      if (a == b && mg.box_lyapunov[v] != mg.box_lyapunov[*it]) return false;
    }
  return true;
}

inline HurleyReport hurley_report(const PolyMap& f, const Window& window, int depth, const HurleyOptions& opt = {}) {
  HurleyReport rep;
  rep.graph = build_box_map(f, window, depth, opt.samples_per_box, opt.pad);
  const BoxGraph& g = rep.graph;
  const BoxGrid& G = g.grid;
  rep.acyclic = condensation_acyclic(morse_graph(g));
  rep.morse = lyapunov(morse_graph(g));
  const MorseGraph& mg = rep.morse;
  rep.lyapunov_ok = lyapunov_consistent(g, mg);
  rep.attractors = attractors(g, mg);

  // (i) non-recurrent boxes lie in some basin minus attractor.
  HurleyItem one{"non_recurrent_in_basins"};
  {
    std::vector<char> covered(g.node_count(), 0);
    for (const auto& a : rep.attractors) {
      std::vector<char> in_a(g.node_count(), 0);
      for (auto v : a.attractor) in_a[v] = 1;
      for (auto v : a.basin)
        if (!in_a[v]) covered[v] = 1;
    }
    for (std::uint32_t v = 0; v < G.count; ++v)
      if (!mg.recurrent[mg.class_of[v]] && !covered[v]) detail::witness(one, v);
  }

  FinderOptions fo;
  fo.seeds = opt.seeds;
  fo.seed = opt.seed;
  auto search = search_periodic(f, opt.m_max, window, fo);
  for (const auto& c : search.cycles) {
    if (is_attracting(c.kind)) rep.attracting_cycles.push_back(c);
    if (c.kind == Stability::non_hyperbolic && !c.transverse) rep.parabolic_points.push_back(c);
  }

  // (ii) each attracting cycle sits in one recurrent sink class.
  HurleyItem two{"attracting_cycle_is_sink_class"};
  HurleyItem three{"basin_outside_cycle_class_non_recurrent"};
  two.applicable = three.applicable = !rep.attracting_cycles.empty();
  for (const auto& c : rep.attracting_cycles) {
    int cls = -1;
    bool ok = true;
    for (const auto& p : c.points) {
      auto b = G.locate(p);
      if (!b) continue;
      int k = mg.class_of[*b];
      if (cls >= 0 && k != cls) ok = false;
      cls = k;
      if (!mg.recurrent[k] || !mg.is_sink(k)) ok = false;
      if (!ok) detail::witness(two, *b);
    }
    if (cls < 0) continue;

    // (iii) basin boxes (by the basin test at centres) outside the cycle's
    // class are non-recurrent.
    std::vector<char> in_basin(G.count, 0);
    parallel_for(G.count, [&](size_t v) {
      in_basin[v] = basin_test_B1(f, c, G.center(static_cast<std::uint32_t>(v)), opt.n_max, opt.basin_tol);
    });
    for (std::uint32_t v = 0; v < G.count; ++v)
      if (in_basin[v] && mg.class_of[v] != cls && mg.recurrent[mg.class_of[v]]) detail::witness(three, v);
  }

  // (iv) petal boxes (centre orbits converging to the point without leaving
  // a small ball around it) share the recurrent class of the fixed point's box.
  HurleyItem four{"parabolic_petal_in_origin_class"};
  four.applicable = false;
  for (const auto& c : rep.parabolic_points) {
    auto ob = G.locate(c.points[0]);
    if (!ob) continue;
    four.applicable = true;
    const int cls = mg.class_of[*ob];
    if (!mg.recurrent[cls]) detail::witness(four, *ob);
    for (auto v : mg.members[cls])
      if (v < G.count) rep.origin_class_max_real = std::max(rep.origin_class_max_real, G.center(v)[0].real());
    std::vector<char> petal(G.count, 0);
    const double R = iteration_radius(f);
    parallel_for(G.count, [&](size_t v) {
      CVec x = G.center(static_cast<std::uint32_t>(v)), y;
      if (distance_to_set(x, c.points) >= opt.petal_radius) return;
      for (int k = 0; k < opt.n_max; ++k) {
        if (!eval_into(f, x, y) || sup_norm(y) > R || distance_to_set(y, c.points) >= opt.petal_radius) return;
        x = y;
      }
      petal[v] = distance_to_set(x, c.points) < opt.petal_tol;
    });
    for (std::uint32_t v = 0; v < G.count; ++v) {
      rep.petal_boxes += petal[v];
      if (petal[v] && mg.class_of[v] != cls) detail::witness(four, v);
    }
  }
  if (!four.applicable) four.note = "no parabolic point found";
  if (!two.applicable) two.note = three.note = "no attracting cycle found";

  rep.items = {one, two, three, four};
  return rep;
}

inline std::string morse_dot(const MorseGraph& mg, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "// " << header_comment << '\n';
  os << "digraph morse {\n";
  for (size_t c = 0; c < mg.size(); ++c) {
    int L = mg.lyapunov.empty() ? 0 : mg.lyapunov[c];
    os << "  c" << c << " [label=\"" << c << ':' << mg.members[c].size() << ':' << L << "\", shape="
       << (mg.recurrent[c] ? "doublecircle" : "circle") << (static_cast<int>(c) == mg.infinity_class ? ", xlabel=\"inf\"" : "")
       << "];\n";
  }
  for (size_t c = 0; c < mg.size(); ++c)
    for (int d : mg.dag[c]) os << "  c" << c << " -> c" << d << ";\n";
  os << "}\n";
  return os.str();
}

// Recurrent boxes white, projected onto the first two real axes.
inline std::vector<unsigned char> recurrent_pixels(const BoxGraph& g, const MorseGraph& mg) {
  const BoxGrid& G = g.grid;
  const int w = G.per_axis;
  std::vector<unsigned char> px(static_cast<size_t>(w) * w, 0);
  for (std::uint32_t v = 0; v < G.count; ++v)
    if (mg.recurrent[mg.class_of[v]]) {
      int col = G.coord(v, 0), row = w - 1 - G.coord(v, 1);
      px[static_cast<size_t>(row) * w + col] = 255;
    }
  return px;
}

inline nlohmann::json hurley_json(const HurleyReport& r) {
  using nlohmann::json;
  json items = json::array();
  for (const auto& i : r.items)
    items.push_back({{"name", i.name},
                     {"applicable", i.applicable},
                     {"pass", i.pass},
                     {"violations", i.violations},
                     {"witness_boxes", i.witnesses},
                     {"note", i.note}});
  size_t recurrent_boxes = 0, recurrent_classes = 0;
  for (std::uint32_t v = 0; v < r.graph.grid.count; ++v) recurrent_boxes += r.morse.recurrent[r.morse.class_of[v]];
  for (char c : r.morse.recurrent) recurrent_classes += c;
  json atts = json::array();
  for (const auto& a : r.attractors)
    atts.push_back({{"class", a.class_id},
                    {"at_infinity", a.at_infinity},
                    {"attractor_boxes", a.attractor.size()},
                    {"basin_boxes", a.basin.size()}});
  return {{"boxes", r.graph.grid.count},
          {"edges", r.graph.edge_count()},
          {"classes", r.morse.size()},
          {"recurrent_classes", recurrent_classes},
          {"recurrent_boxes", recurrent_boxes},
          {"condensation_acyclic", r.acyclic},
          {"lyapunov_consistent", r.lyapunov_ok},
          {"attractors", atts},
          {"attracting_cycles", r.attracting_cycles.size()},
          {"parabolic_points", r.parabolic_points.size()},
          {"petal_boxes", r.petal_boxes},
          {"origin_class_max_real",
           std::isfinite(r.origin_class_max_real) ? json(r.origin_class_max_real) : json(nullptr)},
          {"items", items},
          {"all_pass", r.all_pass()}};
}

}  // namespace holodyn
