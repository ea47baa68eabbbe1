#include "holodyn/conley.hpp"
#include "holodyn/julia.hpp"
#include "holodyn/map_json.hpp"

#include <gtest/gtest.h>

#include <queue>

using namespace holodyn;

namespace {

const PolyMap kHalf = poly1({{1, 0.5}});
const PolyMap kDouble = poly1({{1, 2.0}});
const PolyMap kZ2 = poly1({{2, 1.0}});
const PolyMap kZ2m1 = poly1({{2, 1.0}, {0, -1.0}});
const Window kUnit = Window::square(1, -1, 1);
// Grid aligned so 0 and -1 are box centres at depth 6.
const Window kAligned(std::vector<Interval>{{-2.03125, 1.96875}, {-2.03125, 1.96875}});

std::vector<char> reach_from(const BoxGraph& g, std::uint32_t s) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<std::uint32_t> todo{s};
  seen[s] = 1;
  while (!todo.empty()) {
    auto v = todo.back();
    todo.pop_back();
    for (auto w : g.successors(v))
      if (!seen[w]) seen[w] = 1, todo.push_back(w);
  }
  return seen;
}

// Naive O(V E) classes: mutual reachability.
struct BruteScc {
  std::vector<int> rep;  // smallest node in the class
  std::vector<char> recurrent;
};

BruteScc brute_scc(const BoxGraph& g) {
  const auto N = g.node_count();
  std::vector<std::vector<char>> R(N);
  for (std::uint32_t v = 0; v < N; ++v) R[v] = reach_from(g, v);
  BruteScc out;
  out.rep.assign(N, -1);
  out.recurrent.assign(N, 0);
  for (std::uint32_t v = 0; v < N; ++v) {
    for (std::uint32_t u = 0; u <= v; ++u)
      if (R[v][u] && R[u][v]) {
        out.rep[v] = static_cast<int>(u);
        break;
      }
  }
  for (std::uint32_t v = 0; v < N; ++v) {
    bool big = false;
    for (std::uint32_t u = 0; u < N && !big; ++u) big = u != v && out.rep[u] == out.rep[v];
    out.recurrent[v] = big || g.has_edge(v, v);
  }
  return out;
}

void expect_attractor_invariants(const BoxGraph& g, const std::vector<AttractorRecord>& as) {
  for (const auto& a : as) {
    std::set<std::uint32_t> U(a.absorbing.begin(), a.absorbing.end()), A(a.attractor.begin(), a.attractor.end());
    for (auto v : a.absorbing)
      for (auto w : g.successors(v)) EXPECT_TRUE(U.count(w)) << "absorbing set leaks";
    for (auto v : a.attractor) {
      EXPECT_TRUE(U.count(v));
      bool stays = false;
      for (auto w : g.successors(v)) stays |= A.count(w) > 0;
      EXPECT_TRUE(stays) << "attractor box without successor in attractor";
    }
    std::set<std::uint32_t> B(a.basin.begin(), a.basin.end());
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
      auto r = reach_from(g, v);
      bool hits = false;
      for (auto u : a.absorbing) hits |= r[u] != 0;
      EXPECT_EQ(hits, B.count(v) > 0) << "basin mismatch at " << v;
    }
  }
}

// Edge-by-edge Lyapunov checks.
void expect_lyapunov(const BoxGraph& g, const MorseGraph& mg) {
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    EXPECT_EQ(mg.box_lyapunov[v], mg.lyapunov[mg.class_of[v]]);
    for (auto w : g.successors(v)) {
      if (mg.class_of[v] == mg.class_of[w])
        EXPECT_EQ(mg.box_lyapunov[v], mg.box_lyapunov[w]);
      else
        EXPECT_GT(mg.box_lyapunov[v], mg.box_lyapunov[w]);
    }
  }
  for (size_t c = 0; c < mg.size(); ++c)
    if (mg.is_sink(static_cast<int>(c))) EXPECT_EQ(mg.lyapunov[c], 0);
}

int lattice_distance(const BoxGrid& G, std::uint32_t v) {
  // Twice the offset from the centre in box units, max over axes.
  int d = 0;
  for (int a = 0; a < G.dims; ++a) d = std::max(d, std::abs(2 * G.coord(v, a) - (G.per_axis - 1)));
  return d;
}

}  // namespace

TEST(BoxGrid, IndexingIsBijective) {
  BoxGrid G(Window::square(2, -1, 1), 2);
  EXPECT_EQ(G.count, 256u);
  for (std::uint32_t v = 0; v < G.count; ++v) {
    std::array<int, 6> c{};
    for (int a = 0; a < G.dims; ++a) c[a] = G.coord(v, a);
    EXPECT_EQ(G.index(c), v);
    EXPECT_EQ(*G.locate(G.center(v)), v);
  }
  EXPECT_FALSE(G.locate(make_point({cplx(1.5, 0), 0.0})));
  EXPECT_EQ(*G.locate(make_point({cplx(1.0, 1.0), cplx(1.0, 1.0)})), G.count - 1);
  EXPECT_THROW(BoxGrid(kUnit, 0), Error);
  EXPECT_THROW(BoxGrid(Window::square(3, -1, 1), 4), Error);
}

TEST(PadMode, Parse) {
  EXPECT_EQ(PadMode::parse("jacobian").kind, PadMode::Kind::jacobian);
  PadMode p = PadMode::parse("fixed:0.01");
  EXPECT_EQ(p.kind, PadMode::Kind::fixed);
  EXPECT_DOUBLE_EQ(p.value, 0.01);
  EXPECT_EQ(PadMode::parse(p.str()).value, 0.01);
  EXPECT_THROW(PadMode::parse("fixed:x"), Error);
  EXPECT_THROW(PadMode::parse("fixed:-1"), Error);
  EXPECT_THROW(PadMode::parse("interval"), Error);
}

TEST(BoxMap, SampleSoundness) {
  for (const PolyMap* f : {&kZ2m1, &kZ2}) {
    BoxGraph g = build_box_map(*f, kAligned, 5);
    const BoxGrid& G = g.grid;
    const auto offsets = box_sample_offsets(G.dims, 16);
    for (std::uint32_t b = 0; b < G.count; ++b)
      for (const auto& u : offsets) {
        CVec x(1);
        for (int a = 0; a < 2; ++a) set_real_coord(x, a, G.bounds(b, a).lo + u[a] * G.width(a));
        auto c = G.locate(eval(*f, x));
        EXPECT_TRUE(g.has_edge(b, c ? *c : G.infinity()));
      }
    EXPECT_EQ(g.successors(G.infinity()), std::vector<std::uint32_t>{G.infinity()});
  }
}

TEST(BoxMap, HalfContracts) {
  BoxGraph g = build_box_map(kHalf, kUnit, 4);
  const BoxGrid& G = g.grid;
  int outer = 0;
  for (std::uint32_t v = 0; v < G.count; ++v) {
    const int dv = lattice_distance(G, v);
    for (auto w : g.successors(v)) {
      ASSERT_NE(w, G.infinity());
      EXPECT_LE(lattice_distance(G, w), dv);
      if (dv == G.per_axis - 1) EXPECT_LT(lattice_distance(G, w), dv);
    }
    outer += dv == G.per_axis - 1;
  }
  EXPECT_EQ(outer, 60);
}

TEST(BoxMap, DoubleReachesInfinity) {
  BoxGraph g = build_box_map(kDouble, kUnit, 4);
  const BoxGrid& G = g.grid;
  // Breadth-first distance to infinity on the reversed graph.
  std::vector<std::vector<std::uint32_t>> pred(G.node_count());
  for (std::uint32_t v = 0; v < G.node_count(); ++v)
    for (auto w : g.successors(v)) pred[w].push_back(v);
  std::vector<int> dist(G.node_count(), -1);
  std::queue<std::uint32_t> q;
  dist[G.infinity()] = 0;
  q.push(G.infinity());
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    for (auto u : pred[v])
      if (dist[u] < 0) dist[u] = dist[v] + 1, q.push(u);
  }
  for (std::uint32_t v = 0; v < G.count; ++v) {
    bool touches_zero = true;
    for (int a = 0; a < 2; ++a) {
      Interval iv = G.bounds(v, a);
      touches_zero &= iv.lo <= 0.0 && iv.hi >= 0.0;
    }
    if (touches_zero) continue;
    EXPECT_GE(dist[v], 1);
    EXPECT_LE(dist[v], 4) << "box " << v;
  }
}

TEST(BoxMap, Z2OuterBoxesEscape) {
  BoxGraph g = build_box_map(kZ2, Window::square(1, -2, 2), 6);
  const BoxGrid& G = g.grid;
  for (std::uint32_t v = 0; v < G.count; ++v) {
    if (std::abs(G.center(v)[0]) <= 1.5) continue;
    EXPECT_TRUE(reach_from(g, v)[G.infinity()]) << "box " << v;
  }
}

TEST(Morse, BruteForceSccAgrees) {
  std::vector<PolyMap> maps{kZ2m1, kHalf, kZ2, kDouble, poly1({{2, 1.0}, {0, cplx(-0.12, 0.75)}}),
                            poly1({{1, 1.0}, {2, 1.0}})};
  for (const auto& f : maps)
    for (int depth = 1; depth <= 3; ++depth) {
      BoxGraph g = build_box_map(f, Window::square(1, -2, 2), depth);
      MorseGraph mg = morse_graph(g);
      BruteScc b = brute_scc(g);
      for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        EXPECT_EQ(static_cast<int>(mg.members[mg.class_of[v]][0]), b.rep[v]);
        EXPECT_EQ(mg.recurrent[mg.class_of[v]] != 0, b.recurrent[v] != 0);
      }
      EXPECT_TRUE(condensation_acyclic(mg));
    }
}

TEST(Morse, NumberingAndInfinity) {
  BoxGraph g = build_box_map(kZ2m1, kAligned, 4);
  MorseGraph mg = morse_graph(g);
  for (size_t c = 1; c < mg.size(); ++c) EXPECT_LT(mg.members[c - 1][0], mg.members[c][0]);
  EXPECT_EQ(mg.class_of[g.grid.infinity()], mg.infinity_class);
  EXPECT_TRUE(mg.recurrent[mg.infinity_class]);
  EXPECT_TRUE(mg.is_sink(mg.infinity_class));
  for (size_t c = 0; c < mg.size(); ++c)
    for (int d : mg.dag[c]) EXPECT_NE(d, static_cast<int>(c));
}

TEST(Morse, HalfHasTwoRecurrentSinks) {
  BoxGraph g = build_box_map(kHalf, kUnit, 4);
  MorseGraph mg = morse_graph(g);
  const auto origin = *g.grid.locate(make_point({1e-9}));
  std::set<int> sinks;
  for (size_t c = 0; c < mg.size(); ++c)
    if (mg.recurrent[c] && mg.is_sink(static_cast<int>(c))) sinks.insert(static_cast<int>(c));
  EXPECT_EQ(sinks.size(), 2u);
  EXPECT_TRUE(sinks.count(mg.infinity_class));
  EXPECT_TRUE(sinks.count(mg.class_of[origin]));
  // The window is forward invariant, so nothing but infinity reaches infinity.
  EXPECT_EQ(mg.members[mg.infinity_class].size(), 1u);
}

TEST(Morse, SaddleOriginIsNotASink) {
  PolyMap f(2, {{Term{{1, 0, 0}, 0.5}}, {Term{{0, 1, 0}, 2.0}}});
  BoxGraph g = build_box_map(f, Window::square(2, -1, 1), 3);
  MorseGraph mg = morse_graph(g);
  const int oc = mg.class_of[*g.grid.locate(make_point({1e-9, 1e-9}))];
  EXPECT_TRUE(mg.recurrent[oc]);
  EXPECT_FALSE(mg.is_sink(oc));
  EXPECT_TRUE(reach_from(g, mg.members[oc][0])[g.grid.infinity()]);
  EXPECT_TRUE(mg.is_sink(mg.infinity_class));
  // No other recurrent sink: every box drains to infinity.
  for (size_t c = 0; c < mg.size(); ++c)
    if (mg.recurrent[c] && mg.is_sink(static_cast<int>(c))) EXPECT_EQ(static_cast<int>(c), mg.infinity_class);
}

TEST(Morse, IdentityAllRecurrent) {
  PolyMap id = load_map(std::string(HOLODYN_SAMPLES) + "/maps/identity.json");
  BoxGraph g = build_box_map(id, kUnit, 4);
  MorseGraph mg = morse_graph(g);
  for (std::uint32_t v = 0; v < g.grid.count; ++v) {
    EXPECT_TRUE(g.has_edge(v, v));
    EXPECT_TRUE(mg.recurrent[mg.class_of[v]]);
  }
}

TEST(Lyapunov, PathAndSingleClass) {
  BoxGrid G(Window::square(1, 0, 1), 1);  // 4 boxes + infinity
  // 0 -> 1 -> 2 -> 2, 3 -> 3, inf -> inf
  BoxGraph path = graph_from_lists(G, {{1}, {2}, {2}, {3}, {4}});
  MorseGraph mg = lyapunov(morse_graph(path));
  EXPECT_EQ(mg.box_lyapunov[0], 2);
  EXPECT_EQ(mg.box_lyapunov[1], 1);
  EXPECT_EQ(mg.box_lyapunov[2], 0);
  EXPECT_FALSE(mg.recurrent[mg.class_of[0]]);
  EXPECT_TRUE(mg.recurrent[mg.class_of[2]]);
  expect_lyapunov(path, mg);

  BoxGraph ring = graph_from_lists(G, {{1}, {2}, {3}, {4}, {0}});
  MorseGraph one = lyapunov(morse_graph(ring));
  ASSERT_EQ(one.size(), 1u);
  for (int L : one.box_lyapunov) EXPECT_EQ(L, 0);

  MorseGraph bad;
  bad.members = {{0}, {1}};
  bad.class_of = {0, 1};
  bad.recurrent = {0, 0};
  bad.dag = {{1}, {0}};
  EXPECT_THROW(lyapunov(bad), Error);
  EXPECT_FALSE(condensation_acyclic(bad));
}

TEST(Lyapunov, StrictOnTestMaps) {
  for (const PolyMap* f : {&kHalf, &kZ2m1, &kDouble}) {
    BoxGraph g = build_box_map(*f, f == &kHalf ? kUnit : Window::square(1, -2, 2), 5);
    MorseGraph mg = lyapunov(morse_graph(g));
    expect_lyapunov(g, mg);
    EXPECT_TRUE(lyapunov_consistent(g, mg));
  }
  BoxGraph h = build_box_map(kHalf, kUnit, 4);
  MorseGraph mh = lyapunov(morse_graph(h));
  for (std::uint32_t v = 0; v < h.grid.count; ++v)
    if (!mh.recurrent[mh.class_of[v]]) EXPECT_GE(mh.box_lyapunov[v], 1);
  EXPECT_EQ(mh.lyapunov[mh.infinity_class], 0);
}

TEST(Attractors, Invariants) {
  for (const PolyMap* f : {&kHalf, &kZ2m1, &kDouble, &kZ2}) {
    BoxGraph g = build_box_map(*f, Window::square(1, -2, 2), 4);
    expect_attractor_invariants(g, attractors(g));
  }
}

TEST(Attractors, HalfOriginCluster) {
  BoxGraph g = build_box_map(kHalf, kUnit, 4);
  auto as = attractors(g);
  ASSERT_EQ(as.size(), 2u);
  const auto origin = *g.grid.locate(make_point({1e-9}));
  const AttractorRecord& in = as[0].at_infinity ? as[1] : as[0];
  EXPECT_TRUE(std::count(in.attractor.begin(), in.attractor.end(), origin));
  // Every grid box drains into the origin cluster.
  EXPECT_EQ(in.basin.size(), g.grid.count);
  expect_attractor_invariants(g, as);
}

TEST(Attractors, DoubleHasOnlyInfinity) {
  BoxGraph g = build_box_map(kDouble, kUnit, 4);
  auto as = attractors(g);
  for (const auto& a : as) EXPECT_TRUE(a.at_infinity);
  ASSERT_EQ(as.size(), 1u);
}

TEST(Attractors, Z2Minus1InteriorAttractor) {
  BoxGraph g = build_box_map(kZ2m1, kAligned, 6);
  MorseGraph mg = morse_graph(g);
  auto as = attractors(g, mg);
  const auto b0 = *g.grid.locate(make_point({0.0})), b1 = *g.grid.locate(make_point({-1.0}));
  int interior = 0;
  for (const auto& a : as) {
    if (a.at_infinity) continue;
    ++interior;
    EXPECT_TRUE(std::count(a.attractor.begin(), a.attractor.end(), b0));
    EXPECT_TRUE(std::count(a.attractor.begin(), a.attractor.end(), b1));
  }
  EXPECT_EQ(interior, 1);
  expect_attractor_invariants(g, as);
}

TEST(Refinement, RecurrentSetShrinks) {
  for (const PolyMap* f : {&kHalf, &kZ2m1}) {
    const Window w = f == &kHalf ? kUnit : kAligned;
    for (int d = 4; d <= 5; ++d) {
      BoxGraph coarse = build_box_map(*f, w, d), fine = build_box_map(*f, w, d + 1);
      MorseGraph mc = morse_graph(coarse), mf = morse_graph(fine);
      const BoxGrid &C = coarse.grid, &F = fine.grid;
      std::vector<char> allowed(C.count, 0);
      for (std::uint32_t v = 0; v < C.count; ++v) {
        if (!mc.recurrent[mc.class_of[v]]) continue;
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            int x = C.coord(v, 0) + dx, y = C.coord(v, 1) + dy;
            if (x >= 0 && y >= 0 && x < C.per_axis && y < C.per_axis) allowed[C.index({x, y})] = 1;
          }
      }
      for (std::uint32_t v = 0; v < F.count; ++v) {
        if (!mf.recurrent[mf.class_of[v]]) continue;
        std::uint32_t parent = C.index({F.coord(v, 0) / 2, F.coord(v, 1) / 2});
        EXPECT_TRUE(allowed[parent]) << "depth " << d + 1 << " box " << v;
      }
    }
  }
}

TEST(Hurley, Z2Minus1ItemsOneAndTwo) {
  // Item (iii) is the subject of an acceptance criterion and is reported there.
  HurleyReport r = hurley_report(kZ2m1, kAligned, 6);
  EXPECT_TRUE(r.acyclic);
  EXPECT_TRUE(r.lyapunov_ok);
  ASSERT_EQ(r.items.size(), 4u);
  EXPECT_TRUE(r.items[0].pass) << r.items[0].violations;
  EXPECT_TRUE(r.items[1].applicable);
  EXPECT_TRUE(r.items[1].pass);
  EXPECT_FALSE(r.items[3].applicable);
  ASSERT_EQ(r.attracting_cycles.size(), 1u);
  EXPECT_EQ(r.attracting_cycles[0].period(), 2);
}

TEST(Hurley, HalfTrivialPass) {
  HurleyReport r = hurley_report(kHalf, kUnit, 4);
  EXPECT_TRUE(r.items[0].pass);
  EXPECT_TRUE(r.items[1].pass);
}

TEST(Hurley, IdentityTrivial) {
  PolyMap id = load_map(std::string(HOLODYN_SAMPLES) + "/maps/identity.json");
  HurleyReport r = hurley_report(id, kUnit, 3);
  EXPECT_TRUE(r.items[0].pass);
  EXPECT_TRUE(r.attractors.size() >= 1);
}

TEST(Hurley, HakimPetal) {
  HurleyReport r = hurley_report(poly1({{1, 1.0}, {2, 1.0}}), kUnit, 7);
  ASSERT_EQ(r.items.size(), 4u);
  EXPECT_TRUE(r.items[3].applicable);
  EXPECT_TRUE(r.items[3].pass) << r.items[3].violations;
  EXPECT_GT(r.petal_boxes, 0u);
  const int oc = r.morse.class_of[*r.graph.grid.locate(make_point({1e-9}))];
  bool in_range = false;
  for (auto v : r.morse.members[oc])
    if (v < r.graph.grid.count) {
      double x = r.graph.grid.center(v)[0].real();
      in_range |= x > 0.0 && x < 0.2;
    }
  EXPECT_TRUE(in_range);
}

TEST(Output, DotAndPixels) {
  BoxGraph g = build_box_map(kHalf, kUnit, 3);
  MorseGraph mg = lyapunov(morse_graph(g));
  std::string dot = morse_dot(mg, "hdr");
  EXPECT_EQ(dot.rfind("// hdr\ndigraph morse {\n", 0), 0u);
  EXPECT_NE(dot.find("doublecircle"), std::string::npos);
  const auto& inf = mg.members[mg.infinity_class];
  EXPECT_NE(dot.find(std::to_string(mg.infinity_class) + ":" + std::to_string(inf.size()) + ":0"), std::string::npos);
  auto px = recurrent_pixels(g, mg);
  EXPECT_EQ(px.size(), 64u);
  EXPECT_EQ(px[0], 0);
}
