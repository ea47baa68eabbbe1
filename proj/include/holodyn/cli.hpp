#pragma once

#include "holodyn/conley.hpp"
#include "holodyn/julia.hpp"
#include "holodyn/map_json.hpp"
#include "holodyn/orbits.hpp"
#include "holodyn/periodic.hpp"
#include "holodyn/perturb.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>

namespace holodyn::cli {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunConfig {
  std::string command;
  json params = json::object();  // merged config, map resolved inline
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  std::string hash;

  std::string tag() const {
    return std::string("holodyn ") + kVersion + " config=" + hash + " seed=" + std::to_string(seed);
  }
  json meta() const { return {{"tool", "holodyn"}, {"version", kVersion}, {"config_hash", hash}, {"seed", seed}}; }
};

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> map_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> slice;  // "re0,im0": julia slice value of z_2
  std::vector<std::string> sets;     // key=value, value parsed as JSON when it parses
};

namespace detail {

inline json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + " " + path + ": " + e.what());
  }
}

inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
  namespace fs = std::filesystem;
  if (fs::exists(p) || base_dir.empty() || fs::path(p).is_absolute()) return p;
  fs::path alt = fs::path(base_dir) / p;
  return fs::exists(alt) ? alt.string() : p;
}

inline json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::exception&) {
    return v;
  }
}

}  // namespace detail

inline RunConfig resolve(const std::string& command, const Overrides& ov) {
  RunConfig rc;
  rc.command = command;
  std::string base_dir;
  if (ov.config_path) {
    rc.params = detail::read_json_file(*ov.config_path, "config");
    if (!rc.params.is_object()) throw ConfigError("config must be a JSON object");
    base_dir = std::filesystem::path(*ov.config_path).parent_path().string();
  }
  for (const auto& s : ov.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set needs key=value: " + s);
    std::string key = s.substr(0, eq);
    std::string ptr = "/" + key;
    std::replace(ptr.begin(), ptr.end(), '.', '/');
    rc.params[json::json_pointer(ptr)] = detail::parse_value(s.substr(eq + 1));
  }
  if (ov.map_path) rc.params["map"] = *ov.map_path;
  if (ov.seed) rc.params["seed"] = *ov.seed;
  if (ov.threads) rc.params["threads"] = *ov.threads;
  if (ov.out) rc.params["out"] = *ov.out;
  if (ov.slice) {
    // "re0,im0": value of the second coordinate on the z_1 plane
    std::vector<double> v;
    std::stringstream ss(*ov.slice);
    std::string tok;
    try {
      while (std::getline(ss, tok, ',')) {
        size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw ConfigError("");
      }
    } catch (const std::exception&) {
      v.clear();
    }
    if (v.size() != 2) throw ConfigError("--slice needs re0,im0");
    rc.params["slice"] = {{"fixed", {v[0], v[1]}}};
  }

  if (!rc.params.contains("map") && command != "hakim") throw ConfigError("no map given (--map or config key 'map')");
  if (rc.params.contains("map") && rc.params["map"].is_string())
    rc.params["map"] = detail::read_json_file(detail::resolve_path(rc.params["map"], base_dir), "map file");
  try {
    rc.seed = rc.params.value("seed", std::uint64_t{1});
    rc.threads = rc.params.value("threads", 0);
    rc.out_dir = rc.params.value("out", std::string("out"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (rc.threads < 0) throw ConfigError("threads must be non-negative");

  // Output location and worker count do not change results.
  json hashed = rc.params;
  hashed.erase("out");
  hashed.erase("threads");
  hashed["command"] = command;
  hashed["seed"] = rc.seed;
  rc.hash = hex64(fnv1a(hashed.dump()));
  return rc;
}

// Typed config access; any type or range problem is a config error.
class Params {
 public:
  explicit Params(const json& j) : j_(j) {}

  bool has(const char* k) const { return j_.contains(k); }

  int integer(const char* k, int def, int lo = std::numeric_limits<int>::min()) const {
    int v = def;
    if (has(k)) {
      if (!j_[k].is_number_integer()) throw ConfigError(std::string("'") + k + "' must be an integer");
      v = j_[k].get<int>();
    }
    if (v < lo) throw ConfigError(std::string("'") + k + "' must be >= " + std::to_string(lo));
    return v;
  }
  double real(const char* k, double def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number()) throw ConfigError(std::string("'") + k + "' must be a number");
    return j_[k].get<double>();
  }
  double positive(const char* k, double def) const {
    double v = real(k, def);
    if (!(v > 0.0)) throw ConfigError(std::string("'") + k + "' must be positive");
    return v;
  }
  bool flag(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_[k].is_boolean()) throw ConfigError(std::string("'") + k + "' must be true or false");
    return j_[k].get<bool>();
  }
  std::string text(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_[k].is_string()) throw ConfigError(std::string("'") + k + "' must be a string");
    return j_[k].get<std::string>();
  }
  const json& raw(const char* k) const {
    if (!has(k)) throw ConfigError(std::string("missing config key '") + k + "'");
    return j_[k];
  }

 private:
  const json& j_;
};

inline cplx parse_complex(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("complex numbers are a number or [re, im]");
}

// A point is a number (n = 1) or an array of n entries, each a number or [re, im].
inline CVec parse_point(const json& v, int n) {
  if (v.is_number() && n == 1) return make_point({v.get<double>()});
  if (!v.is_array() || static_cast<int>(v.size()) != n) throw ConfigError("point must have " + std::to_string(n) + " entries");
  CVec p(n);
  for (int i = 0; i < n; ++i) p[i] = parse_complex(v[i]);
  return p;
}

inline CMatrix parse_matrix(const json& v, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) throw ConfigError("matrix must have n rows");
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != n) throw ConfigError("matrix rows must have n entries");
    for (int j = 0; j < n; ++j) m(i, j) = parse_complex(v[i][j]);
  }
  return m;
}

// {"square": [lo, hi]} | {"polydisc": r, "center": point} | {"axes": [[lo, hi], ...], "shape": "box"|"polydisc"}
inline Window parse_window(const json& v, int n) {
  try {
    if (!v.is_object()) throw ConfigError("window must be an object");
    if (v.contains("square")) {
      auto s = v["square"].get<std::vector<double>>();
      if (s.size() != 2) throw ConfigError("square window needs [lo, hi]");
      return Window::square(n, s[0], s[1]);
    }
    if (v.contains("polydisc")) {
      double r = v["polydisc"].get<double>();
      if (!(r > 0.0)) throw ConfigError("polydisc radius must be positive");
      CVec c = v.contains("center") ? parse_point(v["center"], n) : CVec(CVec::Zero(n));
      std::vector<Interval> axes;
      for (int k = 0; k < 2 * n; ++k) axes.push_back({real_coord(c, k) - r, real_coord(c, k) + r});
      return Window(axes, Window::Shape::polydisc);
    }
    if (v.contains("axes")) {
      std::vector<Interval> axes;
      for (const auto& a : v["axes"]) {
        auto s = a.get<std::vector<double>>();
        if (s.size() != 2) throw ConfigError("window axes are [lo, hi] pairs");
        axes.push_back({s[0], s[1]});
      }
      if (static_cast<int>(axes.size()) != 2 * n) throw ConfigError("window needs 2n axes");
      auto shape = v.value("shape", std::string("box"));
      if (shape != "box" && shape != "polydisc") throw ConfigError("window shape is box or polydisc");
      return Window(axes, shape == "box" ? Window::Shape::box : Window::Shape::polydisc);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad window: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("bad window: ") + e.what());
  }
  throw ConfigError("window needs 'square', 'polydisc' or 'axes'");
}

inline Window window_or(const Params& p, const char* key, int n, const Window& def) {
  return p.has(key) ? parse_window(p.raw(key), n) : def;
}

inline PolyMap config_map(const RunConfig& rc) {
  try {
    return map_from_json(rc.params["map"]);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// Output sink: every file gets the tag line in its format's comment syntax.
class Outputs {
 public:
  explicit Outputs(const RunConfig& rc) : rc_(rc) {
    std::error_code ec;
    std::filesystem::create_directories(rc.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + rc.out_dir + ": " + ec.message());
  }

  void csv(const std::string& name, const std::string& body) { write(name, "# " + rc_.tag() + "\n" + body); }
  void json_file(const std::string& name, json j) {
    j["meta"] = rc_.meta();
    write(name, j.dump(2) + "\n");
  }
  void pgm_file(const std::string& name, int w, int h, const std::vector<unsigned char>& px) {
    write(name, pgm(w, h, px, rc_.tag()));
  }
  void dot(const std::string& name, const std::string& body) { write(name, body); }

  const std::vector<std::string>& written() const { return files_; }

 private:
  void write(const std::string& name, const std::string& data) {
    auto path = (std::filesystem::path(rc_.out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << data;
    files_.push_back(path);
  }

  const RunConfig& rc_;
  std::vector<std::string> files_;
};

inline FinderOptions finder_options(const Params& p, const RunConfig& rc) {
  FinderOptions o;
  o.seeds = p.integer("seeds", 256, 1);
  o.tol = p.positive("tol", 1e-10);
  o.max_steps = p.integer("max_steps", 50, 1);
  o.seed = rc.seed;
  return o;
}

inline json counts_json(const std::vector<PeriodCount>& counts) {
  json a = json::array();
  for (const auto& c : counts)
    a.push_back({{"period", c.period}, {"found", c.found}, {"bound", c.bound}, {"complete", c.complete}});
  return a;
}

inline void cmd_periodic(const RunConfig& rc) {
  Params p(rc.params);
  PolyMap f = config_map(rc);
  Window w = window_or(p, "window", f.dim(), Window::square(f.dim(), -2, 2));
  int m_max = p.integer("m_max", 5, 1);
  auto rep = hyperbolicity_report(f, m_max, w, finder_options(p, rc));
  Outputs out(rc);
  out.csv("cycles.csv", cycles_csv(rep.cycles, f.dim()));
  json nh = json::array();
  std::map<std::string, int> kinds;
  for (const auto& c : rep.cycles) {
    ++kinds[to_string(c.kind)];
    if (c.kind == Stability::non_hyperbolic || !c.transverse) nh.push_back(cycle_json(c));
  }
  out.json_file("periodic.json", {{"m_max", m_max},
                                  {"cycles", rep.cycles.size()},
                                  {"cycles_outside_window", rep.search.outside.size()},
                                  {"by_class", kinds},
                                  {"fraction_hyperbolic", rep.fraction_hyperbolic},
                                  {"fraction_transverse", rep.fraction_transverse},
                                  {"all_hyperbolic", rep.all_hyperbolic},
                                  {"all_transverse", rep.all_transverse},
                                  {"non_hyperbolic_or_non_transverse", nh},
                                  {"counts", counts_json(rep.search.counts)}});
}

inline void cmd_julia(const RunConfig& rc) {
  Params p(rc.params);
  PolyMap f = config_map(rc);
  Window w = window_or(p, "window", f.dim(), Window::square(f.dim(), -2, 2));
  int res = p.integer("res", 512, 2);
  int n_max = p.integer("n_max", 200, 1);
  double R = p.real("R", 0.0);
  std::vector<int> axes{0, 1};
  std::optional<CVec> base;
  if (p.has("slice")) {
    const json& s = p.raw("slice");
    try {
      if (s.contains("axes")) axes = s["axes"].get<std::vector<int>>();
    } catch (const json::exception&) {
      throw ConfigError("slice axes must be integers");
    }
    if (s.contains("base")) base = parse_point(s["base"], f.dim());
    if (s.contains("fixed")) {
      if (f.dim() < 2) throw ConfigError("slices need n >= 2");
      CVec b = base ? *base : w.center();
      b[1] = parse_complex(s["fixed"]);
      base = b;
    }
  }
  if (axes.size() != 2) throw ConfigError("julia grids are two-axis slices");
  EscapeGrid g;
  try {
    g = escape_grid(f, w, res, n_max, R, axes, base);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  auto boundary = boundary_extract(g);
  RepellerOptions ro;
  ro.finder = finder_options(p, rc);
  ro.include_saddles = p.flag("include_saddles", false);
  if (p.flag("hint_boundary", false)) ro.finder.hints = boundary.points;
  PointCloud rep;
  if (!f.is_entire() || p.has("m_max")) rep = repeller_cloud(f, p.integer("m_max", 7, 1), w, ro);
  Outputs out(rc);
  out.pgm_file("escape.pgm", res, res, escape_pixels(g));
  out.csv("boundary.csv", cloud_csv(boundary, f.dim()));
  out.csv("repellers.csv", cloud_csv(rep, f.dim()));
  json j = {{"res", res},
            {"n_max", n_max},
            {"R", g.R},
            {"cell_width", g.max_cell_width()},
            {"bounded_cells", g.bounded_count()},
            {"boundary_points", boundary.size()},
            {"repeller_points", rep.size()}};
  // The Hausdorff distance compares the repellers with the boundary of the
  // slice, so it only makes sense when the slice is the whole space.
  if (!boundary.empty() && !rep.empty() && f.dim() == 1) {
    double br = directed_hausdorff(boundary.points, rep.points);
    double rb = directed_hausdorff(rep.points, boundary.points);
    j["hausdorff"] = std::max(br, rb);
    j["boundary_to_repellers"] = br;
    j["repellers_to_boundary"] = rb;
  }
  std::string warning = boundary.warning;
  if (warning.empty() && rep.empty()) warning = "no repelling cycles found";
  if (!warning.empty()) j["warning"] = warning;
  out.json_file("julia.json", j);
}

inline void cmd_conley(const RunConfig& rc) {
  Params p(rc.params);
  PolyMap f = config_map(rc);
  Window w = window_or(p, "window", f.dim(), Window::square(f.dim(), -2, 2));
  HurleyOptions ho;
  ho.samples_per_box = p.integer("samples_per_box", 16, 0);
  try {
    ho.pad = PadMode::parse(p.text("pad", "jacobian"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  ho.m_max = p.integer("m_max", 4, 1);
  ho.seeds = p.integer("seeds", 256, 1);
  ho.n_max = p.integer("basin_n_max", 2000, 1);
  ho.seed = rc.seed;
  int depth = p.integer("depth", 6, 1);
  HurleyReport r;
  try {
    r = hurley_report(f, w, depth, ho);
  } catch (const OverflowError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  Outputs out(rc);
  out.dot("morse.dot", morse_dot(r.morse, rc.tag()));
  out.pgm_file("recurrent.pgm", r.graph.grid.per_axis, r.graph.grid.per_axis, recurrent_pixels(r.graph, r.morse));
  json j = hurley_json(r);
  j["depth"] = depth;
  j["pad"] = ho.pad.str();
  out.json_file("conley.json", j);
}

inline JetConstraint parse_constraint(const json& c, int n) {
  JetConstraint k;
  if (!c.is_object() || !c.contains("at") || !c.contains("value")) throw ConfigError("constraints need 'at' and 'value'");
  k.at = parse_point(c["at"], n);
  k.value = parse_point(c["value"], n);
  if (c.contains("jacobian")) k.jacobian = parse_matrix(c["jacobian"], n);
  return k;
}

inline Stability parse_kind(const std::string& s) {
  if (s == "super_attracting") return Stability::super_attracting;
  if (s == "repelling") return Stability::repelling;
  if (s == "saddle") return Stability::saddle;
  throw ConfigError("kind is super_attracting, repelling or saddle");
}

// mode: interpolate | close_orbit | make_periodic | escaping | random
inline void cmd_perturb(const RunConfig& rc) {
  Params p(rc.params);
  PolyMap f = config_map(rc);
  const int n = f.dim();
  const std::string mode = p.text("mode", "close_orbit");
  const int budget = p.integer("budget", 8, 0);
  Window K = window_or(p, "K", n, Window::square(n, -1, 1));
  PolyMap h;
  json report;
  auto lib = [](auto&& fn) {
    try {
      return fn();
    } catch (const InfeasibleError&) {
      throw;
    } catch (const OverflowError&) {
      throw;
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.find("infeasible") != std::string::npos) throw InfeasibleError(what);
      throw ConfigError(what);
    }
  };

  if (mode == "interpolate") {
    std::vector<JetConstraint> cs;
    for (const auto& c : p.raw("constraints")) cs.push_back(parse_constraint(c, n));
    Correction c = lib([&] { return interpolate_correction(f, cs, budget, K); });
    h = c.map();
    report = correction_json(c, cs);
  } else if (mode == "close_orbit" || mode == "make_periodic") {
    CVec q = parse_point(p.raw("q"), n);
    int m = p.integer("m", 1, 0);
    ClosedOrbit co = mode == "close_orbit"
                         ? lib([&] { return close_orbit(f, q, m, parse_matrix(p.raw("jacobian"), n), K, budget); })
                         : lib([&] { return make_periodic_point(f, q, m, parse_kind(p.text("kind", "repelling")), K, budget); });
    h = co.h;
    json law = json::array();
    for (cplx l : co.law_multipliers) law.push_back({l.real(), l.imag()});
    report = {{"correction", correction_json(co.correction, {})},
              {"cycle", cycle_json(co.cycle)},
              {"law_multipliers", law},
              {"law_error", co.law_error}};
  } else if (mode == "escaping") {
    CVec q = parse_point(p.raw("q"), n);
    std::vector<Window> Ks;
    if (p.has("windows")) {
      for (const auto& w : p.raw("windows")) Ks.push_back(parse_window(w, n));
    } else {
      int N = p.integer("N", 3, 1);
      for (int i = 0; i <= N; ++i) Ks.push_back(Window::polydisc(n, 2.0 + i));
    }
    double eps = p.positive("eps", 1.0);
    EscapingResult r = lib([&] { return escaping_construction(f, q, Ks, eps, budget); });
    h = r.h;
    report = escaping_json(r);
    report["eps"] = eps;
  } else if (mode == "random") {
    double eps = p.real("eps", 0.1);
    h = lib([&] { return random_perturbation(f, eps, K, rc.seed); });
    report = {{"eps", eps}, {"sampled_sup_norm_on_K", eps == 0.0 ? 0.0 : sampled_sup_norm(h + scale_map(f, -1.0), K)}};
  } else {
    throw ConfigError("perturb mode is interpolate, close_orbit, make_periodic, escaping or random");
  }
  report["mode"] = mode;
  report["budget"] = budget;
  Outputs out(rc);
  json mj = map_to_json(h);
  out.json_file("map.json", mj);
  out.json_file("perturb.json", report);
}

inline void cmd_hakim(const RunConfig& rc) {
  Params p(rc.params);
  int dim = p.integer("dim", 1, 1);
  if (dim > 2) throw ConfigError("dim must be 1 or 2");
  int steps = p.integer("steps", 10000, 1);
  CVec start = p.has("start") ? parse_point(p.raw("start"), dim) : CVec(CVec::Constant(dim, cplx(-0.2)));
  HakimReport r = hakim_experiment(dim, start, steps);
  PolyMap f = hakim_map(dim);
  Outputs out(rc);
  std::ostringstream csv;
  csv << "k,norm,k_times_norm\n";
  CVec x = start, y;
  for (int k = 1; k <= steps; ++k) {
    if (!eval_into(f, x, y)) break;
    x = y;
    double a = sup_norm(x);
    csv << k << ',' << fmt_double(a) << ',' << fmt_double(k * a) << '\n';
  }
  out.csv("decay.csv", csv.str());
  out.json_file("hakim.json", hakim_json(r));
}

inline void run(const RunConfig& rc) {
  set_thread_count(rc.threads);
  if (rc.command == "periodic") return cmd_periodic(rc);
  if (rc.command == "julia") return cmd_julia(rc);
  if (rc.command == "conley") return cmd_conley(rc);
  if (rc.command == "perturb") return cmd_perturb(rc);
  if (rc.command == "hakim") return cmd_hakim(rc);
  throw ConfigError("unknown command " + rc.command);
}

}  // namespace holodyn::cli
