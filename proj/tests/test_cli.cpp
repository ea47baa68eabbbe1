#include "holodyn/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>

using namespace holodyn;
namespace fs = std::filesystem;

namespace {

const std::string kSamples = HOLODYN_SAMPLES;
const std::string kCli = HOLODYN_CLI;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("holodyn_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Resolve, HashIgnoresOutputAndThreads) {
  cli::Overrides a;
  a.config_path = kSamples + "/configs/periodic_z2.json";
  cli::Overrides b = a;
  b.out = "/tmp/elsewhere";
  b.threads = 3;
  cli::RunConfig ra = cli::resolve("periodic", a), rb = cli::resolve("periodic", b);
  EXPECT_EQ(ra.hash, rb.hash);
  EXPECT_EQ(rb.threads, 3);
  EXPECT_EQ(rb.out_dir, "/tmp/elsewhere");

  cli::Overrides c = a;
  c.seed = 99;
  EXPECT_NE(cli::resolve("periodic", c).hash, ra.hash);
  EXPECT_NE(cli::resolve("julia", a).hash, ra.hash);
  EXPECT_EQ(ra.hash.size(), 16u);
  EXPECT_NE(ra.tag().find(ra.hash), std::string::npos);
  EXPECT_NE(ra.tag().find(cli::kVersion), std::string::npos);
}

TEST(Resolve, OverridesAndMapResolution) {
  cli::Overrides o;
  o.config_path = kSamples + "/configs/periodic_z2.json";
  o.sets = {"m_max=3", "window.square=[-1,1]", "label=plain text"};
  cli::RunConfig rc = cli::resolve("periodic", o);
  EXPECT_EQ(rc.params["m_max"], 3);
  EXPECT_EQ(rc.params["window"]["square"][0], -1);
  EXPECT_EQ(rc.params["label"], "plain text");
  EXPECT_TRUE(rc.params["map"].is_object());  // relative path resolved against the config dir

  cli::Overrides m;
  m.map_path = kSamples + "/maps/z2_minus_1.json";
  cli::RunConfig rm = cli::resolve("periodic", m);
  EXPECT_EQ(cli::config_map(rm).dim(), 1);

  cli::Overrides s;
  s.map_path = kSamples + "/maps/squares2.json";
  s.slice = "0.25,-0.5";
  cli::RunConfig rs = cli::resolve("julia", s);
  EXPECT_EQ(rs.params["slice"]["fixed"][0], 0.25);
  EXPECT_EQ(rs.params["slice"]["fixed"][1], -0.5);
}

TEST(Resolve, ConfigErrors) {
  EXPECT_THROW(cli::resolve("periodic", {}), cli::ConfigError);
  EXPECT_NO_THROW(cli::resolve("hakim", {}));
  cli::Overrides bad;
  bad.config_path = "/nonexistent.json";
  EXPECT_THROW(cli::resolve("periodic", bad), cli::ConfigError);
  cli::Overrides set;
  set.map_path = kSamples + "/maps/z2.json";
  set.sets = {"novalue"};
  EXPECT_THROW(cli::resolve("periodic", set), cli::ConfigError);
  cli::Overrides sl;
  sl.map_path = kSamples + "/maps/z2.json";
  sl.slice = "1,2,3";
  EXPECT_THROW(cli::resolve("julia", sl), cli::ConfigError);
}

TEST(Params, TypedAccess) {
  json j = {{"a", 3}, {"b", 1.5}, {"c", "x"}, {"d", true}};
  cli::Params p(j);
  EXPECT_EQ(p.integer("a", 0), 3);
  EXPECT_EQ(p.integer("zz", 7), 7);
  EXPECT_THROW(p.integer("b", 0), cli::ConfigError);
  EXPECT_THROW(p.integer("a", 0, 4), cli::ConfigError);
  EXPECT_EQ(p.real("a", 0.0), 3.0);
  EXPECT_THROW(p.positive("zz", -1.0), cli::ConfigError);
  EXPECT_THROW(p.text("a", ""), cli::ConfigError);
  EXPECT_TRUE(p.flag("d", false));
  EXPECT_THROW(p.raw("missing"), cli::ConfigError);
}

TEST(Parse, PointsMatricesWindows) {
  EXPECT_EQ(cli::parse_complex(json::parse("[1, -2]")), cplx(1, -2));
  EXPECT_THROW(cli::parse_complex(json::parse("\"1\"")), cli::ConfigError);
  CVec p = cli::parse_point(json::parse("[0.5, [0, 1]]"), 2);
  EXPECT_EQ(p[1], cplx(0, 1));
  EXPECT_THROW(cli::parse_point(json::parse("[1]"), 2), cli::ConfigError);
  CMatrix m = cli::parse_matrix(json::parse("[[1, 0], [0, [0, 2]]]"), 2);
  EXPECT_EQ(m(1, 1), cplx(0, 2));
  Window w = cli::parse_window(json::parse(R"({"polydisc": 2, "center": [[1, 0]]})"), 1);
  EXPECT_TRUE(w.contains(make_point({cplx(2.9, 0)})));
  EXPECT_FALSE(w.contains(make_point({cplx(2.5, 1.5)})));
  EXPECT_THROW(cli::parse_window(json::parse(R"({"square": [1, 1]})"), 1), cli::ConfigError);
  EXPECT_THROW(cli::parse_window(json::parse(R"({"axes": [[0, 1]]})"), 1), cli::ConfigError);
  EXPECT_THROW(cli::parse_window(json::parse("{}"), 1), cli::ConfigError);
}

TEST(Cli, PeriodicZ2) {
  fs::path out = scratch("periodic");
  ASSERT_EQ(run_cli("periodic --config " + kSamples + "/configs/periodic_z2.json --out " + out.string()), 0);
  std::ifstream in(out / "cycles.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# holodyn ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("period,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    ASSERT_GE(f.size(), 4u);
    const double r = std::hypot(std::stod(f[1]), std::stod(f[2]));
    EXPECT_TRUE(r < 1e-8 || std::abs(r - 1.0) < 1e-8);
    ++rows;
  }
  EXPECT_GT(rows, 5);
  json j = json::parse(slurp(out / "periodic.json"));
  EXPECT_TRUE(j["all_hyperbolic"].get<bool>());
  EXPECT_EQ(j["meta"]["version"], cli::kVersion);
}

TEST(Cli, PeriodicFlagsParabolic) {
  fs::path out = scratch("parabolic");
  ASSERT_EQ(run_cli("periodic --config " + kSamples + "/configs/periodic_hakim.json --out " + out.string()), 0);
  json j = json::parse(slurp(out / "periodic.json"));
  EXPECT_FALSE(j["all_hyperbolic"].get<bool>());
  bool zero = false;
  for (const auto& c : j["non_hyperbolic_or_non_transverse"])
    zero |= c["class"] == "non_hyperbolic" && std::abs(c["points"][0][0][0].get<double>()) < 1e-12;
  EXPECT_TRUE(zero);
}

TEST(Cli, ExitCodes) {
  fs::path out = scratch("codes");
  const std::string z2 = kSamples + "/maps/z2.json";
  EXPECT_EQ(run_cli("periodic --map " + z2 + " --set 'window={\"square\":[1,1]}' --out " + out.string()), 2);
  EXPECT_EQ(run_cli("periodic --out " + out.string()), 2);
  EXPECT_EQ(run_cli("periodic --map /nonexistent.json --out " + out.string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("conley --map " + z2 + " --set pad=bogus --out " + out.string()), 2);
  EXPECT_EQ(run_cli("perturb --config " + kSamples + "/configs/perturb_infeasible.json --out " + out.string()), 3);
  EXPECT_EQ(run_cli("hakim --set start=0.5 --out " + out.string()), 2);
  EXPECT_EQ(run_cli("hakim --set steps=100 --out " + out.string()), 0);
}

TEST(Cli, JuliaOutputs) {
  fs::path out = scratch("julia");
  ASSERT_EQ(run_cli("julia --map " + kSamples + "/maps/z2_minus_1.json --set res=128 --set m_max=5 --out " +
                    out.string()),
            0);
  for (const char* f : {"escape.pgm", "boundary.csv", "repellers.csv", "julia.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_GT(fs::file_size(out / "boundary.csv"), 200u);
  EXPECT_GT(fs::file_size(out / "repellers.csv"), 200u);
  std::string pgm = slurp(out / "escape.pgm");
  EXPECT_EQ(pgm.rfind("P5\n# holodyn ", 0), 0u);

  fs::path id = scratch("julia_id");
  ASSERT_EQ(run_cli("julia --map " + kSamples + "/maps/identity.json --set res=32 --set R=10 --set m_max=1 --out " +
                    id.string()),
            0);
  json j = json::parse(slurp(id / "julia.json"));
  EXPECT_TRUE(j.contains("warning"));
  EXPECT_EQ(j["boundary_points"], 0);

  fs::path sl = scratch("julia_slice");
  ASSERT_EQ(run_cli("julia --map " + kSamples + "/maps/squares2.json --slice=0.5,0 --set res=64 --set m_max=2 --out " +
                    sl.string()),
            0);
  json s = json::parse(slurp(sl / "julia.json"));
  // w = 0.5 stays bounded, so the z-plane picture is the unit disc.
  EXPECT_NEAR(s["bounded_cells"].get<double>() * std::pow(s["cell_width"].get<double>(), 2), std::numbers::pi, 0.3);
}

TEST(Cli, ConleyOutputs) {
  fs::path out = scratch("conley");
  ASSERT_EQ(run_cli("conley --map " + kSamples + "/maps/half.json --set 'window={\"square\":[-1,1]}' --set depth=4 --out " +
                    out.string()),
            0);
  std::string dot = slurp(out / "morse.dot");
  EXPECT_NE(dot.find("digraph morse"), std::string::npos);
  EXPECT_EQ(dot.rfind("// holodyn ", 0), 0u);
  json j = json::parse(slurp(out / "conley.json"));
  EXPECT_TRUE(j["items"][0]["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(out / "recurrent.pgm"));
}

TEST(Cli, PerturbModes) {
  fs::path out = scratch("perturb");
  ASSERT_EQ(run_cli("perturb --config " + kSamples + "/configs/perturb_superattracting.json --out " + out.string()), 0);
  json j = json::parse(slurp(out / "perturb.json"));
  EXPECT_EQ(j["cycle"]["class"], "super_attracting");
  EXPECT_LE(std::hypot(j["cycle"]["multipliers"][0][0].get<double>(), j["cycle"]["multipliers"][0][1].get<double>()), 1e-9);
  PolyMap h = map_from_json(json::parse(slurp(out / "map.json")));
  EXPECT_EQ(h.dim(), 1);

  fs::path esc = scratch("escaping");
  ASSERT_EQ(run_cli("perturb --config " + kSamples + "/configs/perturb_escaping.json --out " + esc.string()), 0);
  EXPECT_TRUE(json::parse(slurp(esc / "perturb.json"))["exits"].get<bool>());
}

TEST(Cli, Reproducible) {
  const std::vector<std::string> runs{"periodic --config " + kSamples + "/configs/periodic_z2.json",
                                      "conley --config " + kSamples + "/configs/conley_z2_minus_1.json --set depth=5",
                                      "perturb --config " + kSamples + "/configs/perturb_saddle.json",
                                      "hakim --config " + kSamples + "/configs/hakim.json"};
  int i = 0;
  for (const auto& r : runs) {
    fs::path a = scratch("rep_a" + std::to_string(i)), b = scratch("rep_b" + std::to_string(i));
    ++i;
    ASSERT_EQ(run_cli(r + " --out " + a.string()), 0) << r;
    ASSERT_EQ(run_cli(r + " --threads 1 --out " + b.string()), 0) << r;
    for (const auto& e : fs::directory_iterator(a)) {
      const auto name = e.path().filename();
      EXPECT_EQ(slurp(e.path()), slurp(b / name)) << r << " " << name;
    }
  }
}
