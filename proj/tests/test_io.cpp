#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "cohomflow/io.hpp"

using namespace cohomflow;
using std::numbers::pi;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cohomflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST(ProfileCsv, RoundTripIsBitIdentical) {
  const auto dir = scratch("roundtrip");
  const auto spec = ManifoldSpec::make(Family::CP2, 2.0);
  auto P = build_grove_ziller(spec, 1.0, spec.L / 4, Grid(64, spec.L));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  for (auto& v : P.f)
    for (double& x : v) x *= 1 + jitter(rng);
  P.t = 1.0 / 3.0;
  write_profiles_csv(dir / "p.csv", P);
  const auto Q = read_profiles_csv(dir / "p.csv");
  EXPECT_EQ(Q.grid.N, P.grid.N);
  EXPECT_EQ(Q.grid.L, P.grid.L);
  EXPECT_EQ(Q.t, P.t);
  EXPECT_EQ(Q.spec.family, Family::CP2);
  EXPECT_EQ(Q.spec.slope_plus, P.spec.slope_plus);
  EXPECT_EQ(Q.spec.reflection_plus.perm, P.spec.reflection_plus.perm);
  EXPECT_EQ(Q.spec.reflection_plus.sign, P.spec.reflection_plus.sign);
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < P.grid.N; ++i)
      EXPECT_EQ(std::memcmp(&Q.f[a][i], &P.f[a][i], sizeof(double)), 0);
  EXPECT_EQ(slurp(dir / "p.csv").substr(0, 18), "r,zeta,phi,psi,xi\n");
}

TEST(ProfileCsv, ErrorsAreReported) {
  const auto dir = scratch("badcsv");
  EXPECT_THROW(read_profiles_csv(dir / "missing.csv"), InvalidArgument);
  const auto P = build_model_metric(ModelMetric::RoundS4, Grid(8, pi / 3), 1.0);
  write_profiles_csv(dir / "p.csv", P);
  {
    std::ofstream os(dir / "p.csv", std::ios::app);
    os << "1,2,3\n";
  }
  EXPECT_THROW(read_profiles_csv(dir / "p.csv"), InvalidArgument);
}

TEST(CurvatureCsv, HeaderAndRoundSphereValues) {
  const auto dir = scratch("curv");
  const auto P = build_model_metric(ModelMetric::RoundS4, Grid(40, pi / 3), 1.0);
  write_curvature_csv(dir / "c.csv", P);
  std::ifstream is(dir / "c.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "r,sec01,sec02,sec03,sec23,sec31,sec12,ric00,ric11,ric22,ric33,minsec");
  int rows = 0;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 12u);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(v[k], 1.0, 1e-9);
    for (int k = 7; k <= 10; ++k) EXPECT_NEAR(v[k], 3.0, 1e-9);
    EXPECT_NEAR(v[11], 1.0, 1e-9);
    ++rows;
  }
  EXPECT_EQ(rows, 40);
}

TEST(Diagnostics, ColumnsAndTraceFiles) {
  const auto dir = scratch("diag");
  const auto P = build_model_metric(ModelMetric::ProductCylinder, Grid(8, 1.0), 2.0, 1.0);
  FlowOptions fo;
  fo.t_end = 1e-3;
  fo.output_stride = 2;
  const auto tr = evolve(P, fo);
  const auto files = write_trace(dir, tr);
  EXPECT_EQ(files.size(), tr.snapshots.size() + 1);
  const auto text = slurp(dir / "diagnostics.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,dt,max_rhs,minsec,slope_res_minus,slope_res_plus");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), tr.steps.size() + 1);
  const auto last = read_profiles_csv(dir / "snapshot_00000.csv");
  EXPECT_EQ(last.t, 0.0);
}

TEST(Report, JsonHasRequiredFields) {
  const auto spec = ManifoldSpec::make(Family::S4, 2.0);
  TheoremParams p;
  p.N = 100;
  p.minsec.samples = 200;
  const auto r = theorem_check(spec, p).report;
  const auto j = report_to_json(r);
  std::ifstream is(fs::path(COHOMFLOW_SOURCE_DIR) / "schemas" / "report.schema.json");
  ASSERT_TRUE(is.good());
  const auto schema = json::parse(is);
  for (const auto& key : schema.at("required")) EXPECT_TRUE(j.contains(key.get<std::string>())) << key;
  EXPECT_EQ(j["manifold"], "s4");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_TRUE(j["first_negative_t"].is_number());
  for (const auto& s : j["scalars"]) EXPECT_TRUE(s.contains("tolerance"));
}

TEST(Report, MissingValuesBecomeNull) {
  ExperimentReport r;
  r.experiment = "einstein-round-s4";
  r.spec = ManifoldSpec::make(Family::S4, 1.0);
  const auto j = report_to_json(r);
  EXPECT_TRUE(j["r0"].is_null());
  EXPECT_TRUE(j["first_negative_t"].is_null());
  EXPECT_EQ(j["verdict"], "inconclusive");
}

TEST(Config, ParsesAndDefaults) {
  const auto c = config_from_json(json::parse(R"({"manifold":"mn","n":1,"N":200,"t_end":5e-4,
      "cfl":0.5,"stride":3,"ghost_mode":"one_sided","seed":7,"slopes":[2,2]})"));
  EXPECT_EQ(c.manifold, "mn");
  EXPECT_EQ(c.n, 1);
  EXPECT_EQ(c.N, 200);
  EXPECT_EQ(c.flow.t_end, 5e-4);
  EXPECT_EQ(c.flow.cfl, 0.5);
  EXPECT_EQ(c.flow.output_stride, 3);
  EXPECT_EQ(c.flow.ghost_mode, GhostMode::one_sided);
  EXPECT_EQ(c.seed, 7u);
  const auto s = spec_from_config(c);
  EXPECT_EQ(s.slope_minus, 2.0);
  EXPECT_EQ(s.L, 10.0);
  const auto d = config_from_json(json::object());
  EXPECT_EQ(d.manifold, "s4");
  EXPECT_EQ(d.seed, 0u);
}

TEST(Config, ErrorsNameTheField) {
  auto msg = [](const char* text) {
    try {
      config_from_json(json::parse(text));
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg(R"({"cfl": 2})").find("'cfl'"), std::string::npos);
  EXPECT_NE(msg(R"({"N": "many"})").find("'N'"), std::string::npos);
  EXPECT_NE(msg(R"({"manifold": "t4"})").find("'manifold'"), std::string::npos);
  EXPECT_NE(msg(R"({"plateu": 1})").find("'plateu'"), std::string::npos);
  EXPECT_NE(msg(R"({"t_end": -1})").find("'t_end'"), std::string::npos);
  EXPECT_NE(msg(R"({"ghost_mode": "wrap"})").find("'ghost_mode'"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/config.json"), InvalidArgument);
}

TEST(Svg, DeterministicProfilePlot) {
  const auto spec = ManifoldSpec::make(Family::S4, 2.0);
  const auto P = build_grove_ziller(spec, 1.0, spec.L / 4, Grid(100, spec.L));
  const auto a = render_profiles_svg(P, "Grove-Ziller S4");
  const auto b = render_profiles_svg(P, "Grove-Ziller S4");
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n') > 10, true);
  size_t lines = 0;
  for (size_t pos = 0; (pos = a.find("<polyline", pos)) != std::string::npos; ++pos) ++lines;
  EXPECT_EQ(lines, 3u);
  EXPECT_NE(a.find(">phi<"), std::string::npos);
  EXPECT_NE(a.find(">xi<"), std::string::npos);
}

TEST(Svg, EmptyInputGivesAxesOnly) {
  const auto s = render_svg({}, "empty", "t", "min sec");
  EXPECT_EQ(s.find("<polyline"), std::string::npos);
  EXPECT_NE(s.find("<line"), std::string::npos);
  EXPECT_EQ(s.rfind("</svg>\n"), s.size() - 7);
}
