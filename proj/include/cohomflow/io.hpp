#pragma once

// File formats: profile CSV + JSON sidecar, curvature CSV, diagnostics CSV,
// report JSON, run configuration, and static SVG plots.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cohomflow/analysis.hpp"
#include "json.hpp"

namespace cohomflow {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace detail {

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw InvalidArgument("cannot open '" + p.string() + "' for writing");
  return os;
}

inline json reflection_json(const Reflection& R) {
  return {{"perm", {R.perm[1], R.perm[2], R.perm[3]}}, {"sign", {R.sign[1], R.sign[2], R.sign[3]}}};
}

inline Reflection reflection_from_json(const json& j) {
  Reflection R;
  for (int a = 0; a < 3; ++a) {
    R.perm[a + 1] = j.at("perm").at(a).get<int>();
    R.sign[a + 1] = j.at("sign").at(a).get<int>();
  }
  return R;
}

inline double json_number(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace detail

inline json spec_to_json(const ManifoldSpec& s) {
  return {{"manifold", to_string(s.family)},
          {"n", s.n},
          {"c", s.c},
          {"L", s.L},
          {"collapse_minus", s.collapse_minus},
          {"collapse_plus", s.collapse_plus},
          {"slope_minus", s.slope_minus},
          {"slope_plus", s.slope_plus},
          {"reflection_minus", detail::reflection_json(s.reflection_minus)},
          {"reflection_plus", detail::reflection_json(s.reflection_plus)}};
}

inline ManifoldSpec spec_from_json(const json& j) {
  ManifoldSpec s;
  try {
    s.family = family_from_string(j.at("manifold").get<std::string>());
    s.n = j.at("n").get<int>();
    s.c = j.at("c").get<double>();
    s.L = j.at("L").get<double>();
    s.collapse_minus = j.at("collapse_minus").get<int>();
    s.collapse_plus = j.at("collapse_plus").get<int>();
    s.slope_minus = j.at("slope_minus").get<double>();
    s.slope_plus = j.at("slope_plus").get<double>();
    s.reflection_minus = detail::reflection_from_json(j.at("reflection_minus"));
    s.reflection_plus = detail::reflection_from_json(j.at("reflection_plus"));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad manifold sidecar: ") + e.what());
  }
  s.validate();
  return s;
}

/// Writes `path` (r,zeta,phi,psi,xi at 17 significant digits) and
/// `path` + ".json" with the spec, N and t.
inline void write_profiles_csv(const fs::path& path, const ProfileSet& P) {
  auto os = detail::open_out(path);
  os << "r,zeta,phi,psi,xi\n";
  for (int i = 0; i < P.grid.N; ++i) {
    os << detail::fmt17(P.grid.r(i));
    for (int a = 0; a < 4; ++a) os << ',' << detail::fmt17(P.f[a][i]);
    os << '\n';
  }
  json side = {{"spec", spec_to_json(P.spec)}, {"N", P.grid.N}, {"L", P.grid.L}, {"t", P.t}};
  auto js = detail::open_out(fs::path(path.string() + ".json"));
  js << std::setprecision(17) << side.dump(2) << '\n';
}

inline ProfileSet read_profiles_csv(const fs::path& path) {
  std::ifstream js(path.string() + ".json");
  if (!js) throw InvalidArgument("missing sidecar '" + path.string() + ".json'");
  json side;
  try {
    side = json::parse(js);
  } catch (const json::exception& e) {
    throw InvalidArgument("sidecar is not valid JSON: " + std::string(e.what()));
  }
  const auto spec = spec_from_json(side.at("spec"));
  const Grid grid(side.at("N").get<int>(), side.at("L").get<double>());
  auto P = ProfileSet::allocate(grid, spec);
  P.t = side.at("t").get<double>();

  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(is, line);
  if (line.rfind("r,zeta,phi,psi,xi", 0) != 0)
    throw InvalidArgument("unexpected profile CSV header '" + line + "'");
  int i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    require(i < grid.N, "profile CSV has more rows than N");
    std::array<double, 5> v{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 5; ++k) {
      auto [next, ec] = std::from_chars(p, end, v[k]);
      if (ec != std::errc())
        throw InvalidArgument("bad number in row " + std::to_string(i + 1) + ", column " +
                              std::to_string(k + 1));
      p = next;
      if (k < 4) {
        require(p < end && *p == ',', "missing column in row " + std::to_string(i + 1));
        ++p;
      }
    }
    for (int a = 0; a < 4; ++a) P.f[a][i] = v[a + 1];
    ++i;
  }
  require(i == grid.N, "profile CSV has " + std::to_string(i) + " rows, expected " +
                           std::to_string(grid.N));
  return P;
}

/// r, six frame sectional curvatures, diagonal Ricci, pointwise min sec.
inline void write_curvature_csv(const fs::path& path, const ProfileSet& P,
                                GhostMode mode = GhostMode::reflect) {
  auto os = detail::open_out(path);
  os << "r,sec01,sec02,sec03,sec23,sec31,sec12,ric00,ric11,ric22,ric33,minsec\n";
  const auto jets = node_jets(P, mode);
  const auto field = curvature_field(P, mode);
  constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}};
  for (int i = 0; i < P.grid.N; ++i) {
    os << detail::fmt17(P.grid.r(i));
    for (const auto& pr : pairs) os << ',' << detail::fmt17(field[i].sec(pr[0], pr[1]));
    const auto ric = ricci_closed_form(jets[i], P.spec.c);
    for (int a = 0; a < 4; ++a) os << ',' << detail::fmt17(ric[a]);
    os << ',' << detail::fmt17(min_sec_thorpe(field[i].op)) << '\n';
  }
}

inline void write_diagnostics_csv(const fs::path& path, const FlowTrace& tr) {
  auto os = detail::open_out(path);
  os << "t,dt,max_rhs,minsec,slope_res_minus,slope_res_plus\n";
  for (const auto& s : tr.steps) {
    os << detail::fmt17(s.t) << ',' << detail::fmt17(s.dt) << ',' << detail::fmt17(s.max_rhs) << ','
       << (std::isnan(s.minsec) ? std::string() : detail::fmt17(s.minsec)) << ','
       << detail::fmt17(s.slope_res_minus) << ',' << detail::fmt17(s.slope_res_plus) << '\n';
  }
}

/// One profile CSV per snapshot (snapshot_00000.csv, ...) plus diagnostics.csv.
inline std::vector<std::string> write_trace(const fs::path& dir, const FlowTrace& tr) {
  std::vector<std::string> files;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(5) << std::setfill('0') << k << ".csv";
    write_profiles_csv(dir / name.str(), tr.snapshots[k]);
    files.push_back((dir / name.str()).string());
  }
  write_diagnostics_csv(dir / "diagnostics.csv", tr);
  files.push_back((dir / "diagnostics.csv").string());
  return files;
}

inline json report_to_json(const ExperimentReport& r) {
  auto num_or_null = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  json scalars = json::array();
  for (const auto& s : r.scalars)
    scalars.push_back({{"name", s.name},
                       {"value", num_or_null(s.value)},
                       {"tolerance", num_or_null(s.tolerance)},
                       {"ok", s.ok}});
  json j = {{"experiment", r.experiment},
            {"manifold", r.spec.name()},
            {"n", r.spec.n},
            {"c", r.spec.c},
            {"N", r.N},
            {"t_end", r.t_end},
            {"r0", num_or_null(r.r0)},
            {"sec_slope_numeric", num_or_null(r.sec_slope_numeric)},
            {"sec_slope_analytic", num_or_null(r.sec_slope_analytic)},
            {"min_sec_t0", num_or_null(r.min_sec_t0)},
            {"first_negative_t", r.first_negative_t ? json(*r.first_negative_t) : json(nullptr)},
            {"verdict", to_string(r.verdict)},
            {"scalars", scalars},
            {"artifacts", r.artifacts}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline void write_report(const fs::path& path, const ExperimentReport& r) {
  auto os = detail::open_out(path);
  os << std::setprecision(17) << report_to_json(r).dump(2) << '\n';
}

/// Everything a CLI run can be configured with. JSON keys match the field
/// names; unknown keys are rejected.
struct RunConfig {
  std::string manifold = "s4";
  int n = 2;
  double c = 2.0;
  double plateau = 1.0;
  double width = 0;  // 0 = L/4
  double L = 0;      // 0 = family default
  // "default" or "calibrate"; numbers override via slope_minus/slope_plus.
  std::string slopes = "default";
  double slope_minus = 0, slope_plus = 0;
  int N = 400;
  FlowOptions flow;
  std::string model = "round-s4";
  std::string experiment = "theorem";
  std::string out = "out";
  std::uint64_t seed = 0;
  int samples = 20000;

  void validate() const {
    auto field = [](bool ok, const std::string& name, const std::string& what) {
      if (!ok) throw InvalidArgument("config field '" + name + "': " + what);
    };
    try {
      family_from_string(manifold);
    } catch (const InvalidArgument&) {
      field(false, "manifold", "expected s4, cp2 or mn");
    }
    field(n >= 1, "n", "must be >= 1");
    field(c > 0 && std::isfinite(c), "c", "must be positive");
    field(plateau > 0 && std::isfinite(plateau), "plateau", "must be positive");
    field(width >= 0 && std::isfinite(width), "width", "must be >= 0");
    field(L >= 0 && std::isfinite(L), "L", "must be >= 0");
    field(slopes == "default" || slopes == "calibrate", "slopes", "expected default or calibrate");
    field(slope_minus >= 0 && slope_plus >= 0, "slope_minus", "must be >= 0");
    field(N >= 8 && N <= 1'000'000, "N", "must be in [8, 1e6]");
    field(flow.cfl > 0 && flow.cfl <= 1, "cfl", "must lie in (0, 1]");
    field(flow.t_end > 0 && std::isfinite(flow.t_end), "t_end", "must be positive");
    field(flow.output_stride >= 1, "stride", "must be >= 1");
    field(flow.max_steps >= 1, "max_steps", "must be >= 1");
    try {
      model_from_string(model);
    } catch (const InvalidArgument&) {
      field(false, "model", "expected round-s4, fubini-study or cylinder");
    }
    field(samples >= 1, "samples", "must be >= 1");
  }
};

namespace detail {

template <typename T>
void read_field(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("config field '") + key + "': wrong type");
  }
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  static const std::vector<std::string> known = {
      "manifold", "n",     "c",      "plateau",   "width",     "L",          "slopes",
      "slope_minus", "slope_plus", "N", "cfl",     "t_end",     "stride",     "ghost_mode",
      "max_steps", "model", "experiment", "out",  "seed",      "samples",    "diagnostics_stride"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument("config field '" + key + "': unknown");
  RunConfig c;
  using detail::read_field;
  read_field(j, "manifold", c.manifold);
  read_field(j, "n", c.n);
  read_field(j, "c", c.c);
  read_field(j, "plateau", c.plateau);
  read_field(j, "width", c.width);
  read_field(j, "L", c.L);
  if (j.contains("slopes") && j["slopes"].is_array()) {
    try {
      c.slope_minus = j["slopes"].at(0).get<double>();
      c.slope_plus = j["slopes"].at(1).get<double>();
    } catch (const json::exception&) {
      throw InvalidArgument("config field 'slopes': expected [minus, plus]");
    }
  } else {
    read_field(j, "slopes", c.slopes);
  }
  read_field(j, "slope_minus", c.slope_minus);
  read_field(j, "slope_plus", c.slope_plus);
  read_field(j, "N", c.N);
  read_field(j, "cfl", c.flow.cfl);
  read_field(j, "t_end", c.flow.t_end);
  read_field(j, "stride", c.flow.output_stride);
  read_field(j, "diagnostics_stride", c.flow.diagnostics_stride);
  read_field(j, "max_steps", c.flow.max_steps);
  std::string ghost = "reflect";
  read_field(j, "ghost_mode", ghost);
  if (ghost == "reflect")
    c.flow.ghost_mode = GhostMode::reflect;
  else if (ghost == "one_sided" || ghost == "one-sided")
    c.flow.ghost_mode = GhostMode::one_sided;
  else
    throw InvalidArgument("config field 'ghost_mode': expected reflect or one_sided");
  read_field(j, "model", c.model);
  read_field(j, "experiment", c.experiment);
  read_field(j, "out", c.out);
  read_field(j, "seed", c.seed);
  read_field(j, "samples", c.samples);
  c.validate();
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// The manifold spec a config describes (slopes applied, L defaulted).
inline ManifoldSpec spec_from_config(const RunConfig& cfg) {
  auto s = ManifoldSpec::make(family_from_string(cfg.manifold), cfg.c, cfg.n);
  if (cfg.slopes == "calibrate" && s.has_poles()) {
    const double lo = 0.25 * cfg.c, hi = 4.0 * cfg.c;
    s.slope_minus = calibrate_slope(s, false, lo, hi);
    s.slope_plus = calibrate_slope(s, true, lo, hi);
  }
  if (cfg.slope_minus > 0) s.slope_minus = cfg.slope_minus;
  if (cfg.slope_plus > 0) s.slope_plus = cfg.slope_plus;
  const double smin = std::min(s.slope_minus, s.slope_plus);
  s.L = cfg.L > 0 ? cfg.L : 20.0 * cfg.plateau / smin;
  s.validate();
  return s;
}

// ---------------------------------------------------------------- SVG

struct Series {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline std::string svg_num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

inline std::string tick_label(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

/// Standalone line plot. Empty input gives the frame and axes only.
inline std::string render_svg(const std::vector<Series>& series, const std::string& title,
                              const std::string& xlabel, const std::string& ylabel) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double W = 640, H = 420, ml = 70, mr = 130, mt = 40, mb = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    const double pad = std::max(1e-12, std::abs(y0) * 0.1);
    y0 -= pad;
    y1 += pad;
  } else {
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
  }
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return mt + (1 - (y - y0) / (y1 - y0)) * ph; };
  using detail::svg_num;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::xml_escape(title) << "</text>\n";
  os << "<g stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\"/>\n</g>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << svg_num(X(xv)) << "\" y=\"" << svg_num(mt + ph + 18)
       << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n";
    os << "<text x=\"" << svg_num(ml - 6) << "\" y=\"" << svg_num(Y(yv) + 4)
       << "\" text-anchor=\"end\">" << detail::tick_label(yv) << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << mt + ph / 2 << ")\">" << detail::xml_escape(ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& S = series[s];
    const char* col = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(S.x.size(), S.y.size()); ++k) {
      if (!std::isfinite(S.x[k]) || !std::isfinite(S.y[k])) continue;
      os << svg_num(X(S.x[k])) << ',' << svg_num(Y(S.y[k])) << ' ';
    }
    os << "\"/>\n";
    const double ly = mt + 16 * (s + 1);
    os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 30
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly << "\">" << detail::xml_escape(S.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// phi, psi, xi against r.
inline std::string render_profiles_svg(const ProfileSet& P, const std::string& title) {
  std::vector<Series> s;
  const auto r = P.grid.nodes();
  for (int a = 1; a <= 3; ++a) s.push_back({profile_name(a), r, P.f[a]});
  return render_svg(s, title, "r", "profile");
}

inline void write_text(const fs::path& path, const std::string& text) {
  auto os = detail::open_out(path);
  os << text;
}

}  // namespace cohomflow
