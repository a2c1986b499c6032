// cohomflow: build, inspect and evolve diagonal cohomogeneity-one metrics.
//
// Exit codes: 0 success or pass, 1 fail verdict, 2 usage or config error,
// 3 numeric failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cohomflow/io.hpp"

using namespace cohomflow;

namespace {

struct Flags {
  std::optional<std::string> manifold, ghost_mode, out, config, model;
  std::optional<int> n, N, stride, samples;
  std::optional<double> c, plateau, width, t_end, cfl;
  std::optional<long> max_steps;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration");
  app->add_option("--manifold", f.manifold, "s4, cp2 or mn");
  app->add_option("--n", f.n, "Mn index (even: S2xS2, odd: CP2#-CP2)");
  app->add_option("--c", f.c, "structure constant");
  app->add_option("--plateau", f.plateau, "plateau constant K");
  app->add_option("--width", f.width, "transition width (default L/4)");
  app->add_option("--N", f.N, "grid nodes");
  app->add_option("--t-end", f.t_end, "final flow time");
  app->add_option("--cfl", f.cfl, "time step safety factor in (0,1]");
  app->add_option("--stride", f.stride, "snapshot every this many steps");
  app->add_option("--ghost-mode", f.ghost_mode, "reflect or one_sided");
  app->add_option("--max-steps", f.max_steps, "step limit");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "seed for plane sampling");
  app->add_option("--model", f.model, "round-s4, fubini-study or cylinder");
  app->add_option("--samples", f.samples, "sampled planes per node");
}

RunConfig resolve(const Flags& f) {
  json j = json::object();
  if (f.config) {
    std::ifstream is(*f.config);
    if (!is) throw InvalidArgument("cannot open config '" + *f.config + "'");
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw InvalidArgument("config '" + *f.config + "' is not valid JSON: " + e.what());
    }
  }
  if (const char* env = std::getenv("COHOMFLOW_OUT"); env && *env) j["out"] = env;
  if (f.manifold) j["manifold"] = *f.manifold;
  if (f.n) j["n"] = *f.n;
  if (f.c) j["c"] = *f.c;
  if (f.plateau) j["plateau"] = *f.plateau;
  if (f.width) j["width"] = *f.width;
  if (f.N) j["N"] = *f.N;
  if (f.t_end) j["t_end"] = *f.t_end;
  if (f.cfl) j["cfl"] = *f.cfl;
  if (f.stride) j["stride"] = *f.stride;
  if (f.ghost_mode) j["ghost_mode"] = *f.ghost_mode;
  if (f.max_steps) j["max_steps"] = *f.max_steps;
  if (f.out) j["out"] = *f.out;
  if (f.seed) j["seed"] = *f.seed;
  if (f.model) j["model"] = *f.model;
  if (f.samples) j["samples"] = *f.samples;
  return config_from_json(j);
}

ProfileSet initial_metric(const RunConfig& cfg, bool use_model) {
  if (use_model) {
    const auto m = model_from_string(cfg.model);
    const double L = m == ModelMetric::ProductCylinder ? (cfg.L > 0 ? cfg.L : 1.0) : model_length(m);
    return build_model_metric(m, Grid(cfg.N, L), cfg.c, cfg.plateau);
  }
  const auto spec = spec_from_config(cfg);
  const double w = cfg.width > 0 ? cfg.width : spec.L / 4;
  return build_grove_ziller(spec, cfg.plateau, w, Grid(cfg.N, spec.L));
}

MinSecOptions minsec_options(const RunConfig& cfg) {
  MinSecOptions o;
  o.samples = cfg.samples;
  o.seed = cfg.seed;
  return o;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::pass: return 0;
    case Verdict::fail: return 1;
    case Verdict::inconclusive: return 3;
  }
  return 3;
}

void print_report(const ExperimentReport& r) {
  std::cout << r.experiment << " " << r.spec.name() << " N=" << r.N << ": " << to_string(r.verdict)
            << "\n";
  for (const auto& s : r.scalars) {
    std::cout << "  " << s.name << " = " << s.value;
    if (std::isfinite(s.tolerance)) std::cout << "  (tol " << s.tolerance << (s.ok ? ", ok" : ", FAIL") << ")";
    std::cout << "\n";
  }
  if (!r.note.empty()) std::cout << "  note: " << r.note << "\n";
}

int cmd_build(const RunConfig& cfg, bool use_model) {
  const auto P = initial_metric(cfg, use_model);
  const fs::path out(cfg.out);
  write_profiles_csv(out / "profiles.csv", P);
  write_text(out / "profiles.svg", render_profiles_svg(P, P.spec.name() + " initial profiles"));
  if (P.spec.has_poles()) {
    const auto sm = check_smoothness(P);
    for (bool plus : {false, true}) {
      const auto& e = plus ? sm.plus : sm.minus;
      std::cout << (plus ? "r=L" : "r=0") << ": slope " << e.slope << ", pole equality "
                << e.pole_equality << ", parity " << e.parity << (e.flagged() ? "  FLAGGED" : "")
                << "\n";
    }
  }
  std::cout << "wrote " << (out / "profiles.csv").string() << "\n";
  return 0;
}

int cmd_curvature(const RunConfig& cfg, bool use_model) {
  const auto P = initial_metric(cfg, use_model);
  const fs::path out(cfg.out);
  write_curvature_csv(out / "curvature.csv", P, cfg.flow.ghost_mode);
  const auto g = min_sec_global(P, minsec_options(cfg));
  std::cout << "min sec " << g.value << " at node " << g.node << " (r = " << P.grid.r(g.node) << ")\n";
  std::cout << "wrote " << (out / "curvature.csv").string() << "\n";
  return 0;
}

int cmd_evolve(const RunConfig& cfg, bool use_model) {
  const auto P = initial_metric(cfg, use_model);
  const auto tr = evolve(P, cfg.flow);
  const fs::path out(cfg.out);
  write_trace(out, tr);
  Series ms{"min sec", {}, {}};
  for (const auto& s : tr.steps)
    if (!std::isnan(s.minsec)) {
      ms.x.push_back(s.t);
      ms.y.push_back(s.minsec);
    }
  write_text(out / "minsec.svg", render_svg({ms}, "global min sec", "t", "min sec"));
  write_text(out / "profiles_final.svg",
             render_profiles_svg(tr.final_state(), "profiles at t = " + std::to_string(tr.t_final())));
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "stopped: " << to_string(tr.stop) << " at t = " << tr.t_final() << " after "
            << tr.steps.size() - 1 << " steps\n";
  if (!tr.stop_detail.empty()) std::cout << "  " << tr.stop_detail << "\n";
  return tr.stop == StopReason::nonfinite_rhs ? 3 : 0;
}

int cmd_theorem(const RunConfig& cfg) {
  const auto spec = spec_from_config(cfg);
  TheoremParams p;
  p.plateau = cfg.plateau;
  p.width = cfg.width;
  p.N = cfg.N;
  p.t_end = cfg.flow.t_end;
  p.cfl = cfg.flow.cfl;
  p.ghost_mode = cfg.flow.ghost_mode;
  p.minsec = minsec_options(cfg);
  auto run = theorem_check(spec, p);
  auto& r = run.report;
  const fs::path out(cfg.out);
  write_text(out / "profiles.svg", render_profiles_svg(run.initial, spec.name() + " Grove-Ziller profiles"));
  r.artifacts.push_back((out / "profiles.svg").string());
  if (!r.series_t.empty()) {
    write_text(out / "sec_r0.svg",
               render_svg({{"sec(e0^e" + std::to_string(run.axis) + ") at r0", r.series_t, r.series_sec}},
                          "radial plateau plane at r0", "t", "sec"));
    write_diagnostics_csv(out / "diagnostics.csv", run.trace);
    r.artifacts.push_back((out / "sec_r0.svg").string());
    r.artifacts.push_back((out / "diagnostics.csv").string());
  }
  write_report(out / "report.json", r);
  print_report(r);
  return exit_for(r.verdict);
}

int cmd_einstein(const RunConfig& cfg) {
  const auto m = model_from_string(cfg.model);
  auto run = einstein_regression(m, cfg.c, cfg.flow.t_end, cfg.N, cfg.plateau, cfg.flow.cfl);
  const fs::path out(cfg.out);
  write_diagnostics_csv(out / "diagnostics.csv", run.trace);
  run.report.artifacts.push_back((out / "diagnostics.csv").string());
  write_report(out / "report.json", run.report);
  print_report(run.report);
  return exit_for(run.report.verdict);
}

int cmd_identity(const RunConfig& cfg) {
  const auto spec = spec_from_config(cfg);
  TheoremParams p;
  p.plateau = cfg.plateau;
  p.width = cfg.width;
  p.N = cfg.N;
  p.t_end = cfg.flow.t_end;
  p.cfl = cfg.flow.cfl;
  p.ghost_mode = cfg.flow.ghost_mode;
  p.sample_initial_minsec = false;
  auto run = theorem_check(spec, p);
  ExperimentReport r;
  r.experiment = "integral-identity";
  r.spec = spec;
  r.N = cfg.N;
  r.t_end = cfg.flow.t_end;
  if (run.trace.snapshots.size() < 3) {
    r.note = "flow produced too few snapshots: " + run.report.note;
  } else {
    for (int a : spec.noncollapsing_axes()) {
      const double res = integral_identity(run.trace, a, 10, cfg.flow.ghost_mode);
      r.add("residual_axis_" + std::to_string(a), res, 1e-2, res < 1e-2);
    }
    for (const auto& m : midregion_sign(run.trace))
      r.add("midregion_max_sec_axis_" + std::to_string(m.axis), m.max_sec);
    r.verdict = r.all_ok() ? Verdict::pass : Verdict::fail;
  }
  write_report(fs::path(cfg.out) / "report.json", r);
  print_report(r);
  return exit_for(r.verdict);
}

int cmd_calibrate(const RunConfig& cfg) {
  auto spec = ManifoldSpec::make(family_from_string(cfg.manifold), cfg.c, cfg.n);
  const double lo = 0.25 * cfg.c, hi = 4.0 * cfg.c;
  for (bool plus : {false, true})
    std::cout << (plus ? "slope_plus " : "slope_minus ") << calibrate_slope(spec, plus, lo, hi) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagonal cohomogeneity-one Ricci flow on S4, CP2 and Mn"};
  app.require_subcommand(1);
  Flags f;
  bool use_model = false;
  auto* build = app.add_subcommand("build", "write initial profiles (CSV, SVG)");
  auto* curv = app.add_subcommand("curvature", "frame curvature and min sec of the initial metric");
  auto* evol = app.add_subcommand("evolve", "run the flow and write snapshots and diagnostics");
  auto* thm = app.add_subcommand("check-theorem", "Grove-Ziller metric loses sec >= 0");
  auto* ein = app.add_subcommand("check-einstein", "homothety regression for a model metric");
  auto* ident = app.add_subcommand("check-identity", "integral identity for noncollapsing axes");
  auto* cal = app.add_subcommand("calibrate", "bisect the smooth collapse slopes");
  for (auto* s : {build, curv, evol, thm, ein, ident, cal}) add_common(s, f);
  for (auto* s : {build, curv, evol})
    s->add_flag("--use-model", use_model, "start from --model instead of a Grove-Ziller metric");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    const auto cfg = resolve(f);
    if (*build) return cmd_build(cfg, use_model);
    if (*curv) return cmd_curvature(cfg, use_model);
    if (*evol) return cmd_evolve(cfg, use_model);
    if (*thm) return cmd_theorem(cfg);
    if (*ein) return cmd_einstein(cfg);
    if (*ident) return cmd_identity(cfg);
    if (*cal) return cmd_calibrate(cfg);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
