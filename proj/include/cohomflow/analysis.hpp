#pragma once

// Experiments on flow traces: loss of sec >= 0 from Grove-Ziller data, the
// first-variation formula for the radial plateau planes, the integral
// identity for noncollapsing directions, Einstein regressions and grid
// refinement.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cohomflow/flow.hpp"

namespace cohomflow {

enum class Verdict { pass, fail, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// A named number and the tolerance it was judged against (NaN if the
/// number is informational).
struct ScalarResult {
  std::string name;
  double value = 0;
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  bool ok = true;
};

struct ExperimentReport {
  std::string experiment;
  ManifoldSpec spec;
  int N = 0;
  double t_end = 0;
  double r0 = std::numeric_limits<double>::quiet_NaN();
  double sec_slope_numeric = std::numeric_limits<double>::quiet_NaN();
  double sec_slope_analytic = std::numeric_limits<double>::quiet_NaN();
  double min_sec_t0 = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> first_negative_t;
  Verdict verdict = Verdict::inconclusive;
  std::vector<ScalarResult> scalars;
  std::vector<std::string> artifacts;
  std::string note;
  // sec of the monitored plane at r0 against time.
  std::vector<double> series_t, series_sec;

  void add(std::string name, double value, double tol = std::numeric_limits<double>::quiet_NaN(),
           bool ok = true) {
    scalars.push_back({std::move(name), value, tol, ok});
  }
  bool all_ok() const {
    return std::all_of(scalars.begin(), scalars.end(), [](const auto& s) { return s.ok; });
  }
};

/// Axis of the monitored radial plane: the first index that does not
/// collapse at r = 0.
inline int theorem_axis(const ManifoldSpec& spec) {
  for (int a = 1; a <= 3; ++a)
    if (a != spec.collapse_minus) return a;
  return 2;
}

/// d/dt sec(e0 ^ e_axis) at t = 0 predicted from the flow equations when
/// zeta = 1 and the noncollapsing profiles are equal and constant near node i:
/// -c^2 (f_r^2 + f f_rr) / K^4 with f the profile collapsing at r = 0 and K
/// the axis value. Throws if the constancy window (5 nodes either side) fails.
inline double first_variation_radial(const ProfileSet& P0, int i, int axis) {
  const auto& S = P0.spec;
  require(S.has_poles(), "first variation needs a collapsing profile");
  require(i >= 0 && i < P0.grid.N, "node index out of range");
  const int k = S.collapse_minus;
  require(axis >= 1 && axis <= 3 && axis != k, "axis must be a noncollapsing index");
  int other = 0;
  for (int a = 1; a <= 3; ++a)
    if (a != k && a != axis) other = a;
  const double K = P0.f[axis][i];
  const double tol = 1e-12 * std::max(1.0, std::abs(K));
  for (int j = std::max(0, i - 5); j <= std::min(P0.grid.N - 1, i + 5); ++j) {
    require(std::abs(P0.f[0][j] - 1.0) <= tol, "first variation needs zeta = 1 near node " +
                                                    std::to_string(i));
    require(std::abs(P0.f[axis][j] - K) <= tol && std::abs(P0.f[other][j] - K) <= tol,
            "noncollapsing profiles are not equal and constant within 5 nodes of node " +
                std::to_string(i));
  }
  auto Q = P0;
  Q.exact.reset();
  const auto J = node_jets(Q)[i];
  const double c = S.c;
  return -c * c * (sqr(J.d1[k]) + J.f[k] * J.d2[k]) / std::pow(K, 4);
}

/// d/dt at t = 0 of a sampled series by least-squares polynomial fit
/// (degree min(3, n-2)) over the first `count` samples.
inline double initial_rate(const std::vector<double>& t, const std::vector<double>& y, int count) {
  const int n = std::min<int>(count, static_cast<int>(t.size()));
  require(n >= 3, "need at least three samples for an initial rate");
  const int deg = std::min(3, n - 2);
  const double scale = t[n - 1] > 0 ? t[n - 1] : 1.0;
  Eigen::MatrixXd A(n, deg + 1);
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) {
    const double s = t[k] / scale;
    for (int m = 0; m <= deg; ++m) A(k, m) = std::pow(s, m);
    b(k) = y[k];
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  return x(1) / scale;
}

/// sec(e0 ^ e_axis) at node i for every snapshot.
inline std::vector<double> radial_series(const FlowTrace& tr, int i, int axis,
                                         GhostMode mode = GhostMode::reflect) {
  std::vector<double> out;
  out.reserve(tr.snapshots.size());
  for (const auto& S : tr.snapshots) out.push_back(curvature_field(S, mode)[i].sec(0, axis));
  return out;
}

struct TheoremParams {
  double plateau = 1.0;
  double width = 0;  // 0 = L/4
  int N = 400;
  double t_end = 1e-3;
  double cfl = 0.9;
  GhostMode ghost_mode = GhostMode::reflect;
  MinSecOptions minsec;
  int slope_samples = 10;  // snapshots used for the initial rate
  bool sample_initial_minsec = true;
};

struct TheoremRun {
  ExperimentReport report;
  ProfileSet initial;
  FlowTrace trace;
  int node = -1;
  int axis = 0;
};

/// Build the Grove-Ziller metric for `spec`, certify sec >= 0, evolve, and
/// compare the flow of sec(e0 ^ e_axis) at r0 with the first-variation formula.
inline TheoremRun theorem_check(const ManifoldSpec& spec, const TheoremParams& prm) {
  TheoremRun run;
  auto& rep = run.report;
  rep.experiment = "theorem";
  rep.spec = spec;
  rep.N = prm.N;
  rep.t_end = prm.t_end;
  const double K = prm.plateau;
  const double unit = 1.0 / (K * K);
  const Grid grid(prm.N, spec.L);
  const double width = prm.width > 0 ? prm.width : spec.L / 4;
  run.initial = build_grove_ziller(spec, K, width, grid);
  const auto& P0 = run.initial;

  // Certify nonnegativity of the initial data.
  const auto field0 = curvature_field(P0);
  const double thorpe0 = min_sec_global_thorpe(field0).first;
  double sampled0 = thorpe0;
  if (prm.sample_initial_minsec) sampled0 = min_sec_global(P0, prm.minsec).value;
  rep.min_sec_t0 = std::min(sampled0, thorpe0);
  rep.add("min_sec_t0_sampled", sampled0, -1e-6 * unit, sampled0 >= -1e-6 * unit);
  rep.add("min_sec_t0_thorpe", thorpe0, -1e-6 * unit, thorpe0 >= -1e-6 * unit);

  // r0: first node with f < 0.1 K and f_r > 0.5 s0 for the collapsing f.
  const int k = spec.collapse_minus;
  const int axis = theorem_axis(spec);
  run.axis = axis;
  const double s0 = spec.slope_minus;
  int node = -1;
  for (int i = 0; i < grid.N; ++i)
    if (P0.f[k][i] < 0.1 * K && P0.exact->d1[k][i] > 0.5 * s0) {
      node = i;
      break;
    }
  if (node < 0) {
    rep.note = "no node satisfies the r0 selection rule";
    return run;
  }
  run.node = node;
  rep.r0 = grid.r(node);
  rep.sec_slope_analytic = first_variation_radial(P0, node, axis);

  FlowOptions fo;
  fo.t_end = prm.t_end;
  fo.cfl = prm.cfl;
  fo.output_stride = 1;
  fo.ghost_mode = prm.ghost_mode;
  try {
    run.trace = evolve(P0, fo);
  } catch (const NumericFailure& e) {
    rep.note = std::string("flow failed: ") + e.what();
    return run;
  }
  const auto& tr = run.trace;
  for (const auto& S : tr.snapshots) rep.series_t.push_back(S.t);
  rep.series_sec = radial_series(tr, node, axis, prm.ghost_mode);
  for (std::size_t s = 0; s < rep.series_sec.size(); ++s)
    if (rep.series_sec[s] < -1e-8 * unit) {
      rep.first_negative_t = rep.series_t[s];
      break;
    }
  if (rep.series_t.size() >= 3)
    rep.sec_slope_numeric = initial_rate(rep.series_t, rep.series_sec, prm.slope_samples);

  const double rel = std::abs(rep.sec_slope_numeric - rep.sec_slope_analytic) /
                     std::abs(rep.sec_slope_analytic);
  rep.add("sec_r0_initial", rep.series_sec.front());
  rep.add("sec_r0_final", rep.series_sec.back(), -1e-8 * unit, rep.series_sec.back() < -1e-8 * unit);
  rep.add("slope_relative_error", rel, 0.1, rel <= 0.1);
  rep.add("analytic_slope_negative", rep.sec_slope_analytic, 0.0, rep.sec_slope_analytic < 0);
  if (tr.stop != StopReason::completed) {
    rep.note = "flow stopped early: " + tr.stop_detail;
    rep.verdict = Verdict::inconclusive;
    return run;
  }
  rep.verdict = (rep.all_ok() && rep.first_negative_t) ? Verdict::pass : Verdict::fail;
  return run;
}

/// Normalized residual |int d/dt sec(e0 ^ e_axis) zeta dr| / int |...| zeta dr at t = 0.
inline double integral_identity(const FlowTrace& tr, int axis, int samples = 10,
                                GhostMode mode = GhostMode::reflect) {
  const auto& P0 = tr.snapshots.front();
  const auto& S = P0.spec;
  require(axis >= 1 && axis <= 3, "axis must be in {1,2,3}");
  if (S.has_poles())
    require(axis != S.collapse_minus && axis != S.collapse_plus,
            "axis " + std::to_string(axis) + " collapses at a singular orbit");
  const int n = std::min<int>(samples, static_cast<int>(tr.snapshots.size()));
  require(n >= 3, "integral identity needs at least three snapshots");
  const int N = P0.grid.N;
  std::vector<double> t(n);
  std::vector<std::vector<double>> sec(N, std::vector<double>(n));
  for (int s = 0; s < n; ++s) {
    t[s] = tr.snapshots[s].t;
    const auto field = curvature_field(tr.snapshots[s], mode);
    for (int i = 0; i < N; ++i) sec[i][s] = field[i].sec(0, axis);
  }
  double num = 0, den = 0;
  const double h = P0.grid.h();
  for (int i = 0; i < N; ++i) {
    const double rate = initial_rate(t, sec[i], n);
    num += rate * P0.f[0][i] * h;
    den += std::abs(rate) * P0.f[0][i] * h;
  }
  require(den > 0, "integrand vanishes identically");
  return std::abs(num) / den;
}

struct MidregionPlane {
  int axis = 0;
  bool initially_flat = false;
  double sec_at_mid = 0;  // at the node nearest L/2, final snapshot
  double max_sec = 0;     // over initially flat nodes in [L/8, 7L/8]
  double min_sec = 0;
  double r_at_max = 0;
};

/// Signs of sec(e0 ^ e_i) at the final snapshot away from the poles, for the
/// radial planes that are flat at t = 0. Exploratory; no verdict.
inline std::vector<MidregionPlane> midregion_sign(const FlowTrace& tr,
                                                  GhostMode mode = GhostMode::reflect) {
  const auto& P0 = tr.snapshots.front();
  const auto f0 = curvature_field(P0, mode);
  const auto f1 = curvature_field(tr.final_state(), mode);
  const int N = P0.grid.N;
  const double L = P0.grid.L;
  int mid = 0;
  for (int i = 0; i < N; ++i)
    if (std::abs(P0.grid.r(i) - 0.5 * L) < std::abs(P0.grid.r(mid) - 0.5 * L)) mid = i;
  std::vector<MidregionPlane> out;
  for (int a = 1; a <= 3; ++a) {
    MidregionPlane m;
    m.axis = a;
    m.sec_at_mid = f1[mid].sec(0, a);
    m.max_sec = -std::numeric_limits<double>::infinity();
    m.min_sec = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      const double r = P0.grid.r(i);
      if (r < L / 8 || r > 7 * L / 8 || std::abs(f0[i].sec(0, a)) > 1e-10) continue;
      m.initially_flat = true;
      const double v = f1[i].sec(0, a);
      if (v > m.max_sec) {
        m.max_sec = v;
        m.r_at_max = r;
      }
      m.min_sec = std::min(m.min_sec, v);
    }
    out.push_back(m);
  }
  return out;
}

/// Einstein constant of a model metric; 0 for the cylinder (not Einstein).
inline double einstein_constant(ModelMetric m) {
  switch (m) {
    case ModelMetric::RoundS4: return 3.0;
    case ModelMetric::FubiniStudy: return 6.0;
    case ModelMetric::ProductCylinder: return 0.0;
  }
  return 0.0;
}

struct EinsteinRun {
  ExperimentReport report;
  FlowTrace trace;
};

/// Evolve a model metric and compare with its exact solution: the homothety
/// sqrt(1 - 2 Lambda t) f(0) for Einstein models, f^2 = K^2 - c^2 t and
/// constant zeta for the cylinder.
inline EinsteinRun einstein_regression(ModelMetric model, double c, double t_end, int N,
                                       double cylinder_radius = 1.0, double cfl = 0.9) {
  EinsteinRun run;
  auto& rep = run.report;
  rep.experiment = "einstein-" + to_string(model);
  const double L = model == ModelMetric::ProductCylinder ? 1.0 : model_length(model);
  const auto P0 = build_model_metric(model, Grid(N, L), c, cylinder_radius);
  rep.spec = P0.spec;
  rep.N = N;
  rep.t_end = t_end;
  FlowOptions fo;
  fo.t_end = t_end;
  fo.cfl = cfl;
  // About 100 snapshots and min-sec samples over the horizon.
  const double dt = stable_dt(P0, cfl);
  const int stride = std::max(1, static_cast<int>(t_end / dt / 100));
  fo.output_stride = stride;
  fo.diagnostics_stride = stride;
  try {
    run.trace = evolve(P0, fo);
  } catch (const NumericFailure& e) {
    rep.note = std::string("flow failed: ") + e.what();
    return run;
  }
  const auto& tr = run.trace;
  const double Lam = einstein_constant(model);
  double dev = 0, zeta_spread = 0;
  for (const auto& S : tr.snapshots) {
    double zmin = S.f[0][0], zmax = S.f[0][0];
    for (int i = 0; i < N; ++i) {
      zmin = std::min(zmin, S.f[0][i]);
      zmax = std::max(zmax, S.f[0][i]);
      for (int a = 0; a < 4; ++a) {
        double expect = 0;
        if (model == ModelMetric::ProductCylinder)
          expect = a == 0 ? 1.0 : std::sqrt(sqr(cylinder_radius) - c * c * S.t);
        else
          expect = std::sqrt(1 - 2 * Lam * S.t) * P0.f[a][i];
        dev = std::max(dev, std::abs(S.f[a][i] - expect) / std::abs(expect));
      }
    }
    zeta_spread = std::max(zeta_spread, (zmax - zmin) / zmax);
  }
  const double tol = model == ModelMetric::ProductCylinder ? 1e-6 : 1e-3;
  rep.add("max_relative_deviation", dev, tol, dev <= tol);
  rep.add("zeta_spatial_spread", zeta_spread, 1e-6, zeta_spread <= 1e-6);
  if (Lam > 0) {
    double ms_dev = 0;
    const double m0 = tr.steps.front().minsec;
    for (const auto& s : tr.steps) {
      if (std::isnan(s.minsec)) continue;
      const double expect = m0 / (1 - 2 * Lam * s.t);
      ms_dev = std::max(ms_dev, std::abs(s.minsec - expect) / std::abs(expect));
    }
    rep.add("minsec_homothety_deviation", ms_dev, 1e-3, ms_dev <= 1e-3);
    rep.min_sec_t0 = m0;
  }
  if (tr.stop != StopReason::completed) {
    rep.note = "flow stopped early: " + tr.stop_detail;
    rep.verdict = Verdict::inconclusive;
    return run;
  }
  rep.verdict = rep.all_ok() ? Verdict::pass : Verdict::fail;
  return run;
}

struct RefinementOrder {
  double diff_coarse = 0;  // max |u_N - u_2N| at the coarse nodes
  double diff_fine = 0;    // max |u_2N - u_4N| at the coarse nodes
  double order = 0;        // log2(diff_coarse / diff_fine)
};

namespace detail {

// Value of a profile at the midpoint between storage nodes m and m+1 of the
// extended array, by six-point Lagrange interpolation.
inline double midpoint_value(const ExtendedProfiles& E, int a, int m) {
  const auto& u = E.f[a];
  const int k = m + E.width;
  return (3 * u[k - 2] - 25 * u[k - 1] + 150 * u[k] + 150 * u[k + 1] - 25 * u[k + 2] +
          3 * u[k + 3]) /
         256.0;
}

// Profile a of P (grid N * 2^levels) at the nodes of the grid with N nodes.
inline std::vector<double> restrict_to_coarse(const ProfileSet& P, int a, int levels) {
  ProfileSet Q = P;
  Q.exact.reset();
  for (int l = 0; l < levels; ++l) {
    const int n = Q.grid.N;
    const auto E = boundary_extend(Q, 3);
    ProfileSet R = ProfileSet::allocate(Grid(n / 2, Q.grid.L), Q.spec);
    // Coarse node j sits midway between fine nodes 2j and 2j+1.
    for (int b = 0; b < 4; ++b)
      for (int j = 0; j < n / 2; ++j) R.f[b][j] = midpoint_value(E, b, 2 * j);
    Q = std::move(R);
  }
  return Q.f[a];
}

}  // namespace detail

/// Observed convergence order of profile a from solutions on N, 2N and 4N
/// nodes, compared at the N-grid nodes. Finer solutions are moved to the
/// coarse nodes by sixth-order interpolation across the staggered offsets.
inline RefinementOrder refinement_order(const ProfileSet& coarse, const ProfileSet& mid,
                                        const ProfileSet& fine, int a) {
  const int N = coarse.grid.N;
  require(mid.grid.N == 2 * N && fine.grid.N == 4 * N, "grids must be N, 2N, 4N");
  const auto u1 = coarse.f[a];
  const auto u2 = detail::restrict_to_coarse(mid, a, 1);
  const auto u4 = detail::restrict_to_coarse(fine, a, 2);
  RefinementOrder out;
  for (int i = 0; i < N; ++i) {
    out.diff_coarse = std::max(out.diff_coarse, std::abs(u1[i] - u2[i]));
    out.diff_fine = std::max(out.diff_fine, std::abs(u2[i] - u4[i]));
  }
  out.order = std::log2(out.diff_coarse / out.diff_fine);
  return out;
}

}  // namespace cohomflow
