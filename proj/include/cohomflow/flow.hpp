#pragma once

// Method-of-lines Ricci flow for the diagonal cohomogeneity-one Ansatz:
// f_t = -f Ric_ff on the orthonormal frame, f in {zeta, phi, psi, xi},
// classical RK4 in time.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cohomflow/curvature.hpp"
#include "cohomflow/profiles.hpp"

namespace cohomflow {

struct FlowOptions {
  double cfl = 0.9;
  double t_end = 1e-3;
  int output_stride = 10;
  GhostMode ghost_mode = GhostMode::reflect;
  long max_steps = 10'000'000;
  // Steps between min-sec evaluations (the other diagnostics are per step).
  int diagnostics_stride = 1;

  void validate() const {
    require(cfl > 0 && cfl <= 1, "cfl must lie in (0, 1]");
    require(t_end > 0 && std::isfinite(t_end), "t_end must be positive");
    require(output_stride >= 1, "output_stride must be >= 1");
    require(max_steps >= 1, "max_steps must be >= 1");
    require(diagnostics_stride >= 1, "diagnostics_stride must be >= 1");
  }
};

using ProfileRates = std::array<std::vector<double>, 4>;

/// Time derivatives of (zeta, phi, psi, xi) at every node: -f_a Ric_aa.
inline ProfileRates flow_rhs(const ProfileSet& P, GhostMode mode = GhostMode::reflect) {
  const auto jets = node_jets(P, mode);
  ProfileRates out;
  for (auto& v : out) v.resize(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const auto ric = ricci_closed_form(jets[i], P.spec.c);
    for (int a = 0; a < 4; ++a) {
      const double v = -jets[i].f[a] * ric[a];
      if (!std::isfinite(v))
        throw NumericFailure("nonfinite " + std::string(profile_name(a)) + "_t at node " +
                             std::to_string(i) + " (r = " + std::to_string(P.grid.r(i)) + ")");
      out[a][i] = v;
    }
  }
  return out;
}

/// Stable explicit step: cfl * min over nodes of the diffusion cap h^2 zeta^2 / 8
/// and the reaction cap phi psi xi / (8 c^2 max(phi, psi, xi)), i.e. the product
/// of the two smaller profiles over 8 c^2.
inline double stable_dt(const ProfileSet& P, double cfl) {
  const double h = P.grid.h();
  double dt = std::numeric_limits<double>::infinity();
  for (int i = 0; i < P.grid.N; ++i) {
    const double z = P.f[0][i], a = P.f[1][i], b = P.f[2][i], d = P.f[3][i];
    const double diff = h * h * z * z / 8.0;
    const double reac = a * b * d / (8.0 * sqr(P.spec.c) * std::max({a, b, d}));
    dt = std::min({dt, diff, reac});
  }
  return cfl * dt;
}

struct StepRecord {
  long step = 0;
  double t = 0;
  double dt = 0;
  double max_rhs = 0;
  double minsec = std::numeric_limits<double>::quiet_NaN();  // NaN between diagnostics steps
  int minsec_node = -1;
  double slope_res_minus = 0, slope_res_plus = 0;
  double equality_res_minus = 0, equality_res_plus = 0;
};

enum class StopReason { completed, near_collapse, nonfinite_rhs };

inline std::string to_string(StopReason s) {
  switch (s) {
    case StopReason::completed: return "completed";
    case StopReason::near_collapse: return "near_collapse";
    case StopReason::nonfinite_rhs: return "nonfinite_rhs";
  }
  return "?";
}

struct FlowTrace {
  std::vector<ProfileSet> snapshots;  // t strictly increasing; first is t = 0
  std::vector<StepRecord> steps;      // one per accepted step, plus the t = 0 record
  StopReason stop = StopReason::completed;
  std::string stop_detail;
  std::vector<std::string> warnings;

  const ProfileSet& final_state() const { return snapshots.back(); }
  double t_final() const { return snapshots.back().t; }
};

namespace detail {

inline double max_abs(const ProfileRates& k) {
  double m = 0;
  for (const auto& v : k)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline ProfileSet axpy(const ProfileSet& P, double dt, const ProfileRates& k) {
  ProfileSet Q = P;
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < P.grid.N; ++i) Q.f[a][i] += dt * k[a][i];
  return Q;
}

inline StepRecord record_for(const ProfileSet& P, long step, double dt, double max_rhs,
                             bool with_minsec, GhostMode mode) {
  StepRecord r;
  r.step = step;
  r.t = P.t;
  r.dt = dt;
  r.max_rhs = max_rhs;
  const auto sm = check_smoothness(P);
  r.slope_res_minus = sm.minus.slope;
  r.slope_res_plus = sm.plus.slope;
  r.equality_res_minus = sm.minus.pole_equality;
  r.equality_res_plus = sm.plus.pole_equality;
  if (with_minsec) {
    const auto [m, node] = min_sec_global_thorpe(curvature_field(P, mode));
    r.minsec = m;
    r.minsec_node = node;
  }
  return r;
}

// Smallest allowed profile value: 1e-3 h times the collapse slope.
inline double collapse_floor(const ProfileSet& P) {
  double s = 1.0;
  if (P.spec.has_poles()) s = std::min(P.spec.slope_minus, P.spec.slope_plus);
  return 1e-3 * P.grid.h() * s;
}

}  // namespace detail

/// Integrate from P0 to opts.t_end. The last step is shortened to land on
/// t_end exactly. Stops early (recorded in the trace) on near-collapse or a
/// nonfinite right-hand side; throws NumericFailure on a nonfinite state or
/// when max_steps is exhausted.
inline FlowTrace evolve(const ProfileSet& P0, const FlowOptions& opts) {
  opts.validate();
  require(P0.all_positive(), "initial profiles must be positive and finite");
  FlowTrace trace;
  ProfileSet P = P0;
  P.exact.reset();  // evolved states are differenced on the grid throughout
  const auto sm0 = check_smoothness(P);
  if (sm0.flagged())
    trace.warnings.push_back("initial data fails the pole smoothness check");

  const double floor = detail::collapse_floor(P);
  trace.snapshots.push_back(P);
  ProfileRates k1;
  try {
    k1 = flow_rhs(P, opts.ghost_mode);
  } catch (const NumericFailure& e) {
    trace.stop = StopReason::nonfinite_rhs;
    trace.stop_detail = e.what();
    return trace;
  }
  trace.steps.push_back(detail::record_for(P, 0, 0.0, detail::max_abs(k1), true, opts.ghost_mode));

  long step = 0;
  while (P.t < opts.t_end) {
    if (step >= opts.max_steps)
      throw NumericFailure("max_steps (" + std::to_string(opts.max_steps) + ") exceeded at t = " +
                           std::to_string(P.t));
    double dt = stable_dt(P, opts.cfl);
    if (!(dt > 0) || !std::isfinite(dt))
      throw NumericFailure("nonpositive time step at t = " + std::to_string(P.t));
    const bool last = P.t + dt >= opts.t_end * (1 - 1e-14);
    if (last) dt = opts.t_end - P.t;
    ProfileSet next;
    try {
      const auto k2 = flow_rhs(detail::axpy(P, 0.5 * dt, k1), opts.ghost_mode);
      const auto k3 = flow_rhs(detail::axpy(P, 0.5 * dt, k2), opts.ghost_mode);
      const auto k4 = flow_rhs(detail::axpy(P, dt, k3), opts.ghost_mode);
      next = P;
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < P.grid.N; ++i)
          next.f[a][i] += dt / 6.0 * (k1[a][i] + 2 * k2[a][i] + 2 * k3[a][i] + k4[a][i]);
    } catch (const NumericFailure& e) {
      trace.stop = StopReason::nonfinite_rhs;
      trace.stop_detail = e.what();
      break;
    }
    next.t = last ? opts.t_end : P.t + dt;
    ++step;
    for (const auto& v : next.f)
      for (double x : v)
        if (!std::isfinite(x))
          throw NumericFailure("nonfinite state at t = " + std::to_string(next.t));
    P = std::move(next);

    double lowest = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= 3; ++a)
      for (double x : P.f[a]) lowest = std::min(lowest, x);
    const bool collapsed = lowest < floor;

    double max_rhs = 0;
    bool rhs_ok = true;
    try {
      k1 = flow_rhs(P, opts.ghost_mode);
      max_rhs = detail::max_abs(k1);
    } catch (const NumericFailure& e) {
      rhs_ok = false;
      trace.stop = StopReason::nonfinite_rhs;
      trace.stop_detail = e.what();
      max_rhs = std::numeric_limits<double>::infinity();
    }
    const bool done = P.t >= opts.t_end || collapsed || !rhs_ok;
    const bool diag = step % opts.diagnostics_stride == 0 || done;
    trace.steps.push_back(
        detail::record_for(P, step, dt, max_rhs, diag && !collapsed && rhs_ok, opts.ghost_mode));
    if (step % opts.output_stride == 0 || done) trace.snapshots.push_back(P);
    if (collapsed) {
      trace.stop = StopReason::near_collapse;
      trace.stop_detail = "profile minimum " + std::to_string(lowest) + " below " +
                          std::to_string(floor) + " at t = " + std::to_string(P.t);
      break;
    }
    if (!rhs_ok) break;
  }
  return trace;
}

}  // namespace cohomflow
