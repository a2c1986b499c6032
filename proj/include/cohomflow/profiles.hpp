#pragma once

// Initial metric data: model metrics, Grove-Ziller plateau metrics, pole
// smoothness diagnostics and slope calibration.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "cohomflow/curvature.hpp"
#include "cohomflow/manifold.hpp"

namespace cohomflow {

struct TransitionValue {
  double value = 0, d1 = 0, d2 = 0, d3 = 0;
};

namespace detail {

// Smooth step H: [0,1] -> [0,1] from exp(-1/x), flat to all orders at both ends,
// with H(y) + H(1-y) = 1. Returns H, H', H''.
inline std::array<double, 3> smooth_step(double y) {
  if (y <= 0) return {0, 0, 0};
  if (y >= 1) return {1, 0, 0};
  // H = sigma(z), z = 1/(1-y) - 1/y.
  const double z = 1.0 / (1.0 - y) - 1.0 / y;
  const double ez = std::exp(-std::abs(z));
  const double sig = z >= 0 ? 1.0 / (1.0 + ez) : ez / (1.0 + ez);
  if (y < 1e-3 || y > 1.0 - 1e-3) return {sig, 0, 0};
  const double dsig = ez / sqr(1.0 + ez);
  const double ddsig = dsig * (1.0 - 2.0 * sig);
  const double zp = 1.0 / sqr(1.0 - y) + 1.0 / sqr(y);
  const double zpp = 2.0 / std::pow(1.0 - y, 3) - 2.0 / std::pow(y, 3);
  return {sig, dsig * zp, ddsig * zp * zp + dsig * zpp};
}

}  // namespace detail

/// C-infinity concave plateau function: f(0) = 0, f'(0) = s0, f' = s0 (1 - H(q/r1)),
/// constant f(r1) = s0 r1 / 2 for q >= r1. Odd at 0 to all orders.
inline TransitionValue transition_profile(double s0, double r1, double query) {
  require(s0 > 0 && std::isfinite(s0), "transition slope must be positive");
  require(r1 > 0 && std::isfinite(r1), "transition width must be positive");
  require(query >= 0, "transition query must be nonnegative");
  if (query >= r1) return {0.5 * s0 * r1, 0, 0, 0};
  const double y = query / r1;
  using boost::math::quadrature::gauss_kronrod;
  // I(y) = int_0^y (1 - H); past the midpoint use I(y) = 1/2 - int_0^{1-y} H,
  // which keeps I <= 1/2 and monotone up to the plateau.
  double I = 0;
  if (y <= 0.5) {
    auto rest = [](double u) { return 1.0 - detail::smooth_step(u)[0]; };
    I = y > 0 ? gauss_kronrod<double, 61>::integrate(rest, 0.0, y, 8, 1e-10) : 0.0;
  } else {
    auto step = [](double u) { return detail::smooth_step(u)[0]; };
    I = 0.5 - gauss_kronrod<double, 61>::integrate(step, 0.0, 1.0 - y, 8, 1e-10);
  }
  const auto H = detail::smooth_step(y);
  return {s0 * r1 * I, s0 * (1.0 - H[0]), -s0 * H[1] / r1, -s0 * H[2] / (r1 * r1)};
}

enum class ModelMetric { RoundS4, FubiniStudy, ProductCylinder };

inline std::string to_string(ModelMetric m) {
  switch (m) {
    case ModelMetric::RoundS4: return "round-s4";
    case ModelMetric::FubiniStudy: return "fubini-study";
    case ModelMetric::ProductCylinder: return "cylinder";
  }
  return "?";
}

inline ModelMetric model_from_string(const std::string& s) {
  if (s == "round-s4" || s == "round") return ModelMetric::RoundS4;
  if (s == "fubini-study" || s == "fs") return ModelMetric::FubiniStudy;
  if (s == "cylinder" || s == "product-cylinder") return ModelMetric::ProductCylinder;
  throw InvalidArgument("unknown model '" + s + "' (expected round-s4, fubini-study, cylinder)");
}

/// Interval length on which a model metric closes up smoothly (0 = any).
inline double model_length(ModelMetric m) {
  switch (m) {
    case ModelMetric::RoundS4: return std::numbers::pi / 3.0;
    case ModelMetric::FubiniStudy: return std::numbers::pi / 4.0;
    case ModelMetric::ProductCylinder: return 0.0;
  }
  return 0.0;
}

/// Unit-bracket model profile quadruple (zeta, phi, psi, xi) at r, with r-derivatives.
struct ModelSample {
  std::array<double, 4> v{}, d1{}, d2{};
};

inline ModelSample model_profile(ModelMetric model, double r, double cylinder_radius = 1.0) {
  const double sr = std::sin(r), cr = std::cos(r), s3 = std::sqrt(3.0);
  switch (model) {
    case ModelMetric::RoundS4:
      return {{1, 2 * sr, s3 * cr + sr, s3 * cr - sr},
              {0, 2 * cr, -s3 * sr + cr, -s3 * sr - cr},
              {0, -2 * sr, -(s3 * cr + sr), -(s3 * cr - sr)}};
    case ModelMetric::FubiniStudy:
      return {{1, sr, std::cos(2 * r), cr},
              {0, cr, -2 * std::sin(2 * r), -sr},
              {0, -sr, -4 * std::cos(2 * r), -cr}};
    case ModelMetric::ProductCylinder:
      return {{1, cylinder_radius, cylinder_radius, cylinder_radius}, {}, {}};
  }
  return {};
}

/// Round S^4 (Ric = 3g), Fubini-Study CP^2 (Ric = 6g) or the line times a
/// round S^3 of radius K (ProductCylinder), with exact derivatives. For
/// bracket constant c the sphere and CP^2 profiles are c times the
/// unit-bracket ones; the cylinder profiles are K for every c.
inline ProfileSet build_model_metric(ModelMetric model, const Grid& grid, double c,
                                     double cylinder_radius = 1.0) {
  require(c > 0, "structure constant c must be positive");
  require(cylinder_radius > 0, "cylinder radius must be positive");
  const double Lm = model_length(model);
  if (Lm > 0)
    require(std::abs(grid.L - Lm) <= 1e-12 * Lm,
            "grid length does not match the model (expected " + std::to_string(Lm) + ")");
  ManifoldSpec spec;
  switch (model) {
    case ModelMetric::RoundS4: spec = ManifoldSpec::make(Family::S4, c); break;
    case ModelMetric::FubiniStudy: spec = ManifoldSpec::make(Family::CP2, c); break;
    case ModelMetric::ProductCylinder: spec = ManifoldSpec::make(Family::Cylinder, c); break;
  }
  spec.L = grid.L;
  const double scale = model == ModelMetric::ProductCylinder ? 1.0 : c;
  auto P = ProfileSet::allocate(grid, spec);
  ProfileDerivatives D;
  for (int a = 0; a < 4; ++a) {
    D.d1[a].assign(grid.N, 0.0);
    D.d2[a].assign(grid.N, 0.0);
  }
  for (int i = 0; i < grid.N; ++i) {
    const auto m = model_profile(model, grid.r(i), cylinder_radius);
    for (int a = 0; a < 4; ++a) {
      const double s = a == 0 ? 1.0 : scale;
      P.f[a][i] = s * m.v[a];
      D.d1[a][i] = s * m.d1[a];
      D.d2[a][i] = s * m.d2[a];
    }
  }
  P.exact = std::move(D);
  return P;
}

/// Parameters of the Grove-Ziller collapse at one pole: the profile is the
/// horizontal length of the collapsing action field in the quotient
/// (K^2 a Q|_k + disk) / S^1, i.e. G(d) = K sqrt(a) alpha f / sqrt(a K^2 + alpha^2 f^2)
/// with f a unit-slope transition of width w and Cheeger scale a chosen so that
/// G reaches exactly K where f plateaus.
struct GzCollapse {
  double K = 1, alpha = 1, width = 1, cheeger = 1;

  GzCollapse(double plateau, double slope, double w) : K(plateau), alpha(slope), width(w) {
    const double q = alpha * width / (2.0 * K);
    require(q >= 2.0 - 1e-12,
            "transition too steep: need slope * width >= 4 * plateau for sec >= 0 "
            "(slope " + std::to_string(slope) + ", width " + std::to_string(w) + ")");
    cheeger = q * q / (q * q - 1.0);
  }

  /// Value and first two derivatives in the distance d from the pole.
  std::array<double, 3> operator()(double d) const {
    const auto f = transition_profile(1.0, width, d);
    const double u = alpha * f.value;
    const double aK2 = cheeger * K * K;
    const double base = aK2 + u * u;
    const double pre = K * std::sqrt(cheeger);
    const double G = pre * u / std::sqrt(base);
    const double Gu = pre * aK2 / std::pow(base, 1.5);
    const double Guu = -3.0 * pre * aK2 * u / std::pow(base, 2.5);
    return {G, Gu * alpha * f.d1, Guu * sqr(alpha * f.d1) + Gu * alpha * f.d2};
  }
};

/// Grove-Ziller metric: zeta = 1, the collapsing profile at each pole rises
/// from 0 with the spec's slope to the plateau K, the other profiles are
/// identically K there. Exact derivatives are attached.
inline ProfileSet build_grove_ziller(const ManifoldSpec& spec_in, double plateau,
                                     double transition_width, const Grid& grid) {
  ManifoldSpec spec = spec_in;
  spec.L = grid.L;
  spec.validate();
  require(spec.has_poles(), "Grove-Ziller metrics need a manifold with singular orbits");
  require(plateau > 0, "plateau must be positive");
  require(transition_width > 0 && transition_width < 0.5 * grid.L,
          "transition width must lie in (0, L/2)");
  const GzCollapse minus(plateau, spec.slope_minus, transition_width);
  const GzCollapse plus(plateau, spec.slope_plus, transition_width);

  auto P = ProfileSet::allocate(grid, spec);
  ProfileDerivatives D;
  for (int a = 0; a < 4; ++a) {
    D.d1[a].assign(grid.N, 0.0);
    D.d2[a].assign(grid.N, 0.0);
  }
  for (int i = 0; i < grid.N; ++i) {
    const double r = grid.r(i);
    const auto gm = minus(r);
    auto gp = plus(grid.L - r);
    gp[1] = -gp[1];
    P.f[0][i] = 1.0;
    for (int a = 1; a <= 3; ++a) {
      // Product of normalized factors; each is identically 1 off its own end.
      std::array<double, 3> u{1, 0, 0}, v{1, 0, 0};
      if (a == spec.collapse_minus) u = {gm[0] / plateau, gm[1] / plateau, gm[2] / plateau};
      if (a == spec.collapse_plus) v = {gp[0] / plateau, gp[1] / plateau, gp[2] / plateau};
      P.f[a][i] = plateau * u[0] * v[0];
      D.d1[a][i] = plateau * (u[1] * v[0] + u[0] * v[1]);
      D.d2[a][i] = plateau * (u[2] * v[0] + 2 * u[1] * v[1] + u[0] * v[2]);
    }
  }
  P.exact = std::move(D);
  require(P.all_positive(), "Grove-Ziller construction produced nonpositive samples");
  return P;
}

/// Residuals of the pole smoothness conditions at one end. Each residual
/// is paired with the power of h at which it vanishes for smooth data.
struct PoleResiduals {
  double slope = 0;          // |extrapolated slope of collapsing profile - slope * zeta(pole)|
  double pole_equality = 0;  // |noncollapsing pair difference, extrapolated to the pole|
  double parity = 0;         // largest wrong-parity component of the ghost extension
  int slope_order = 6;
  int equality_order = 4;
  int parity_order = 5;
  double slope_tolerance = 0;
  double equality_tolerance = 0;
  double parity_tolerance = 0;

  bool flagged() const {
    return slope > slope_tolerance || pole_equality > equality_tolerance ||
           parity > parity_tolerance;
  }
};

struct SmoothnessReport {
  PoleResiduals minus;
  PoleResiduals plus;
  bool flagged() const { return minus.flagged() || plus.flagged(); }
};

namespace detail {

// Fit u(d_j) = sum_m x_m d_j^{p_m} through the nodes d_j = (j + 1/2) h nearest
// the pole (one node per power) and return coefficient x_which.
template <std::size_t M>
double pole_fit(const std::array<double, M>& u, const std::array<int, M>& powers, int which,
                double h) {
  Eigen::Matrix<double, M, M> A;
  Eigen::Matrix<double, M, 1> y;
  for (std::size_t j = 0; j < M; ++j) {
    for (std::size_t m = 0; m < M; ++m) A(j, m) = std::pow(j + 0.5, powers[m]);
    y(j) = u[j];
  }
  const Eigen::Matrix<double, M, 1> x = A.fullPivLu().solve(y);
  return x(which) / std::pow(h, powers[which]);
}

}  // namespace detail

inline PoleResiduals pole_residuals(const ProfileSet& P, bool plus_end) {
  PoleResiduals out;
  const auto& S = P.spec;
  if (!S.has_poles()) return out;
  const int N = P.grid.N;
  const double h = P.grid.h();
  auto nodes = [&](auto&& fn) {
    std::array<double, 4> u{};
    for (int j = 0; j < 4; ++j) u[j] = fn(plus_end ? N - 1 - j : j);
    return u;
  };
  auto profile = [&](int a) { return nodes([&](int i) { return P.f[a][i]; }); };
  auto head3 = [](const std::array<double, 4>& u) { return std::array<double, 3>{u[0], u[1], u[2]}; };

  const int k = S.collapse(plus_end);
  const auto& R = S.reflection(plus_end);
  // zeta is even, the collapsing profile odd in the distance to the pole.
  const double zeta_pole = detail::pole_fit<3>(head3(profile(0)), {0, 2, 4}, 0, h);
  const double slope_est = detail::pole_fit<3>(head3(profile(k)), {1, 3, 5}, 0, h);
  out.slope = std::abs(slope_est - S.slope(plus_end) * zeta_pole);

  auto even_defect = [&](const std::array<double, 4>& u) {
    return std::abs(detail::pole_fit<4>(u, {0, 1, 3, 5}, 0, h));
  };
  auto odd_defect = [&](const std::array<double, 4>& u) {
    return std::abs(detail::pole_fit<4>(u, {1, 0, 2, 4}, 0, h));
  };

  double scale = 0;
  for (int a = 1; a <= 3; ++a) scale = std::max(scale, std::abs(P.f[a][plus_end ? N - 1 : 0]));
  double eq = 0, par = std::max(even_defect(profile(k)), odd_defect(profile(0)));
  for (int a = 1; a <= 3; ++a) {
    if (a == k) continue;
    const int b = R.perm[a];
    if (b < a) continue;
    const auto ua = profile(a), ub = profile(b);
    if (b != a) {
      std::array<double, 4> sum{}, diff{};
      for (int j = 0; j < 4; ++j) {
        sum[j] = 0.5 * (ua[j] + ub[j]);
        diff[j] = ua[j] - ub[j];
      }
      // Swap ends: the pair average is even, the difference odd.
      par = std::max({par, odd_defect(sum), even_defect(diff)});
    } else {
      par = std::max(par, odd_defect(ua));
    }
  }
  // Both noncollapsing profiles meet at the pole.
  int i = 0, j = 0;
  for (int a = 1; a <= 3; ++a)
    if (a != k) (i == 0 ? i : j) = a;
  const auto ui = profile(i), uj = profile(j);
  std::array<double, 4> diff{};
  for (int m = 0; m < 4; ++m) diff[m] = ui[m] - uj[m];
  eq = std::abs(detail::pole_fit<4>(diff, {0, 1, 2, 3}, 0, h));

  out.pole_equality = eq;
  out.parity = par;
  // Flag threshold: 0.1% of the slope or of the profile scale at the pole.
  out.slope_tolerance = 1e-3 * S.slope(plus_end);
  out.equality_tolerance = 1e-3 * scale;
  out.parity_tolerance = 1e-3 * scale;
  return out;
}

inline SmoothnessReport check_smoothness(const ProfileSet& P) {
  return {pole_residuals(P, false), pole_residuals(P, true)};
}

namespace detail {

// Probe jets near one pole at distance d: collapsing profile s d, the
// noncollapsing pair split to first order (swap ends) or second order
// (identity ends) around 1, zeta = 1.
inline NodeJet slope_probe(const ManifoldSpec& S, bool plus_end, double s, double d) {
  const int k = S.collapse(plus_end);
  const bool swap = !S.reflection(plus_end).is_identity();
  constexpr double b = 0.5;
  NodeJet J;
  J.f = {1, 1, 1, 1};
  J.f[k] = s * d;
  J.d1[k] = s;
  int sgn = 1;
  for (int a = 1; a <= 3; ++a) {
    if (a == k) continue;
    if (swap) {
      J.f[a] = 1 + sgn * b * d;
      J.d1[a] = sgn * b;
    } else {
      J.f[a] = 1 + sgn * b * d * d;
      J.d1[a] = 2 * sgn * b * d;
      J.d2[a] = 2 * sgn * b;
    }
    sgn = -sgn;
  }
  return J;
}

// Sign-changing defect of the probe at slope s.
// Swap ends: coefficient of the 1/d blow-up of the vertical curvature
// sec(e_k, e_i), extrapolated from two radii a decade apart.
// Identity ends: isotropy imbalance at the pole between the planes
// e0^e_i + e_j^e_k and e0^e_j + e_k^e_i, which must agree when the isotropy
// rotates the slice and the pole's tangent plane at equal weight.
inline double slope_defect(const ManifoldSpec& S, bool plus_end, double s) {
  const int k = S.collapse(plus_end);
  int i = k % 3 + 1, j = i % 3 + 1;  // (k, i, j) cyclic
  const bool swap = !S.reflection(plus_end).is_identity();
  if (swap) {
    auto singular = [&](double d) {
      const auto K = riemann_frame(slope_probe(S, plus_end, s, d), S.c);
      return d * K.sec(k, i);
    };
    const double d1 = 1e-4, d2 = 1e-5;
    return (d1 * singular(d2) - d2 * singular(d1)) / (d1 - d2);
  }
  auto imbalance = [&](double d) {
    const auto K = riemann_frame(slope_probe(S, plus_end, s, d), S.c);
    Eigen::Matrix<double, 6, 1> u = Eigen::Matrix<double, 6, 1>::Zero(), v = u;
    int sg = 0;
    u(two_form_index(0, i, &sg)) += sg;
    u(two_form_index(j, k, &sg)) += sg;
    v(two_form_index(0, j, &sg)) += sg;
    v(two_form_index(k, i, &sg)) += sg;
    return u.dot(K.op * u) - v.dot(K.op * v);
  };
  const double d1 = 1e-3, d2 = 5e-4;
  // Remove the O(d^2) approach to the limit.
  return (d1 * d1 * imbalance(d2) - d2 * d2 * imbalance(d1)) / (d1 * d1 - d2 * d2);
}

}  // namespace detail

/// Smoothness slope at one pole by bisection on the sign of the probe defect.
/// Throws when the defect does not change sign on [lo, hi].
inline double calibrate_slope(const ManifoldSpec& spec, bool plus_end, double lo, double hi,
                              double rel_tol = 1e-10) {
  require(spec.has_poles(), "calibration needs a pole");
  require(lo > 0 && hi > lo, "calibration range must be positive and nonempty");
  double flo = detail::slope_defect(spec, plus_end, lo);
  const double fhi = detail::slope_defect(spec, plus_end, hi);
  if (!(flo * fhi < 0))
    throw InvalidArgument("no sign change of the smoothness defect on [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]; widen the range");
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = detail::slope_defect(spec, plus_end, mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cohomflow
