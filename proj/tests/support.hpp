#pragma once

// Shared fixtures: random smooth profiles and hand-transcribed reference
// formulas for the reduced Ricci system.

#include <cmath>
#include <random>

#include "cohomflow/curvature.hpp"

namespace testsupport {

using namespace cohomflow;

/// Random smooth profile quadruple: each profile is a positive offset plus a
/// few random sinusoids, sampled on the grid with exact derivatives.
inline ProfileSet random_smooth_profiles(std::mt19937_64& rng, int N, double L, double c,
                                         bool unit_zeta) {
  std::uniform_real_distribution<double> amp(-0.3, 0.3), freq(0.5, 3.0), phase(0.0, 6.28);
  std::uniform_real_distribution<double> base(0.8, 2.0);
  auto spec = ManifoldSpec::make(Family::Cylinder, c);
  spec.L = L;
  const Grid g(N, L);
  auto P = ProfileSet::allocate(g, spec);
  ProfileDerivatives D;
  for (int a = 0; a < 4; ++a) {
    D.d1[a].assign(N, 0.0);
    D.d2[a].assign(N, 0.0);
    const double b = a == 0 ? 1.0 : base(rng);
    double A[3], w[3], p[3];
    for (int m = 0; m < 3; ++m) {
      A[m] = (a == 0 && unit_zeta) ? 0.0 : amp(rng) * b;
      w[m] = freq(rng);
      p[m] = phase(rng);
    }
    for (int i = 0; i < N; ++i) {
      const double r = g.r(i);
      double v = b, d1 = 0, d2 = 0;
      for (int m = 0; m < 3; ++m) {
        v += A[m] * std::sin(w[m] * r + p[m]);
        d1 += A[m] * w[m] * std::cos(w[m] * r + p[m]);
        d2 -= A[m] * w[m] * w[m] * std::sin(w[m] * r + p[m]);
      }
      P.f[a][i] = v;
      D.d1[a][i] = d1;
      D.d2[a][i] = d2;
    }
  }
  P.exact = std::move(D);
  return P;
}

/// Random jet at a single point with positive values.
inline NodeJet random_jet(std::mt19937_64& rng, bool unit_zeta) {
  std::uniform_real_distribution<double> val(0.4, 2.5), der(-2.0, 2.0);
  NodeJet J;
  for (int a = 0; a < 4; ++a) {
    J.f[a] = val(rng);
    J.d1[a] = der(rng);
    J.d2[a] = 2 * der(rng);
  }
  if (unit_zeta) {
    J.f[0] = 1;
    J.d1[0] = J.d2[0] = 0;
  }
  return J;
}

/// Coordinate-frame Ricci components of the reduced system in the usual
/// hand-derived form, with the homogeneous coefficient 2 replaced
/// by c^2/2. Returns {Ric(d_r,d_r), Ric(X1,X1), Ric(X2,X2), Ric(X3,X3)}.
inline std::array<double, 4> displayed_ricci(const NodeJet& J, double c) {
  const double z = J.f[0], zr = J.d1[0];
  const double k = 0.5 * c * c;
  std::array<double, 4> out{};
  for (int i = 1; i <= 3; ++i)
    out[0] -= (J.d2[i] * z - J.d1[i] * zr) / (J.f[i] * z * z);
  constexpr int others[4][2] = {{0, 0}, {2, 3}, {1, 3}, {1, 2}};
  for (int i = 1; i <= 3; ++i) {
    const int j = others[i][0], l = others[i][1];
    const double f = J.f[i], fr = J.d1[i], frr = J.d2[i];
    const double g = J.f[j], gr = J.d1[j], h = J.f[l], hr = J.d1[l];
    out[i] = k * (std::pow(f, 4) - std::pow(g * g - h * h, 2)) / (g * g * h * h) -
             (fr * f * gr * h + fr * f * hr * g) / (g * h * z * z) -
             (frr * f * z - fr * f * zr) / (z * z * z);
  }
  return out;
}

/// Right-hand side of the reduced flow system as displayed, coefficient 2
/// replaced by c^2/2. Returns {zeta_t, phi_t, psi_t, xi_t}.
inline std::array<double, 4> displayed_flow(const NodeJet& J, double c) {
  const double z = J.f[0], zr = J.d1[0];
  const double k = 0.5 * c * c;
  std::array<double, 4> out{};
  double s1 = 0, s2 = 0;
  for (int i = 1; i <= 3; ++i) {
    s1 += J.d1[i] / J.f[i];
    s2 += J.d2[i] / J.f[i];
  }
  out[0] = -s1 * zr / (z * z) + s2 / z;
  constexpr int others[4][2] = {{0, 0}, {2, 3}, {1, 3}, {1, 2}};
  for (int i = 1; i <= 3; ++i) {
    const int j = others[i][0], l = others[i][1];
    const double f = J.f[i], g = J.f[j], h = J.f[l];
    // (g h / z)_r
    const double ghz_r = (J.d1[j] * h + g * J.d1[l]) / z - g * h * zr / (z * z);
    out[i] = J.d2[i] / (z * z) + ghz_r * J.d1[i] / (z * g * h) -
             k * f * f * f / (g * g * h * h) + k * std::pow(g * g - h * h, 2) / (g * g * h * h * f);
  }
  return out;
}

}  // namespace testsupport
