#pragma once

// Ghost extension across the poles and fourth-order finite differences.

#include <array>
#include <vector>

#include "cohomflow/manifold.hpp"

namespace cohomflow {

enum class GhostMode { reflect, one_sided };

/// Profiles padded with `width` ghost nodes past each pole.
/// Index i of the interior maps to storage index i + width.
struct ExtendedProfiles {
  int width = 0;
  int N = 0;
  std::array<std::vector<double>, 4> f;

  double at(int a, int i) const { return f[a][i + width]; }
};

/// Mirror the staggered data across each pole. Ghost of profile a at -r_j is
/// sign[a] * profile perm[a] at r_j; zeta extends evenly. The plus pole mirrors
/// about L the same way. Cylinder specs extend every profile evenly.
inline ExtendedProfiles boundary_extend(const ProfileSet& P, int width) {
  require(width >= 0 && width <= 4, "ghost width must be in [0, 4]");
  const int N = P.grid.N;
  require(N >= width, "grid too small for requested ghost width");
  ExtendedProfiles E;
  E.width = width;
  E.N = N;
  for (int a = 0; a < 4; ++a) {
    E.f[a].assign(N + 2 * width, 0.0);
    for (int i = 0; i < N; ++i) E.f[a][i + width] = P.f[a][i];
  }
  for (bool plus : {false, true}) {
    Reflection R;
    if (P.spec.has_poles()) R = P.spec.reflection(plus);
    for (int j = 0; j < width; ++j) {
      const int src = plus ? N - 1 - j : j;
      const int dst = plus ? N + width + j : width - 1 - j;
      E.f[0][dst] = P.f[0][src];
      for (int a = 1; a <= 3; ++a) E.f[a][dst] = R.sign[a] * P.f[R.perm[a]][src];
    }
  }
  return E;
}

/// Values and first two r-derivatives of all four profiles at one node.
struct NodeJet {
  std::array<double, 4> f{};
  std::array<double, 4> d1{};
  std::array<double, 4> d2{};
};

namespace detail {

inline double central_d1(const std::vector<double>& u, int k, double h) {
  return (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) / (12.0 * h);
}

inline double central_d2(const std::vector<double>& u, int k, double h) {
  return (-(u[k - 2] + u[k + 2]) + 16.0 * (u[k - 1] + u[k + 1]) - 30.0 * u[k]) / (12.0 * h * h);
}

// One-sided fourth-order stencils; `dir` = +1 reads forward from k, -1 backward.
inline double onesided_d1(const std::vector<double>& u, int k, int offset, int dir, double h) {
  auto v = [&](int m) { return u[k + dir * (m - offset)]; };
  double s = 0;
  if (offset == 0)
    s = -25 * v(0) + 48 * v(1) - 36 * v(2) + 16 * v(3) - 3 * v(4);
  else
    s = -3 * v(0) - 10 * v(1) + 18 * v(2) - 6 * v(3) + v(4);
  return dir * s / (12.0 * h);
}

inline double onesided_d2(const std::vector<double>& u, int k, int offset, int dir, double h) {
  auto v = [&](int m) { return u[k + dir * (m - offset)]; };
  double s = 0;
  if (offset == 0)
    s = 45 * v(0) - 154 * v(1) + 214 * v(2) - 156 * v(3) + 61 * v(4) - 10 * v(5);
  else
    s = 10 * v(0) - 15 * v(1) - 4 * v(2) + 14 * v(3) - 6 * v(4) + v(5);
  return s / (12.0 * h * h);
}

}  // namespace detail

/// Finite-difference jets at every node. Uses exact derivatives when the
/// profile set carries them.
inline std::vector<NodeJet> node_jets(const ProfileSet& P, GhostMode mode = GhostMode::reflect) {
  const int N = P.grid.N;
  const double h = P.grid.h();
  std::vector<NodeJet> out(N);
  if (P.exact) {
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < 4; ++a) {
        out[i].f[a] = P.f[a][i];
        out[i].d1[a] = P.exact->d1[a][i];
        out[i].d2[a] = P.exact->d2[a][i];
      }
    return out;
  }
  require(N >= 6, "finite differences need at least 6 nodes");
  if (mode == GhostMode::reflect) {
    const auto E = boundary_extend(P, 2);
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < 4; ++a) {
        out[i].f[a] = P.f[a][i];
        out[i].d1[a] = detail::central_d1(E.f[a], i + 2, h);
        out[i].d2[a] = detail::central_d2(E.f[a], i + 2, h);
      }
    return out;
  }
  for (int i = 0; i < N; ++i)
    for (int a = 0; a < 4; ++a) {
      const auto& u = P.f[a];
      out[i].f[a] = u[i];
      if (i >= 2 && i < N - 2) {
        out[i].d1[a] = detail::central_d1(u, i, h);
        out[i].d2[a] = detail::central_d2(u, i, h);
      } else if (i < 2) {
        out[i].d1[a] = detail::onesided_d1(u, i, i, +1, h);
        out[i].d2[a] = detail::onesided_d2(u, i, i, +1, h);
      } else {
        const int off = N - 1 - i;
        out[i].d1[a] = detail::onesided_d1(u, i, off, -1, h);
        out[i].d2[a] = detail::onesided_d2(u, i, off, -1, h);
      }
    }
  return out;
}

}  // namespace cohomflow
