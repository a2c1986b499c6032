#pragma once

// Levi-Civita connection and Riemann tensor of a diagonal cohomogeneity-one
// metric on the orthonormal frame e0 = zeta^-1 d_r, e_i = f_i^-1 X_i, with
// [d_r, X_i] = 0 and [X_i, X_j] = c X_k for (i, j, k) cyclic.
//
// Everything at a node is a function of the NodeJet (values, d/dr, d2/dr2).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "cohomflow/core.hpp"
#include "cohomflow/stencil.hpp"

namespace cohomflow {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec4 = Eigen::Vector4d;

/// Ordered 2-form basis {e01, e02, e03, e23, e31, e12}.
inline constexpr std::array<std::array<int, 2>, 6> kTwoFormBasis{
    {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}}};

using ConnectionCoefficients = std::array<std::array<std::array<double, 4>, 4>, 4>;

/// Curvature operator at one node, as a symmetric form on the 2-form basis.
struct FrameCurvature {
  int node = -1;
  Mat6 op = Mat6::Zero();

  double sec(int a, int b) const;
};

struct TangentPlane {
  int node = -1;
  Vec4 v = Vec4::UnitX();
  Vec4 w = Vec4::UnitY();
};

namespace detail {

template <typename T>
using JetTensor3 = std::array<std::array<std::array<Jet<T>, 4>, 4>, 4>;

// Structure functions C_abc = <[e_a, e_b], e_c> and the Koszul connection
// Gamma_abc = <nabla_{e_a} e_b, e_c> = (C_abc - C_acb - C_bca) / 2, as jets in r.
template <typename T>
void structure_and_connection(const NodeJet& J, T c, JetTensor3<T>& C, JetTensor3<T>& G) {
  for (auto& x : C)
    for (auto& y : x) y.fill(Jet<T>{});
  const Jet<T> zeta{J.f[0], J.d1[0]};
  std::array<Jet<T>, 4> F, Fp;
  for (int a = 0; a < 4; ++a) {
    F[a] = Jet<T>{J.f[a], J.d1[a]};
    Fp[a] = Jet<T>{J.d1[a], J.d2[a]};
  }
  for (int i = 1; i <= 3; ++i) {
    C[0][i][i] = -(Fp[i] / (zeta * F[i]));
    C[i][0][i] = -C[0][i][i];
  }
  constexpr int cyc[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
  for (const auto& t : cyc) {
    const auto v = c * (F[t[2]] / (F[t[0]] * F[t[1]]));
    C[t[0]][t[1]][t[2]] = v;
    C[t[1]][t[0]][t[2]] = -v;
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 4; ++k)
        G[a][b][k] = T(0.5) * (C[a][b][k] - C[a][k][b] - C[b][k][a]);
}

}  // namespace detail

/// <nabla_{e_a} e_b, e_c> at a node.
inline ConnectionCoefficients frame_connection(const NodeJet& J, double c) {
  detail::JetTensor3<double> C, G;
  detail::structure_and_connection(J, c, C, G);
  ConnectionCoefficients out{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 4; ++k) out[a][b][k] = G[a][b][k].v;
  return out;
}

/// Full Riemann tensor R_abcd = <R(e_a, e_b) e_c, e_d> with
/// R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y], so that
/// sec(e_a, e_b) = R_abba.
inline std::array<std::array<std::array<std::array<double, 4>, 4>, 4>, 4> riemann_tensor(
    const NodeJet& J, double c) {
  detail::JetTensor3<double> C, G;
  detail::structure_and_connection(J, c, C, G);
  const double zeta = J.f[0];
  // Only e0 differentiates: all coefficients are functions of r alone.
  auto dir = [&](int a, const Jet<double>& g) { return a == 0 ? g.d / zeta : 0.0; };
  std::array<std::array<std::array<std::array<double, 4>, 4>, 4>, 4> R{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      for (int k = 0; k < 4; ++k)
        for (int d = 0; d < 4; ++d) {
          double s = dir(a, G[b][k][d]) - dir(b, G[a][k][d]);
          for (int e = 0; e < 4; ++e)
            s += G[b][k][e].v * G[a][e][d].v - G[a][k][e].v * G[b][e][d].v -
                 C[a][b][e].v * G[e][k][d].v;
          R[a][b][k][d] = s;
        }
    }
  return R;
}

/// Curvature operator <R(e_a^e_b), e_c^e_d> = R_abdc on kTwoFormBasis.
inline FrameCurvature riemann_frame(const NodeJet& J, double c, int node = -1) {
  const auto R = riemann_tensor(J, c);
  FrameCurvature out;
  out.node = node;
  for (int I = 0; I < 6; ++I)
    for (int K = 0; K < 6; ++K) {
      const auto [a, b] = kTwoFormBasis[I];
      const auto [p, q] = kTwoFormBasis[K];
      out.op(I, K) = R[a][b][q][p];
    }
  return out;
}

inline int two_form_index(int a, int b, int* sign) {
  for (int I = 0; I < 6; ++I) {
    if (kTwoFormBasis[I][0] == a && kTwoFormBasis[I][1] == b) {
      *sign = 1;
      return I;
    }
    if (kTwoFormBasis[I][0] == b && kTwoFormBasis[I][1] == a) {
      *sign = -1;
      return I;
    }
  }
  *sign = 0;
  return -1;
}

inline double FrameCurvature::sec(int a, int b) const {
  int s = 0;
  const int I = two_form_index(a, b, &s);
  require(I >= 0, "sec of a degenerate coordinate plane");
  return op(I, I);
}

using Ricci = std::array<double, 4>;

/// Ricci diagonal by contracting the Koszul curvature: Ric_bb = sum_a R_abba.
inline Ricci ricci_koszul(const NodeJet& J, double c) {
  const auto R = riemann_tensor(J, c);
  Ricci ric{};
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a)
      if (a != b) ric[b] += R[a][b][b][a];
  return ric;
}

/// Homogeneous (orbit) Ricci term (c^2/2) (f_i^4 - (f_j^2 - f_k^2)^2) / (f_i^2 f_j^2 f_k^2),
/// j < k, in factored form so the f_i = f_j, f_k -> 0 limit has no cancellation.
inline double orbit_ricci(double fi, double fj, double fk, double c) {
  const double i2 = fi * fi, j2 = fj * fj, k2 = fk * fk;
  const double num = ((i2 - j2) + k2) * ((i2 + j2) - k2);
  return 0.5 * c * c * num / (i2 * j2 * k2);
}

/// Closed-form Ricci diagonal on the orthonormal frame, valid for general zeta.
inline Ricci ricci_closed_form(const NodeJet& J, double c) {
  const double z = J.f[0], zr = J.d1[0];
  const double z2 = z * z, z3 = z2 * z;
  Ricci ric{};
  std::array<double, 4> radial{};
  for (int i = 1; i <= 3; ++i) {
    radial[i] = -J.d2[i] / (J.f[i] * z2) + J.d1[i] * zr / (J.f[i] * z3);
    ric[0] += radial[i];
  }
  constexpr int others[4][2] = {{0, 0}, {2, 3}, {1, 3}, {1, 2}};
  for (int i = 1; i <= 3; ++i) {
    const int j = others[i][0], k = others[i][1];
    const double log_i = J.d1[i] / J.f[i];
    const double mixed = log_i * (J.d1[j] / J.f[j] + J.d1[k] / J.f[k]) / z2;
    ric[i] = radial[i] - mixed + orbit_ricci(J.f[i], J.f[j], J.f[k], c);
  }
  return ric;
}

/// Orthonormalize (v, w); throws on a degenerate plane.
inline TangentPlane orthonormal_plane(int node, Vec4 v, Vec4 w) {
  const double nv = v.norm();
  require(nv > 1e-14, "degenerate plane: zero vector");
  v /= nv;
  w -= v.dot(w) * v;
  const double nw = w.norm();
  require(nw > 1e-12, "degenerate plane: parallel vectors");
  return TangentPlane{node, v, w / nw};
}

inline Eigen::Matrix<double, 6, 1> wedge(const Vec4& v, const Vec4& w) {
  Eigen::Matrix<double, 6, 1> om;
  for (int I = 0; I < 6; ++I) {
    const auto [a, b] = kTwoFormBasis[I];
    om(I) = v(a) * w(b) - v(b) * w(a);
  }
  return om;
}

/// Sectional curvature of span(v, w); the plane need not be orthonormal.
inline double sec_plane(const FrameCurvature& K, const TangentPlane& plane) {
  const auto om = wedge(plane.v, plane.w);
  const double n2 = om.squaredNorm();
  require(n2 > 1e-24, "degenerate plane: parallel vectors");
  return om.dot(K.op * om) / n2;
}

/// Block sparsity of the curvature operator: off-diagonal entries only pair
/// e0^e_i with e_j^e_k. Returns the largest entry violating it.
inline double block_violation(const Mat6& M) {
  double worst = 0;
  for (int I = 0; I < 6; ++I)
    for (int K = 0; K < 6; ++K)
      if (I != K && std::abs(I - K) != 3) worst = std::max(worst, std::abs(M(I, K)));
  return worst;
}

/// Minimum sectional curvature through Thorpe duality in dimension four:
/// min sec = max over mu of lambda_min(R + mu *), with * the Hodge star on
/// 2-forms. lambda_min is concave in mu, so golden-section search is exact up
/// to tolerance.
inline double min_sec_thorpe(const Mat6& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const bool sparse = block_violation(M) <= 1e-13 * scale;
  auto lam = [&](double mu) {
    if (sparse) {
      double m = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        const double a = M(i, i), d = M(i + 3, i + 3), b = M(i, i + 3) + mu;
        m = std::min(m, 0.5 * (a + d) - std::hypot(0.5 * (a - d), b));
      }
      return m;
    }
    Mat6 S = M;
    for (int i = 0; i < 3; ++i) {
      S(i, i + 3) += mu;
      S(i + 3, i) += mu;
    }
    Eigen::SelfAdjointEigenSolver<Mat6> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };
  double lo, hi;
  if (sparse) {
    lo = -M(0, 3);
    hi = lo;
    for (int i = 0; i < 3; ++i) {
      lo = std::min(lo, -M(i, i + 3));
      hi = std::max(hi, -M(i, i + 3));
    }
  } else {
    lo = -M.norm();
    hi = M.norm();
  }
  if (hi - lo <= 0) return lam(lo);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = lam(x1), f2 = lam(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = lam(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = lam(x1);
    }
  }
  return std::max({f1, f2, lam(0.5 * (lo + hi))});
}

struct MinSecOptions {
  int samples = 20000;
  std::uint64_t seed = 0;
  int refine_best = 4;
  int max_descent_iters = 100;
};

struct MinSec {
  double value = 0;
  TangentPlane plane;
};

namespace detail {

// For fixed unit v, sec(v, w) = w^T A_v w on w perpendicular to v, where
// A_v = B(v)^T M B(v) and B(v) w = v ^ w. v spans the kernel of A_v.
inline Eigen::Matrix4d partial_form(const Mat6& M, const Vec4& v) {
  Eigen::Matrix<double, 6, 4> B = Eigen::Matrix<double, 6, 4>::Zero();
  for (int I = 0; I < 6; ++I) {
    const auto [a, b] = kTwoFormBasis[I];
    B(I, b) += v(a);
    B(I, a) -= v(b);
  }
  return B.transpose() * M * B;
}

inline Vec4 best_partner(const Mat6& M, const Vec4& v, double shift, double* value) {
  Eigen::Matrix4d A = partial_form(M, v);
  A += shift * v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(A);
  *value = es.eigenvalues()(0);
  return es.eigenvectors().col(0);
}

}  // namespace detail

/// Minimum sectional curvature at a node: dense random sampling of planes
/// followed by alternating descent (optimal w for fixed v, then optimal v
/// for fixed w) from the best samples.
inline MinSec min_sec_point(const FrameCurvature& K, const MinSecOptions& opt = {}) {
  const Mat6& M = K.op;
  std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(K.node + 1));
  std::normal_distribution<double> gauss;
  const int keep = std::max(1, opt.refine_best);
  std::vector<std::pair<double, TangentPlane>> best;
  for (int s = 0; s < opt.samples; ++s) {
    Vec4 v, w;
    for (int a = 0; a < 4; ++a) {
      v(a) = gauss(rng);
      w(a) = gauss(rng);
    }
    const double nv = v.norm();
    if (nv < 1e-12) continue;
    v /= nv;
    w -= v.dot(w) * v;
    const double nw = w.norm();
    if (nw < 1e-12) continue;
    w /= nw;
    const auto om = wedge(v, w);
    const double val = om.dot(M * om);
    if (static_cast<int>(best.size()) < keep || val < best.back().first) {
      best.emplace_back(val, TangentPlane{K.node, v, w});
      std::sort(best.begin(), best.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      if (static_cast<int>(best.size()) > keep) best.pop_back();
    }
  }
  require(!best.empty(), "min_sec_point needs at least one sample");
  const double shift = 4.0 * (M.norm() + 1.0);
  MinSec out{best.front().first, best.front().second};
  for (auto [val, P] : best) {
    Vec4 v = P.v, w = P.w;
    double cur = val;
    for (int it = 0; it < opt.max_descent_iters; ++it) {
      double nv = 0;
      w = detail::best_partner(M, v, shift, &nv);
      v = detail::best_partner(M, w, shift, &nv);
      const double gain = cur - nv;
      cur = std::min(cur, nv);
      if (gain <= 1e-15 * (std::abs(cur) + 1.0)) break;
    }
    const auto Pn = orthonormal_plane(K.node, v, w);
    const double val_n = sec_plane(K, Pn);
    if (val_n < out.value) out = {val_n, Pn};
  }
  return out;
}

/// Curvature operators at every node.
inline std::vector<FrameCurvature> curvature_field(const ProfileSet& P,
                                                   GhostMode mode = GhostMode::reflect) {
  const auto jets = node_jets(P, mode);
  std::vector<FrameCurvature> out(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i)
    out[i] = riemann_frame(jets[i], P.spec.c, static_cast<int>(i));
  return out;
}

inline FrameCurvature riemann_frame(const ProfileSet& P, int i) {
  require(i >= 0 && i < P.grid.N, "node index out of range");
  return riemann_frame(node_jets(P)[i], P.spec.c, i);
}

inline ConnectionCoefficients frame_connection(const ProfileSet& P, int i) {
  require(i >= 0 && i < P.grid.N, "node index out of range");
  return frame_connection(node_jets(P)[i], P.spec.c);
}

inline Ricci ricci_diag(const ProfileSet& P, int i) {
  require(i >= 0 && i < P.grid.N, "node index out of range");
  return ricci_closed_form(node_jets(P)[i], P.spec.c);
}

inline double sec_plane(const ProfileSet& P, const TangentPlane& plane) {
  return sec_plane(riemann_frame(P, plane.node), plane);
}

struct GlobalMinSec {
  double value = std::numeric_limits<double>::infinity();
  int node = -1;
  TangentPlane plane;
};

inline GlobalMinSec min_sec_global(const ProfileSet& P, const MinSecOptions& opt = {}) {
  GlobalMinSec g;
  for (const auto& K : curvature_field(P)) {
    const auto m = min_sec_point(K, opt);
    if (m.value < g.value) g = {m.value, K.node, m.plane};
  }
  return g;
}

/// Fast global minimum through the Thorpe evaluator; used for flow diagnostics.
inline std::pair<double, int> min_sec_global_thorpe(const std::vector<FrameCurvature>& field) {
  double best = std::numeric_limits<double>::infinity();
  int node = -1;
  for (const auto& K : field) {
    const double m = min_sec_thorpe(K.op);
    if (m < best) {
      best = m;
      node = K.node;
    }
  }
  return {best, node};
}

}  // namespace cohomflow
