#pragma once

// Manifold and metric data model for diagonal cohomogeneity-one metrics
//
//   g = zeta(r)^2 dr^2 + phi(r)^2 dx1^2 + psi(r)^2 dx2^2 + xi(r)^2 dx3^2
//
// on [0, L] x G/H, with su(2) action fields [X_i, X_j] = c X_k.
// Profile index convention everywhere: 0 = zeta, 1 = phi, 2 = psi, 3 = xi.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cohomflow/core.hpp"

namespace cohomflow {

enum class Family { S4, CP2, Mn, Cylinder };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::S4: return "s4";
    case Family::CP2: return "cp2";
    case Family::Mn: return "mn";
    case Family::Cylinder: return "cylinder";
  }
  return "?";
}

inline Family family_from_string(const std::string& s) {
  if (s == "s4" || s == "S4") return Family::S4;
  if (s == "cp2" || s == "CP2") return Family::CP2;
  if (s == "mn" || s == "Mn" || s == "MN") return Family::Mn;
  if (s == "cylinder") return Family::Cylinder;
  throw InvalidArgument("unknown manifold '" + s + "' (expected s4, cp2, mn)");
}

/// Signed permutation of the three vertical indices {1,2,3}, describing how
/// the frame extends across a pole. Stored 1-based; slot 0 is unused so that
/// indices line up with profile indices.
struct Reflection {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<int, 4> sign{1, 1, 1, 1};

  static Reflection identity() { return {}; }
  static Reflection swap(int i, int j) {
    Reflection r;
    r.perm[i] = j;
    r.perm[j] = i;
    return r;
  }

  bool is_identity() const { return perm[1] == 1 && perm[2] == 2 && perm[3] == 3; }

  bool is_involution() const {
    for (int a = 1; a <= 3; ++a)
      if (perm[perm[a]] != a || sign[a] * sign[perm[a]] != 1) return false;
    return true;
  }
};

/// Group-diagram metadata for one cohomogeneity-one family.
struct ManifoldSpec {
  Family family = Family::S4;
  int n = 0;  // only meaningful for Mn
  double c = 2.0;
  int collapse_minus = 1;
  int collapse_plus = 3;
  double slope_minus = 4.0;
  double slope_plus = 4.0;
  Reflection reflection_minus;
  Reflection reflection_plus;
  double L = 1.0;

  int collapse(bool plus_end) const { return plus_end ? collapse_plus : collapse_minus; }
  double slope(bool plus_end) const { return plus_end ? slope_plus : slope_minus; }
  const Reflection& reflection(bool plus_end) const {
    return plus_end ? reflection_plus : reflection_minus;
  }
  bool has_poles() const { return family != Family::Cylinder; }

  /// Indices that never collapse (constant GZ directions).
  std::vector<int> noncollapsing_axes() const {
    std::vector<int> out;
    for (int a = 1; a <= 3; ++a)
      if (!has_poles() || (a != collapse_minus && a != collapse_plus)) out.push_back(a);
    return out;
  }

  std::string name() const {
    if (family == Family::Mn) return "M" + std::to_string(n);
    return to_string(family);
  }

  void validate() const {
    require(c > 0 && std::isfinite(c), "structure constant c must be positive");
    require(L > 0 && std::isfinite(L), "interval length L must be positive");
    if (family == Family::Mn) require(n >= 1, "Mn requires n >= 1");
    if (!has_poles()) return;
    require(collapse_minus >= 1 && collapse_minus <= 3, "collapse_minus must be in {1,2,3}");
    require(collapse_plus >= 1 && collapse_plus <= 3, "collapse_plus must be in {1,2,3}");
    require(slope_minus > 0 && slope_plus > 0, "smoothness slopes must be positive");
    for (bool plus : {false, true}) {
      const auto& R = reflection(plus);
      const int k = collapse(plus);
      require(R.is_involution(), "reflection permutation must be an involution");
      require(R.perm[k] == k, "collapsing index must be fixed by its reflection");
    }
  }

  /// Defaults for the families of the classification table. Slopes follow
  /// the model metrics (S4: 2c at both ends; CP2: c at B-, 2c at B+) and the
  /// calibrated value c for Mn. L is sized for a unit plateau.
  static ManifoldSpec make(Family family, double c = 2.0, int n = 2) {
    ManifoldSpec s;
    s.family = family;
    s.c = c;
    switch (family) {
      case Family::S4:
        s.collapse_minus = 1;
        s.collapse_plus = 3;
        s.slope_minus = s.slope_plus = 2.0 * c;
        s.reflection_minus = Reflection::swap(2, 3);
        s.reflection_plus = Reflection::swap(1, 2);
        break;
      case Family::CP2:
        s.collapse_minus = 1;
        s.collapse_plus = 2;
        s.slope_minus = c;
        s.slope_plus = 2.0 * c;
        s.reflection_minus = Reflection::identity();
        s.reflection_plus = Reflection::swap(1, 3);
        break;
      case Family::Mn:
        s.n = n;
        s.collapse_minus = s.collapse_plus = 1;
        s.slope_minus = s.slope_plus = c;
        break;
      case Family::Cylinder:
        s.collapse_minus = s.collapse_plus = 0;
        s.slope_minus = s.slope_plus = 0;
        break;
    }
    for (bool plus : {false, true}) {
      if (!s.has_poles()) break;
      auto& R = plus ? s.reflection_plus : s.reflection_minus;
      R.sign[s.collapse(plus)] = -1;
    }
    const double smin = s.has_poles() ? std::min(s.slope_minus, s.slope_plus) : 1.0;
    s.L = 20.0 / smin;
    return s;
  }
};

/// Staggered grid r_i = (i + 1/2) h, h = L/N. No node sits on a pole.
struct Grid {
  int N = 0;
  double L = 0;

  Grid() = default;
  Grid(int n, double length) : N(n), L(length) {
    require(n >= 4, "grid needs at least 4 nodes");
    require(length > 0 && std::isfinite(length), "grid length must be positive");
  }

  double h() const { return L / N; }
  double r(int i) const { return (i + 0.5) * h(); }
  std::vector<double> nodes() const {
    std::vector<double> out(N);
    for (int i = 0; i < N; ++i) out[i] = r(i);
    return out;
  }
};

/// Exact r-derivatives of the four profiles, attached to analytically built
/// metrics. Evolved states never carry them.
struct ProfileDerivatives {
  std::array<std::vector<double>, 4> d1;
  std::array<std::vector<double>, 4> d2;
};

/// Metric state at one time: zeta, phi, psi, xi sampled on the grid.
struct ProfileSet {
  Grid grid;
  double t = 0.0;
  std::array<std::vector<double>, 4> f;  // 0 zeta, 1 phi, 2 psi, 3 xi
  ManifoldSpec spec;
  std::optional<ProfileDerivatives> exact;

  const std::vector<double>& zeta() const { return f[0]; }
  const std::vector<double>& phi() const { return f[1]; }
  const std::vector<double>& psi() const { return f[2]; }
  const std::vector<double>& xi() const { return f[3]; }

  static ProfileSet allocate(const Grid& g, const ManifoldSpec& s) {
    ProfileSet p;
    p.grid = g;
    p.spec = s;
    for (auto& a : p.f) a.assign(g.N, 0.0);
    return p;
  }

  bool all_positive() const {
    for (const auto& a : f)
      for (double v : a)
        if (!(v > 0) || !std::isfinite(v)) return false;
    return true;
  }
};

inline const char* profile_name(int a) {
  static constexpr const char* names[] = {"zeta", "phi", "psi", "xi"};
  return names[a];
}

}  // namespace cohomflow
