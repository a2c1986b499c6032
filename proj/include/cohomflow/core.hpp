#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cohomflow {

/// Rejected input: bad parameters, inconsistent specs, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nonfinite values or a stepper that cannot make progress.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

/// First-order forward-mode jet in the orbit-space coordinate r:
/// value and d/dr. Enough to differentiate connection coefficients once.
template <typename T>
struct Jet {
  T v{};
  T d{};

  constexpr Jet() = default;
  constexpr Jet(T value, T deriv = T{}) : v(value), d(deriv) {}

  friend constexpr Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d}; }
  friend constexpr Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d}; }
  friend constexpr Jet operator-(Jet a) { return {-a.v, -a.d}; }
  friend constexpr Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend constexpr Jet operator/(Jet a, Jet b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
  }
  friend constexpr Jet operator*(T s, Jet a) { return {s * a.v, s * a.d}; }
  friend constexpr Jet operator*(Jet a, T s) { return {s * a.v, s * a.d}; }
};

template <typename T>
constexpr T sqr(T x) {
  return x * x;
}

}  // namespace cohomflow
