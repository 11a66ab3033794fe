#pragma once

// Common surface of the real scalar types used by the Magnus engine.

#include <cmath>
#include <concepts>

#include "fmx/numeric/double_double.hpp"
#include "fmx/numeric/octuple.hpp"
#include "fmx/numeric/quad_double.hpp"

namespace fmx::numeric {

inline double to_double(double a) { return a; }

template <class T>
concept RealScalar = requires(T a, T b, double d) {
  { a + b } -> std::convertible_to<T>;
  { a - b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
  { a / b } -> std::convertible_to<T>;
  { T(d) };
  { to_double(a) } -> std::convertible_to<double>;
};

/// Unit roundoff of each representation.
template <class T>
constexpr double unit_roundoff();
template <>
constexpr double unit_roundoff<double>() { return 0x1p-53; }
template <>
constexpr double unit_roundoff<DoubleDouble>() { return 0x1p-105; }
template <>
constexpr double unit_roundoff<QuadDouble>() { return 0x1p-209; }
template <>
constexpr double unit_roundoff<Octuple>() { return 0x1p-425; }

template <RealScalar T>
T real_sqrt(const T& x) {
  using std::sqrt;
  return sqrt(x);
}

}  // namespace fmx::numeric
