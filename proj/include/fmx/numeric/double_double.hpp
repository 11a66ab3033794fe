#pragma once

// Double-double arithmetic: a value is the unevaluated sum hi + lo with
// |lo| <= ulp(hi)/2, giving a 106-bit significand (about 32 decimal digits).
// The error-free transformations follow Dekker and Knuth; products use a
// hardware fused multiply-add.

#include <cmath>
#include <limits>
#include <ostream>

namespace fmx::numeric {

namespace eft {

// s + e == a + b exactly.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// Requires |a| >= |b|.
inline void quick_two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  e = b - (s - a);
}

// p + e == a * b exactly.
inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace eft

class DoubleDouble {
 public:
  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double x) : hi_(x) {}  // NOLINT: implicit by design of the scalar concept
  constexpr DoubleDouble(double hi, double lo) : hi_(hi), lo_(lo) {}

  constexpr double hi() const { return hi_; }
  constexpr double lo() const { return lo_; }
  double to_double() const { return hi_ + lo_; }

  friend DoubleDouble operator-(DoubleDouble a) { return {-a.hi_, -a.lo_}; }

  friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
    double s, e, t, f;
    eft::two_sum(a.hi_, b.hi_, s, e);
    eft::two_sum(a.lo_, b.lo_, t, f);
    e += t;
    double s2, e2;
    eft::quick_two_sum(s, e, s2, e2);
    e2 += f;
    double s3, e3;
    eft::quick_two_sum(s2, e2, s3, e3);
    return {s3, e3};
  }
  friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

  friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
    double p, e;
    eft::two_prod(a.hi_, b.hi_, p, e);
    e += a.hi_ * b.lo_ + a.lo_ * b.hi_;
    double s, f;
    eft::quick_two_sum(p, e, s, f);
    return {s, f};
  }

  friend DoubleDouble operator/(DoubleDouble a, DoubleDouble b) {
    const double q1 = a.hi_ / b.hi_;
    DoubleDouble r = a - b * DoubleDouble(q1);
    const double q2 = r.hi_ / b.hi_;
    r = r - b * DoubleDouble(q2);
    const double q3 = r.hi_ / b.hi_;
    double s, e;
    eft::quick_two_sum(q1, q2, s, e);
    return DoubleDouble(s, e) + DoubleDouble(q3);
  }

  DoubleDouble& operator+=(DoubleDouble b) { return *this = *this + b; }
  DoubleDouble& operator-=(DoubleDouble b) { return *this = *this - b; }
  DoubleDouble& operator*=(DoubleDouble b) { return *this = *this * b; }
  DoubleDouble& operator/=(DoubleDouble b) { return *this = *this / b; }

  friend bool operator==(DoubleDouble a, DoubleDouble b) { return a.hi_ == b.hi_ && a.lo_ == b.lo_; }
  friend bool operator<(DoubleDouble a, DoubleDouble b) {
    return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
  }

  friend std::ostream& operator<<(std::ostream& os, DoubleDouble a) {
    return os << a.hi_ << (a.lo_ < 0 ? " - " : " + ") << std::abs(a.lo_);
  }

 private:
  double hi_ = 0.0;
  double lo_ = 0.0;
};

inline DoubleDouble abs(DoubleDouble a) { return a.hi() < 0 ? -a : a; }

inline DoubleDouble sqrt(DoubleDouble a) {
  if (a.hi() <= 0.0) return DoubleDouble(std::sqrt(a.hi()));
  // One Newton step on the double seed doubles the number of correct bits.
  const double x = std::sqrt(a.hi());
  const DoubleDouble xx = DoubleDouble(x) * DoubleDouble(x);
  return DoubleDouble(x) + (a - xx) / DoubleDouble(2.0 * x);
}

inline double to_double(DoubleDouble a) { return a.to_double(); }

}  // namespace fmx::numeric
