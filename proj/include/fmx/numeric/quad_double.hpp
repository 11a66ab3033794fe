#pragma once

// Quad-double arithmetic (about 64 decimal digits), used as the reference
// precision when certifying double-double results. Addition and
// multiplication are the "sloppy" variants of Hida, Li and Bailey: the error
// is bounded relative to the operand magnitudes, which is all the rounding
// analysis of the Magnus recursion relies on.

#include <array>
#include <cmath>

#include "fmx/numeric/double_double.hpp"

namespace fmx::numeric {

namespace eft {

inline void three_sum(double& a, double& b, double& c) {
  double t1, t2, t3;
  two_sum(a, b, t1, t2);
  two_sum(c, t1, a, t3);
  two_sum(t2, t3, b, c);
}

inline void three_sum2(double& a, double& b, double c) {
  double t1, t2, t3;
  two_sum(a, b, t1, t2);
  two_sum(c, t1, a, t3);
  b = t2 + t3;
}

// Branch-free renormalization: a bottom-up quick_two_sum sweep followed by a
// top-down two_sum sweep. Unlike the zero-tracking variant of the QD library
// the components may occasionally overlap slightly, which costs a few bits at
// most and lets the compiler vectorize matrix kernels.
inline void renorm(double& c0, double& c1, double& c2, double& c3, double c4) {
  double s, t;
  quick_two_sum(c3, c4, s, c4);
  quick_two_sum(c2, s, s, c3);
  quick_two_sum(c1, s, s, c2);
  quick_two_sum(c0, s, c0, c1);
  two_sum(c1, c2, c1, t);
  two_sum(t, c3, c2, s);
  c3 = s + c4;
}

}  // namespace eft

class QuadDouble {
 public:
  constexpr QuadDouble() = default;
  constexpr QuadDouble(double x) : c_{x, 0.0, 0.0, 0.0} {}  // NOLINT
  constexpr QuadDouble(double c0, double c1, double c2, double c3) : c_{c0, c1, c2, c3} {}
  QuadDouble(DoubleDouble x) : c_{x.hi(), x.lo(), 0.0, 0.0} {}  // NOLINT

  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double to_double() const { return c_[0] + (c_[1] + (c_[2] + c_[3])); }

  friend QuadDouble operator-(const QuadDouble& a) { return {-a.c_[0], -a.c_[1], -a.c_[2], -a.c_[3]}; }

  friend QuadDouble operator+(const QuadDouble& a, const QuadDouble& b) {
    double s0, s1, s2, s3, t0, t1, t2, t3;
    eft::two_sum(a.c_[0], b.c_[0], s0, t0);
    eft::two_sum(a.c_[1], b.c_[1], s1, t1);
    eft::two_sum(a.c_[2], b.c_[2], s2, t2);
    eft::two_sum(a.c_[3], b.c_[3], s3, t3);
    eft::two_sum(s1, t0, s1, t0);
    eft::three_sum(s2, t0, t1);
    eft::three_sum2(s3, t0, t2);
    t0 = t0 + t1 + t3;
    eft::renorm(s0, s1, s2, s3, t0);
    return {s0, s1, s2, s3};
  }
  friend QuadDouble operator-(const QuadDouble& a, const QuadDouble& b) { return a + (-b); }

  friend QuadDouble operator*(const QuadDouble& a, const QuadDouble& b) {
    double p0, p1, p2, p3, p4, p5, q0, q1, q2, q3, q4, q5;
    eft::two_prod(a.c_[0], b.c_[0], p0, q0);
    eft::two_prod(a.c_[0], b.c_[1], p1, q1);
    eft::two_prod(a.c_[1], b.c_[0], p2, q2);
    eft::two_prod(a.c_[0], b.c_[2], p3, q3);
    eft::two_prod(a.c_[1], b.c_[1], p4, q4);
    eft::two_prod(a.c_[2], b.c_[0], p5, q5);

    eft::three_sum(p1, p2, q0);

    // (p2, q1, q2) + (p3, p4, p5)
    eft::three_sum(p2, q1, q2);
    eft::three_sum(p3, p4, p5);
    double s0, s1, s2, t0, t1;
    eft::two_sum(p2, p3, s0, t0);
    eft::two_sum(q1, p4, s1, t1);
    s2 = q2 + p5;
    eft::two_sum(s1, t0, s1, t0);
    s2 += (t0 + t1);

    s1 += a.c_[0] * b.c_[3] + a.c_[1] * b.c_[2] + a.c_[2] * b.c_[1] + a.c_[3] * b.c_[0] + q0 + q3 + q4 + q5;
    eft::renorm(p0, p1, s0, s1, s2);
    return {p0, p1, s0, s1};
  }

  friend QuadDouble operator/(const QuadDouble& a, const QuadDouble& b) {
    // Long division, one double-sized quotient digit at a time.
    const double q0 = a.c_[0] / b.c_[0];
    QuadDouble r = a - b * QuadDouble(q0);
    const double q1 = r.c_[0] / b.c_[0];
    r = r - b * QuadDouble(q1);
    const double q2 = r.c_[0] / b.c_[0];
    r = r - b * QuadDouble(q2);
    const double q3 = r.c_[0] / b.c_[0];
    r = r - b * QuadDouble(q3);
    const double q4 = r.c_[0] / b.c_[0];
    double c0 = q0, c1 = q1, c2 = q2, c3 = q3;
    eft::renorm(c0, c1, c2, c3, q4);
    return {c0, c1, c2, c3};
  }

  QuadDouble& operator+=(const QuadDouble& b) { return *this = *this + b; }
  QuadDouble& operator-=(const QuadDouble& b) { return *this = *this - b; }
  QuadDouble& operator*=(const QuadDouble& b) { return *this = *this * b; }
  QuadDouble& operator/=(const QuadDouble& b) { return *this = *this / b; }

  friend bool operator==(const QuadDouble& a, const QuadDouble& b) { return a.c_ == b.c_; }

 private:
  std::array<double, 4> c_{};
};

inline QuadDouble abs(const QuadDouble& a) { return a[0] < 0 ? -a : a; }

inline QuadDouble sqrt(const QuadDouble& a) {
  if (a[0] <= 0.0) return QuadDouble(std::sqrt(a[0]));
  // Newton iteration for 1/sqrt(a), then multiply by a.
  QuadDouble x(1.0 / std::sqrt(a[0]));
  const QuadDouble half(0.5);
  for (int it = 0; it < 3; ++it) {
    x = x + x * (half - half * a * x * x);
  }
  return a * x;
}

inline double to_double(const QuadDouble& a) { return a.to_double(); }

}  // namespace fmx::numeric
