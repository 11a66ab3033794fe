#pragma once

// MPFR float with 128 significant digits (about 425 bits), the reference that
// certifies quad-double Magnus terms. Stack-allocated limbs keep matrix
// kernels free of heap traffic; it is still about four times slower than
// QuadDouble.

#include <boost/multiprecision/mpfr.hpp>

namespace fmx::numeric {

using Octuple = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<128, boost::multiprecision::allocate_stack>,
    boost::multiprecision::et_off>;

inline double to_double(const Octuple& a) { return mpfr_get_d(a.backend().data(), MPFR_RNDN); }

/// c += a * b with a single rounding.
inline void fma_into(Octuple& c, const Octuple& a, const Octuple& b) {
  mpfr_fma(c.backend().data(), a.backend().data(), b.backend().data(), c.backend().data(), MPFR_RNDN);
}

}  // namespace fmx::numeric
