#pragma once

// Floquet-Magnus coefficients of the step protocol from the recursive BCH
// scheme. With X = -i(h0-h1)/2 and Y = -i(h0+h1)/2,
//   U(T) = exp(T X) exp(T Y) = exp(sum_n T^n R_n),   Omega_n = i R_{n+1}.

#include <string>
#include <vector>

#include "fmx/operators.hpp"
#include "fmx/types.hpp"

namespace fmx {

enum class Precision {
  Double,
  Extended,  // double-double, about 32 significant digits
  Quad,      // quad-double, used as the reference that certifies Extended
  Octuple,   // MPFR with 128 digits, the reference that certifies Quad
};

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view name);
/// The precision a result is certified against (Octuple maps to itself).
Precision reference_precision(Precision p);

struct BchFactors {
  ComplexMatrix x;
  ComplexMatrix y;

  /// Step-protocol factors: x = -i(h0-h1)/2, y = -i(h0+h1)/2.
  static BchFactors step_protocol(const TruncatedSystem& system);
  void validate(double tol = 1e-12) const;
};

/// R_1..R_N of exp(X) exp(Y) = exp(sum R_n), computed in complex double.
std::vector<ComplexMatrix> klarsfeld_terms(const BchFactors& f, int order);

struct MagnusSeries {
  std::vector<ComplexMatrix> terms;  // Omega_0 .. Omega_{size-1}
  int dim = 0;
  int order = 0;                     // requested N
  Precision precision = Precision::Extended;
  int trust_order = -1;              // certified prefix; terms beyond it are dropped
  int parity = 0;                    // parity of h1 (+1/-1) when the basis symmetry was used, else 0
  std::vector<std::string> warnings;

  int available_order() const { return static_cast<int>(terms.size()) - 1; }
};

struct MagnusOptions {
  bool certify = true;        // compare against the next precision up
  double certify_tol = 1e-6;  // relative Frobenius deviation
};

/// Omega_0..Omega_N at the given precision without any certification
/// (trust_order is set to N).
MagnusSeries magnus_series_uncertified(const TruncatedSystem& system, int order, Precision precision);

/// Omega_0..Omega_N with trust_order from a cross-precision comparison
/// (Double against Extended, Extended against Quad, Quad against Octuple). Terms past trust_order
/// are dropped and a warning is attached.
MagnusSeries magnus_series(const TruncatedSystem& system, int order, Precision precision,
                           const MagnusOptions& options = {});

/// Largest n such that every m <= n satisfies
/// ||Omega_m^lo - Omega_m^hi||_F / ||Omega_m^hi||_F < tol.
int certify_precision(const MagnusSeries& lower, const MagnusSeries& higher, double tol = 1e-6);

/// Relative Frobenius deviation per order, for diagnostics.
std::vector<double> precision_deviation(const MagnusSeries& lower, const MagnusSeries& higher);

/// sum_{n <= N} Omega_n T^n.
ComplexMatrix truncated_floquet_hamiltonian(const MagnusSeries& series, double T, int max_order);

}  // namespace fmx
