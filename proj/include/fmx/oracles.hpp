#pragma once

// Independent references: closed-form results and brute-force constructions
// that the numerical pipeline is checked against.

#include <array>
#include <optional>

#include <Eigen/Core>

#include "fmx/evolution.hpp"
#include "fmx/magnus.hpp"
#include "fmx/types.hpp"

namespace fmx {

/// Exact Floquet Hamiltonian of the step-driven harmonic oscillator,
/// H_F = h0 - (g/omega0) tan(omega0 T/4) p (zero-point energy dropped).
struct AnalyticHF {
  double omega0 = 1.0;
  double g = 0.0;
  double T = 0.0;

  /// Distance of omega0 T / 4 from the nearest pole of tan, in units of T.
  double pole_distance() const;
  bool near_pole(double tol = 1e-6) const { return pole_distance() < tol; }
  ComplexMatrix matrix(int dim) const;
  /// The c-number part of log U that the Heisenberg-picture derivation of the
  /// matrix above cannot see: (i/T) log U = matrix + identity_shift * 1, with
  /// identity_shift = (g^2 / 2 omega0^2) (4 tan(x) / (omega0 T) - 1 + tan^2 x),
  /// x = omega0 T / 4. It is g^2 T^2 / 24 + O(T^4).
  double identity_shift() const;
  /// matrix(dim) + identity_shift() * 1.
  ComplexMatrix exact_matrix(int dim) const;
};

ComplexMatrix analytic_hf_driven_ho(double omega0, double g, double T, int dim);

struct LogResult {
  ComplexMatrix hf;     // (i/T) log U
  RealVector energies;  // eigenvalues of hf, aligned with the Floquet states
  bool wrapped = false; // principal branch only: some |mu| is within 1e-6 of pi
};

/// (i/T) log U on the principal branch, mu in (-pi, pi].
LogResult hf_from_log(const FloquetOperator& U);

/// (i/T) log U with the branch of every eigenphase chosen so that
/// (mu + 2 pi k)/T is closest to <phi|reference|phi>. Passing h0 recovers the
/// branch that is continuous from T = 0 away from resonances.
LogResult hf_from_log(const FloquetOperator& U, const RealMatrix& reference);

/// R_1..R_4 of exp(X) exp(Y) from the commutator closed forms.
std::array<ComplexMatrix, 4> bch_reference(const ComplexMatrix& x, const ComplexMatrix& y);

struct Monodromy {
  Eigen::Matrix2d m;
  double trace = 0.0;
  bool unstable = false;  // |trace| > 2
};

/// Classical one-period map of x'' = -(omega0^2 +/- g) x for the parametric
/// step drive (+ on the first half period).
Monodromy parametric_monodromy(double omega0, double g, double T);

/// Unstable T-interval of the classical parametric oscillator that contains
/// `T_inside`, located by bisection on |trace| - 2 within [T_inside - half_span,
/// T_inside + half_span]. Empty when T_inside is stable.
std::optional<std::pair<double, double>> parametric_instability_interval(double omega0, double g, double T_inside,
                                                                         double half_span);

}  // namespace fmx
