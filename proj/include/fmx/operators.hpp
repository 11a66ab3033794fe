#pragma once

// Truncated matrix representations of the model Hamiltonians.
//
// Oscillator models live in the harmonic-oscillator number basis |j>,
// j = 0..D-1, with the zero-point energy dropped. The kicked rotor lives in
// the momentum basis |n>, n = -(D-1)/2..(D-1)/2.

#include <string>
#include <string_view>
#include <vector>

#include "fmx/errors.hpp"
#include "fmx/numeric/real.hpp"
#include "fmx/types.hpp"

namespace fmx {

enum class ModelKind { DrivenHO, ParametricHO, AnharmonicOsc, KickedRotor };
enum class BasisKind { HarmonicOscillator, Momentum };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Parameters of one driven model. Only the fields relevant to `kind` may be
/// non-zero: g for the oscillators, beta for the anharmonic oscillator and K
/// for the kicked rotor.
struct ModelSpec {
  ModelKind kind = ModelKind::DrivenHO;
  double omega0 = 1.0;
  double g = 0.0;
  double beta = 0.0;
  double K = 0.0;

  static ModelSpec driven_ho(double omega0, double g);
  static ModelSpec parametric_ho(double omega0, double g);
  static ModelSpec anharmonic(double omega0, double g, double beta);
  static ModelSpec kicked_rotor(double K);

  /// Throws ParameterError when an invariant is violated.
  void validate() const;
  bool is_oscillator() const { return kind != ModelKind::KickedRotor; }
};

/// H(t) = h0 + lambda(t) h1 truncated to `dim` basis states.
struct TruncatedSystem {
  ModelSpec spec;
  int dim = 0;
  RealMatrix h0;
  RealMatrix h1;
  BasisKind basis = BasisKind::HarmonicOscillator;
};

/// Exact matrix elements <i|x^k|j> of the k-th power of the oscillator
/// position operator (k <= 8). Built from x on dim + k states and cropped, so
/// that the result is the truncation of x^k rather than the k-th power of a
/// truncated x.
RealMatrix build_ladder_power(double omega0, int k, int dim);

TruncatedSystem build_system(const ModelSpec& spec, int dim);

/// <i|p|j> = i sqrt(omega0/2) (sqrt(j+1) delta_{i,j+1} - sqrt(j) delta_{i,j-1}).
ComplexMatrix momentum_matrix(double omega0, int dim);

/// diag(j omega0): the harmonic-oscillator Hamiltonian without zero-point energy.
RealMatrix ho_energy_matrix(double omega0, int dim);

/// Momentum quantum numbers n of the kicked-rotor window, in basis order.
std::vector<int> momentum_window(int dim);

/// Basis index of the zero-momentum state (kicked rotor) or ground state.
int reference_state_index(const TruncatedSystem& system);

ComplexVector basis_state(int dim, int index);

/// Relative Frobenius asymmetry ||M - M^T|| / ||M|| (0 for the zero matrix).
double hermiticity_defect(const RealMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);

namespace detail {

inline void check_ladder_args(int k, int dim) {
  if (k < 0 || k > 8) throw ParameterError("ladder power k must be in [0, 8], got " + std::to_string(k));
  if (dim < 1) throw ParameterError("dimension must be >= 1, got " + std::to_string(dim));
}

/// Row-major dim x dim entries of <i|x^k|j> in scalar type T.
template <numeric::RealScalar T>
std::vector<T> ladder_power_entries(double omega0, int k, int dim) {
  check_ladder_args(k, dim);
  if (!(omega0 > 0.0)) throw ParameterError("omega0 must be > 0");
  const int padded = dim + k;
  const T scale = T(1.0) / T(2.0 * omega0);
  std::vector<T> offdiag(static_cast<std::size_t>(padded));  // offdiag[j] = <j-1|x|j>
  for (int j = 1; j < padded; ++j) offdiag[static_cast<std::size_t>(j)] = numeric::real_sqrt(T(double(j)) * scale);

  // Powers of x are banded; keep the full padded square for simplicity.
  const auto n = static_cast<std::size_t>(padded);
  std::vector<T> power(n * n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) power[i * n + i] = T(1.0);
  std::vector<T> next(n * n);
  for (int step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), T(0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        // (P x)_{ij} = P_{i,j-1} x_{j-1,j} + P_{i,j+1} x_{j+1,j}
        T acc(0.0);
        if (j >= 1) acc = acc + power[i * n + j - 1] * offdiag[j];
        if (j + 1 < n) acc = acc + power[i * n + j + 1] * offdiag[j + 1];
        next[i * n + j] = acc;
      }
    }
    std::swap(power, next);
  }
  const auto d = static_cast<std::size_t>(dim);
  std::vector<T> out(d * d);
  // x^k is symmetric; mirror the upper triangle so rounding keeps it exactly so.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) out[i * d + j] = out[j * d + i] = power[i * n + j];
  return out;
}

template <numeric::RealScalar T>
struct SystemEntries {
  int dim = 0;
  std::vector<T> h0;  // row-major
  std::vector<T> h1;
};

/// Oscillator Hamiltonian entries in scalar type T; the same formulas as
/// build_system, evaluated at the working precision of the caller.
template <numeric::RealScalar T>
SystemEntries<T> oscillator_entries(const ModelSpec& spec, int dim) {
  spec.validate();
  if (!spec.is_oscillator()) throw ParameterError("oscillator_entries: kicked rotor has no oscillator basis");
  if (dim < 2) throw ParameterError("dimension must be >= 2");
  const auto d = static_cast<std::size_t>(dim);
  SystemEntries<T> out;
  out.dim = dim;
  out.h0.assign(d * d, T(0.0));
  out.h1.assign(d * d, T(0.0));
  for (std::size_t j = 0; j < d; ++j) out.h0[j * d + j] = T(double(j)) * T(spec.omega0);

  switch (spec.kind) {
    case ModelKind::DrivenHO: {
      const auto x = ladder_power_entries<T>(spec.omega0, 1, dim);
      for (std::size_t i = 0; i < d * d; ++i) out.h1[i] = T(spec.g) * x[i];
      break;
    }
    case ModelKind::ParametricHO: {
      const auto x2 = ladder_power_entries<T>(spec.omega0, 2, dim);
      for (std::size_t i = 0; i < d * d; ++i) out.h1[i] = T(spec.g) * x2[i] / T(2.0);
      break;
    }
    case ModelKind::AnharmonicOsc: {
      const auto x = ladder_power_entries<T>(spec.omega0, 1, dim);
      for (std::size_t i = 0; i < d * d; ++i) out.h1[i] = T(spec.g) * x[i];
      if (spec.beta != 0.0) {
        const auto x4 = ladder_power_entries<T>(spec.omega0, 4, dim);
        for (std::size_t i = 0; i < d * d; ++i) out.h0[i] = out.h0[i] + T(spec.beta) * x4[i] / T(4.0);
      }
      break;
    }
    case ModelKind::KickedRotor:
      break;
  }
  return out;
}

}  // namespace detail

}  // namespace fmx
