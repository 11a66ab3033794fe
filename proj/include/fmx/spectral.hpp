#pragma once

// Quasi-energy spectra and the localization / level-statistics diagnostics
// computed from them.

#include <utility>
#include <vector>

#include "fmx/evolution.hpp"
#include "fmx/types.hpp"

namespace fmx {

struct FloquetSpectrum {
  RealVector quasi_energies;  // mu in [-pi, pi), ascending
  ComplexMatrix states;       // column a is |phi_a>, U|phi_a> = exp(-i mu_a)|phi_a>
  double period = 0.0;

  int dim() const { return static_cast<int>(quasi_energies.size()); }
};

struct LevelStatistics {
  std::vector<double> ratios;
  double mean_r = 0.0;
  std::vector<double> bin_edges;  // bins + 1 edges on [0, 1]
  std::vector<long> counts;
  int zero_spacings = 0;  // ratios set to 0 because both neighbouring gaps vanished
};

struct LongTimeEnergy {
  double value = 0.0;
  double min_gap = 0.0;      // smallest quasi-energy gap, wrap-around included
  bool degenerate = false;   // min_gap below the degeneracy threshold
};

inline constexpr double kDegeneracyGap = 1e-10;

/// Eigen-decomposition of a unitary U with orthonormal eigenvectors. The
/// residual ||U phi - exp(-i mu) phi|| is checked against 1e-9.
FloquetSpectrum diagonalize(const FloquetOperator& U);
FloquetSpectrum diagonalize_unitary(const ComplexMatrix& u, double period);

/// Largest eigen-residual over all states.
double eigen_residual(const ComplexMatrix& u, const FloquetSpectrum& spectrum);

/// S = -sum_n |C_n|^2 ln |C_n|^2.
double shannon_entropy(const ComplexVector& state);
std::vector<double> shannon_entropies(const FloquetSpectrum& spectrum);

/// <phi_a| observable |phi_a> for every Floquet state.
std::vector<double> state_expectations(const FloquetSpectrum& spectrum, const RealMatrix& observable);

/// sum_a |<phi_a|psi0>|^2 <phi_a|h0|phi_a>, valid when quasi-energies are not degenerate.
LongTimeEnergy long_time_energy(const FloquetSpectrum& spectrum, const ComplexVector& psi0, const RealMatrix& h0);

/// (1/(n_av+1)) sum_{n=0}^{n_av} E(nT).
double finite_time_energy(const FloquetOperator& U, const ComplexVector& psi0, const RealMatrix& h0, int n_av);

/// finite_time_energy for several n_av from a single propagation.
std::vector<double> finite_time_energies(const FloquetOperator& U, const ComplexVector& psi0, const RealMatrix& h0,
                                         const std::vector<int>& n_av);

LevelStatistics level_spacing_stats(const FloquetSpectrum& spectrum, int bins = 50);

/// (P_WD(r), P_POI(r)).
std::pair<double, double> reference_distributions(double r);

double smallest_quasi_energy_gap(const RealVector& sorted_mu);

}  // namespace fmx
