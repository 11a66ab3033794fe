#include "fmx/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace fmx {

namespace {

constexpr double kResidualTol = 1e-9;
// Eigenvalues of the Hermitian surrogate closer than this are treated as one
// cluster and separated by a Rayleigh-Ritz step on U itself.
constexpr double kClusterGap = 1e-5;
constexpr double kSurrogateShift = 0.5;

double wrap_phase(double mu) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(mu + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  if (w >= std::numbers::pi) w -= two_pi;
  return w;
}

ComplexMatrix as_complex(const RealMatrix& m) { return m.cast<Complex>(); }

}  // namespace

FloquetSpectrum diagonalize(const FloquetOperator& U) { return diagonalize_unitary(U.u, U.period); }

FloquetSpectrum diagonalize_unitary(const ComplexMatrix& u, double period) {
  const Eigen::Index d = u.rows();
  if (d == 0 || u.cols() != d) throw ParameterError("diagonalize: matrix must be square and non-empty");
  if (!(unitarity_defect(u) < 1e-9)) throw ValidationError("diagonalize: matrix is not unitary");

  // K = (e^{-i theta} U + h.c.)/2 is Hermitian, commutes with U and has
  // eigenvalues cos(mu + theta). Distinct mu can share a value of K, so
  // near-degenerate clusters of K are resolved with U restricted to them.
  const Complex rot = std::exp(Complex(0.0, -kSurrogateShift));
  const ComplexMatrix k = 0.5 * (rot * u + std::conj(rot) * u.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(k);
  if (es.info() != Eigen::Success) throw NumericalError("diagonalize: Hermitian eigensolver did not converge");
  ComplexMatrix vecs = es.eigenvectors();
  const RealVector& kvals = es.eigenvalues();

  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && kvals(end) - kvals(end - 1) < kClusterGap) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      const ComplexMatrix block = vecs.middleCols(start, size);
      const ComplexMatrix small = block.adjoint() * u * block;
      // Restricted U is normal up to rounding, so its Schur vectors are eigenvectors.
      Eigen::ComplexSchur<ComplexMatrix> schur(small);
      if (schur.info() != Eigen::Success) throw NumericalError("diagonalize: Schur step did not converge");
      vecs.middleCols(start, size) = block * schur.matrixU();
    }
    start = end;
  }

  const ComplexMatrix uv = u * vecs;
  std::vector<double> mu(static_cast<std::size_t>(d));
  for (Eigen::Index a = 0; a < d; ++a) {
    const Complex lambda = vecs.col(a).dot(uv.col(a));
    mu[static_cast<std::size_t>(a)] = wrap_phase(-std::arg(lambda));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return mu[static_cast<std::size_t>(a)] < mu[static_cast<std::size_t>(b)];
  });

  FloquetSpectrum spec;
  spec.period = period;
  spec.quasi_energies.resize(d);
  spec.states.resize(d, d);
  double worst = 0.0;
  for (Eigen::Index a = 0; a < d; ++a) {
    const Eigen::Index src = order[static_cast<std::size_t>(a)];
    const double m = mu[static_cast<std::size_t>(src)];
    spec.quasi_energies(a) = m;
    spec.states.col(a) = vecs.col(src);
    worst = std::max(worst, (uv.col(src) - std::exp(Complex(0.0, -m)) * vecs.col(src)).norm());
  }
  if (!(worst < kResidualTol))
    throw NumericalError("diagonalize: eigen-residual " + std::to_string(worst) + " exceeds tolerance");
  return spec;
}

double eigen_residual(const ComplexMatrix& u, const FloquetSpectrum& spectrum) {
  const ComplexMatrix uv = u * spectrum.states;
  double worst = 0.0;
  for (int a = 0; a < spectrum.dim(); ++a) {
    const Complex phase = std::exp(Complex(0.0, -spectrum.quasi_energies(a)));
    worst = std::max(worst, (uv.col(a) - phase * spectrum.states.col(a)).norm());
  }
  return worst;
}

double shannon_entropy(const ComplexVector& state) {
  detail::require_normalized(state, 1e-8, "shannon_entropy");
  double s = 0.0;
  for (Eigen::Index n = 0; n < state.size(); ++n) {
    const double p = std::norm(state(n));
    if (p >= 1e-300) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

std::vector<double> shannon_entropies(const FloquetSpectrum& spectrum) {
  std::vector<double> out(static_cast<std::size_t>(spectrum.dim()));
  for (int a = 0; a < spectrum.dim(); ++a) out[static_cast<std::size_t>(a)] = shannon_entropy(spectrum.states.col(a));
  return out;
}

std::vector<double> state_expectations(const FloquetSpectrum& spectrum, const RealMatrix& observable) {
  if (observable.rows() != spectrum.dim() || observable.cols() != spectrum.dim())
    throw ParameterError("state_expectations: dimension mismatch");
  const ComplexMatrix ov = as_complex(observable) * spectrum.states;
  std::vector<double> out(static_cast<std::size_t>(spectrum.dim()));
  for (int a = 0; a < spectrum.dim(); ++a) out[static_cast<std::size_t>(a)] = spectrum.states.col(a).dot(ov.col(a)).real();
  return out;
}

double smallest_quasi_energy_gap(const RealVector& mu) {
  const Eigen::Index d = mu.size();
  if (d < 2) return 2.0 * std::numbers::pi;
  double gap = mu(0) + 2.0 * std::numbers::pi - mu(d - 1);
  for (Eigen::Index a = 0; a + 1 < d; ++a) gap = std::min(gap, mu(a + 1) - mu(a));
  return gap;
}

LongTimeEnergy long_time_energy(const FloquetSpectrum& spectrum, const ComplexVector& psi0, const RealMatrix& h0) {
  if (psi0.size() != spectrum.dim()) throw ParameterError("long_time_energy: dimension mismatch");
  detail::require_normalized(psi0, 1e-10, "long_time_energy");
  const auto diag = state_expectations(spectrum, h0);
  const ComplexVector c = spectrum.states.adjoint() * psi0;
  LongTimeEnergy out;
  for (int a = 0; a < spectrum.dim(); ++a) out.value += std::norm(c(a)) * diag[static_cast<std::size_t>(a)];
  out.min_gap = smallest_quasi_energy_gap(spectrum.quasi_energies);
  out.degenerate = out.min_gap < kDegeneracyGap;
  return out;
}

std::vector<double> finite_time_energies(const FloquetOperator& U, const ComplexVector& psi0, const RealMatrix& h0,
                                         const std::vector<int>& n_av) {
  if (n_av.empty()) return {};
  for (int n : n_av)
    if (n < 0) throw ParameterError("n_av must be >= 0");
  const int n_max = *std::max_element(n_av.begin(), n_av.end());
  const auto e = stroboscopic_energies(U, psi0, as_complex(h0), n_max);
  std::vector<double> prefix(e.size() + 1, 0.0);
  for (std::size_t n = 0; n < e.size(); ++n) prefix[n + 1] = prefix[n] + e[n];
  std::vector<double> out;
  out.reserve(n_av.size());
  for (int n : n_av) out.push_back(prefix[static_cast<std::size_t>(n) + 1] / static_cast<double>(n + 1));
  return out;
}

double finite_time_energy(const FloquetOperator& U, const ComplexVector& psi0, const RealMatrix& h0, int n_av) {
  return finite_time_energies(U, psi0, h0, {n_av}).front();
}

LevelStatistics level_spacing_stats(const FloquetSpectrum& spectrum, int bins) {
  const int d = spectrum.dim();
  if (d < 3) throw ParameterError("level_spacing_stats needs at least 3 levels");
  if (bins < 1) throw ParameterError("histogram needs at least one bin");
  LevelStatistics st;
  st.ratios.reserve(static_cast<std::size_t>(d - 2));
  const RealVector& mu = spectrum.quasi_energies;
  for (int a = 0; a + 2 < d; ++a) {
    const double d1 = mu(a + 1) - mu(a);
    const double d2 = mu(a + 2) - mu(a + 1);
    const double hi = std::max(d1, d2);
    double r = 0.0;
    if (hi > 0.0)
      r = std::min(d1, d2) / hi;
    else
      ++st.zero_spacings;
    st.ratios.push_back(std::clamp(r, 0.0, 1.0));
  }
  st.mean_r = std::accumulate(st.ratios.begin(), st.ratios.end(), 0.0) / static_cast<double>(st.ratios.size());
  st.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) st.bin_edges[static_cast<std::size_t>(b)] = static_cast<double>(b) / bins;
  st.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double r : st.ratios) {
    const int b = std::min(bins - 1, static_cast<int>(r * bins));
    ++st.counts[static_cast<std::size_t>(b)];
  }
  return st;
}

std::pair<double, double> reference_distributions(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("r must lie in [0, 1]");
  const double q = 1.0 + r + r * r;
  const double wd = 6.75 * (r + r * r) / std::pow(q, 2.5);
  const double poi = 2.0 / ((1.0 + r) * (1.0 + r));
  return {wd, poi};
}

}  // namespace fmx
