#include "fmx/oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fmx/spectral.hpp"

namespace fmx {

double AnalyticHF::pole_distance() const {
  // tan(omega0 T / 4) has poles at T = (2 pi + 4 pi k) / omega0.
  const double period = 4.0 * std::numbers::pi / omega0;
  const double first = 2.0 * std::numbers::pi / omega0;
  const double k = std::round((T - first) / period);
  return std::abs(T - (first + k * period));
}

ComplexMatrix AnalyticHF::matrix(int dim) const {
  if (!(omega0 > 0.0)) throw ParameterError("omega0 must be > 0");
  if (dim < 1) throw ParameterError("dimension must be >= 1");
  if (near_pole()) throw DomainError("analytic driven-HO Floquet Hamiltonian: T is at a pole of tan(omega0 T/4)");
  const double coef = (g / omega0) * std::tan(omega0 * T / 4.0);
  return ho_energy_matrix(omega0, dim).cast<Complex>() - coef * momentum_matrix(omega0, dim);
}

double AnalyticHF::identity_shift() const {
  if (near_pole()) throw DomainError("analytic driven-HO Floquet Hamiltonian: T is at a pole of tan(omega0 T/4)");
  if (!(T > 0.0)) return 0.0;
  const double t = std::tan(omega0 * T / 4.0);
  return g * g / (2.0 * omega0 * omega0) * (4.0 * t / (omega0 * T) - 1.0 + t * t);
}

ComplexMatrix AnalyticHF::exact_matrix(int dim) const {
  ComplexMatrix m = matrix(dim);
  m.diagonal().array() += identity_shift();
  return m;
}

ComplexMatrix analytic_hf_driven_ho(double omega0, double g, double T, int dim) {
  return AnalyticHF{omega0, g, T}.matrix(dim);
}

namespace {

LogResult assemble(const FloquetSpectrum& spec, RealVector energies) {
  LogResult out;
  out.hf = spec.states * energies.cast<Complex>().asDiagonal() * spec.states.adjoint();
  out.energies = std::move(energies);
  return out;
}

}  // namespace

LogResult hf_from_log(const FloquetOperator& U) {
  if (!(U.period > 0.0)) throw ParameterError("hf_from_log: period must be > 0");
  const FloquetSpectrum spec = diagonalize(U);
  RealVector e(spec.dim());
  bool wrapped = false;
  for (int a = 0; a < spec.dim(); ++a) {
    double mu = spec.quasi_energies(a);
    if (mu <= -std::numbers::pi) mu = std::numbers::pi;  // (-pi, pi]
    wrapped = wrapped || std::abs(mu) > std::numbers::pi - 1e-6;
    e(a) = mu / U.period;
  }
  LogResult out = assemble(spec, std::move(e));
  out.wrapped = wrapped;
  return out;
}

LogResult hf_from_log(const FloquetOperator& U, const RealMatrix& reference) {
  if (!(U.period > 0.0)) throw ParameterError("hf_from_log: period must be > 0");
  if (reference.rows() != U.dim() || reference.cols() != U.dim())
    throw ParameterError("hf_from_log: reference has the wrong dimension");
  const FloquetSpectrum spec = diagonalize(U);
  const auto target = state_expectations(spec, reference);
  const double two_pi = 2.0 * std::numbers::pi;
  RealVector e(spec.dim());
  for (int a = 0; a < spec.dim(); ++a) {
    const double mu = spec.quasi_energies(a);
    const double k = std::round((target[static_cast<std::size_t>(a)] * U.period - mu) / two_pi);
    e(a) = (mu + two_pi * k) / U.period;
  }
  return assemble(spec, std::move(e));
}

std::array<ComplexMatrix, 4> bch_reference(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows())
    throw ParameterError("bch_reference: square matrices of equal size required");
  auto comm = [](const ComplexMatrix& a, const ComplexMatrix& b) -> ComplexMatrix { return a * b - b * a; };
  const ComplexMatrix xy = comm(x, y);
  const ComplexMatrix xxy = comm(x, xy);
  return {
      ComplexMatrix(x + y),
      ComplexMatrix(0.5 * xy),
      ComplexMatrix((xxy + comm(y, comm(y, x))) / 12.0),
      ComplexMatrix(-comm(y, xxy) / 24.0),
  };
}

namespace {

// Propagator of (x, p) under x'' = -w2 x for time tau.
Eigen::Matrix2d harmonic_map(double w2, double tau) {
  Eigen::Matrix2d m;
  if (w2 > 0.0) {
    const double w = std::sqrt(w2);
    m << std::cos(w * tau), std::sin(w * tau) / w, -w * std::sin(w * tau), std::cos(w * tau);
  } else if (w2 < 0.0) {
    const double k = std::sqrt(-w2);
    m << std::cosh(k * tau), std::sinh(k * tau) / k, k * std::sinh(k * tau), std::cosh(k * tau);
  } else {
    m << 1.0, tau, 0.0, 1.0;
  }
  return m;
}

}  // namespace

Monodromy parametric_monodromy(double omega0, double g, double T) {
  if (!(omega0 > 0.0)) throw ParameterError("omega0 must be > 0");
  if (!(T > 0.0)) throw ParameterError("period T must be > 0");
  Monodromy out;
  // The first half period (+g) acts first, so it is the rightmost factor.
  out.m = harmonic_map(omega0 * omega0 - g, T / 2.0) * harmonic_map(omega0 * omega0 + g, T / 2.0);
  out.trace = out.m.trace();
  out.unstable = std::abs(out.trace) > 2.0;
  return out;
}

std::optional<std::pair<double, double>> parametric_instability_interval(double omega0, double g, double T_inside,
                                                                         double half_span) {
  auto excess = [&](double T) { return std::abs(parametric_monodromy(omega0, g, T).trace) - 2.0; };
  if (!(excess(T_inside) > 0.0)) return std::nullopt;
  auto edge = [&](double inside, double outside) {
    if (excess(outside) > 0.0) return outside;  // interval reaches the search boundary
    for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-14 * std::abs(inside); ++it) {
      const double mid = 0.5 * (inside + outside);
      (excess(mid) > 0.0 ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  // March outward first so that the bisection brackets the nearest edge.
  const int steps = 400;
  const double h = half_span / steps;
  double lo = T_inside, hi = T_inside;
  for (int s = 1; s <= steps && excess(T_inside - s * h) > 0.0; ++s) lo = T_inside - s * h;
  for (int s = 1; s <= steps && excess(T_inside + s * h) > 0.0; ++s) hi = T_inside + s * h;
  return std::make_pair(edge(lo, std::max(lo - h, 1e-12)), edge(hi, hi + h));
}

}  // namespace fmx
