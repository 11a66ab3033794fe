#include "fmx/operators.hpp"

#include <cmath>
#include <string>

namespace fmx {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::DrivenHO: return "driven-ho";
    case ModelKind::ParametricHO: return "parametric-ho";
    case ModelKind::AnharmonicOsc: return "anharmonic";
    case ModelKind::KickedRotor: return "kicked-rotor";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "driven-ho" || name == "DrivenHO") return ModelKind::DrivenHO;
  if (name == "parametric-ho" || name == "ParametricHO") return ModelKind::ParametricHO;
  if (name == "anharmonic" || name == "AnharmonicOsc") return ModelKind::AnharmonicOsc;
  if (name == "kicked-rotor" || name == "KickedRotor") return ModelKind::KickedRotor;
  throw ParameterError("unknown model '" + std::string(name) + "'");
}

ModelSpec ModelSpec::driven_ho(double omega0, double g) {
  return ModelSpec{ModelKind::DrivenHO, omega0, g, 0.0, 0.0};
}

ModelSpec ModelSpec::parametric_ho(double omega0, double g) {
  return ModelSpec{ModelKind::ParametricHO, omega0, g, 0.0, 0.0};
}

ModelSpec ModelSpec::anharmonic(double omega0, double g, double beta) {
  return ModelSpec{ModelKind::AnharmonicOsc, omega0, g, beta, 0.0};
}

ModelSpec ModelSpec::kicked_rotor(double K) {
  return ModelSpec{ModelKind::KickedRotor, 1.0, 0.0, 0.0, K};
}

void ModelSpec::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ParameterError("omega0 must be finite and > 0");
  if (!std::isfinite(g) || !std::isfinite(beta) || !std::isfinite(K)) throw ParameterError("model parameters must be finite");
  if (beta < 0.0) throw ParameterError("beta must be >= 0");
  if (kind != ModelKind::AnharmonicOsc && beta != 0.0)
    throw ParameterError("beta is only meaningful for the anharmonic oscillator");
  if (kind != ModelKind::KickedRotor && K != 0.0) throw ParameterError("K is only meaningful for the kicked rotor");
  if (kind == ModelKind::KickedRotor && g != 0.0) throw ParameterError("g is not a kicked-rotor parameter");
}

RealMatrix build_ladder_power(double omega0, int k, int dim) {
  if (!(omega0 > 0.0)) throw ParameterError("omega0 must be > 0");
  const auto entries = detail::ladder_power_entries<double>(omega0, k, dim);
  RealMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i) * dim + j];
  return m;
}

std::vector<int> momentum_window(int dim) {
  if (dim < 1 || dim % 2 == 0) throw ParameterError("kicked-rotor dimension must be odd, got " + std::to_string(dim));
  std::vector<int> n(static_cast<std::size_t>(dim));
  const int half = (dim - 1) / 2;
  for (int i = 0; i < dim; ++i) n[static_cast<std::size_t>(i)] = i - half;
  return n;
}

TruncatedSystem build_system(const ModelSpec& spec, int dim) {
  spec.validate();
  if (dim < 2) throw ParameterError("dimension must be >= 2, got " + std::to_string(dim));
  TruncatedSystem sys;
  sys.spec = spec;
  sys.dim = dim;

  if (spec.kind == ModelKind::KickedRotor) {
    const auto n = momentum_window(dim);
    sys.basis = BasisKind::Momentum;
    sys.h0 = RealMatrix::Zero(dim, dim);
    sys.h1 = RealMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const double p = n[static_cast<std::size_t>(i)];
      sys.h0(i, i) = 0.5 * p * p;
      // <m|cos x|n> = (delta_{m,n+1} + delta_{m,n-1}) / 2
      if (i + 1 < dim) {
        sys.h1(i, i + 1) = 0.5 * spec.K;
        sys.h1(i + 1, i) = 0.5 * spec.K;
      }
    }
    return sys;
  }

  const auto entries = detail::oscillator_entries<double>(spec, dim);
  sys.basis = BasisKind::HarmonicOscillator;
  sys.h0 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(entries.h0.data(), dim, dim);
  sys.h1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(entries.h1.data(), dim, dim);
  return sys;
}

ComplexMatrix momentum_matrix(double omega0, int dim) {
  if (!(omega0 > 0.0)) throw ParameterError("omega0 must be > 0");
  if (dim < 1) throw ParameterError("dimension must be >= 1");
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  const double s = std::sqrt(omega0 / 2.0);
  for (int j = 0; j + 1 < dim; ++j) {
    const double a = s * std::sqrt(static_cast<double>(j + 1));
    p(j + 1, j) = Complex(0.0, a);
    p(j, j + 1) = Complex(0.0, -a);
  }
  return p;
}

RealMatrix ho_energy_matrix(double omega0, int dim) {
  if (dim < 1) throw ParameterError("dimension must be >= 1");
  return RealVector::LinSpaced(dim, 0.0, static_cast<double>(dim - 1)).cwiseProduct(RealVector::Constant(dim, omega0)).asDiagonal();
}

int reference_state_index(const TruncatedSystem& system) {
  if (system.basis == BasisKind::Momentum) return (system.dim - 1) / 2;
  return 0;
}

ComplexVector basis_state(int dim, int index) {
  if (index < 0 || index >= dim) throw ParameterError("basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

double hermiticity_defect(const RealMatrix& m) {
  const double n = m.norm();
  return n == 0.0 ? 0.0 : (m - m.transpose()).norm() / n;
}

double hermiticity_defect(const ComplexMatrix& m) {
  const double n = m.norm();
  return n == 0.0 ? 0.0 : (m - m.adjoint()).norm() / n;
}

}  // namespace fmx
