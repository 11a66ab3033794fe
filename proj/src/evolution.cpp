#include "fmx/evolution.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace fmx {

namespace {

constexpr double kHermitianTol = 1e-13;
constexpr double kUnitaryTol = 1e-11;

void check_unitary(const ComplexMatrix& u, const char* what) {
  const double defect = unitarity_defect(u);
  if (!(defect < kUnitaryTol))
    throw NumericalError(std::string(what) + ": unitarity defect " + std::to_string(defect));
}

// V diag(exp(-i s e)) V^T for real orthogonal V, split into real and imaginary parts.
ComplexMatrix real_eigen_phase(const RealMatrix& v, const RealVector& e, double s) {
  const Eigen::ArrayXd phase = -s * e.array();
  const RealMatrix vc = v * phase.cos().matrix().asDiagonal();
  const RealMatrix vs = v * phase.sin().matrix().asDiagonal();
  ComplexMatrix out(v.rows(), v.rows());
  out.real() = vc * v.transpose();
  out.imag() = vs * v.transpose();
  return out;
}

}  // namespace

namespace detail {

void require_normalized(const ComplexVector& psi, double tol, const char* what) {
  const double n = psi.norm();
  if (!(std::abs(n - 1.0) <= tol))
    throw ValidationError(std::string(what) + ": state norm " + std::to_string(n) + " is not 1");
}

void require_hermitian(const ComplexMatrix& h, double tol, const char* what) {
  if (h.rows() != h.cols()) throw ValidationError(std::string(what) + ": matrix is not square");
  const double d = hermiticity_defect(h);
  if (!(d <= tol)) throw ValidationError(std::string(what) + ": matrix is not Hermitian (defect " + std::to_string(d) + ")");
}

}  // namespace detail

double unitarity_defect(const ComplexMatrix& u) {
  const auto d = static_cast<double>(u.rows());
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() / std::sqrt(d);
}

ComplexMatrix hermitian_phase_exp(const RealMatrix& h, double s) {
  if (h.rows() != h.cols()) throw ValidationError("hermitian_phase_exp: matrix is not square");
  if (!(hermiticity_defect(h) <= kHermitianTol)) throw ValidationError("hermitian_phase_exp: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_phase_exp: eigensolver did not converge");
  ComplexMatrix u = real_eigen_phase(es.eigenvectors(), es.eigenvalues(), s);
  check_unitary(u, "hermitian_phase_exp");
  return u;
}

ComplexMatrix hermitian_phase_exp(const ComplexMatrix& h, double s) {
  detail::require_hermitian(h, kHermitianTol, "hermitian_phase_exp");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_phase_exp: eigensolver did not converge");
  const ComplexVector phase = (Complex(0.0, -s) * es.eigenvalues().cast<Complex>()).array().exp();
  ComplexMatrix u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  check_unitary(u, "hermitian_phase_exp");
  return u;
}

StepPropagator::StepPropagator(std::shared_ptr<const TruncatedSystem> system) : system_(std::move(system)) {
  if (!system_) throw ParameterError("StepPropagator: null system");
  if (system_->basis == BasisKind::Momentum) throw ParameterError("step protocol is not defined for the kicked rotor");
  for (int which = 0; which < 2; ++which) {
    const RealMatrix h = which == 0 ? RealMatrix(system_->h0 - system_->h1) : RealMatrix(system_->h0 + system_->h1);
    if (!(hermiticity_defect(h) <= kHermitianTol)) throw ValidationError("StepPropagator: Hamiltonian is not symmetric");
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("StepPropagator: eigensolver did not converge");
    vecs_[which] = es.eigenvectors();
    vals_[which] = es.eigenvalues();
  }
}

ComplexMatrix StepPropagator::half_step(int which, double tau) const {
  return real_eigen_phase(vecs_[which], vals_[which], tau);
}

FloquetOperator StepPropagator::operator()(double T) const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("period T must be finite and > 0");
  // The +1 half-period acts first, so its factor is rightmost.
  FloquetOperator op;
  op.u = half_step(0, T / 2.0) * half_step(1, T / 2.0);
  op.period = T;
  op.system = system_;
  check_unitary(op.u, "floquet_operator");
  return op;
}

FloquetOperator floquet_operator(const TruncatedSystem& system, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("period T must be finite and > 0");
  return StepPropagator(std::make_shared<const TruncatedSystem>(system))(T);
}

FloquetOperator kicked_rotor_operator(const ModelSpec& spec, double T, int dim) {
  if (spec.kind != ModelKind::KickedRotor) throw ParameterError("kicked_rotor_operator needs a kicked-rotor spec");
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("period T must be finite and > 0");
  auto system = std::make_shared<const TruncatedSystem>(build_system(spec, dim));
  // h1 already carries K, so the kick is exp(-i * 1 * h1).
  const ComplexMatrix kick = hermitian_phase_exp(system->h1, 1.0);
  ComplexVector kinetic(dim);
  for (int i = 0; i < dim; ++i) kinetic(i) = std::exp(Complex(0.0, -T * system->h0(i, i)));
  FloquetOperator op;
  op.u = kinetic.asDiagonal() * kick;
  op.period = T;
  op.system = std::move(system);
  check_unitary(op.u, "kicked_rotor_operator");
  return op;
}

std::vector<double> stroboscopic_energies(const FloquetOperator& U, const ComplexVector& psi0,
                                          const ComplexMatrix& observable, int n_max) {
  if (n_max < 0) throw ParameterError("n_max must be >= 0");
  if (psi0.size() != U.u.rows() || observable.rows() != U.u.rows())
    throw ParameterError("stroboscopic_energies: dimension mismatch");
  detail::require_normalized(psi0, 1e-12, "stroboscopic_energies");
  std::vector<double> energies;
  energies.reserve(static_cast<std::size_t>(n_max) + 1);
  ComplexVector psi = psi0;
  ComplexVector next(psi.size());
  for (int n = 0;; ++n) {
    const Complex e = psi.dot(observable * psi);
    if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real())))
      throw NumericalError("stroboscopic_energies: expectation value is not real; observable not Hermitian?");
    energies.push_back(e.real());
    if (n == n_max) break;
    next.noalias() = U.u * psi;
    psi.swap(next);
    if (std::abs(psi.norm() - 1.0) > 1e-8)
      throw NumericalError("stroboscopic_energies: norm drift at step " + std::to_string(n + 1));
  }
  return energies;
}

}  // namespace fmx
