#pragma once

// One-period Floquet operators for the step protocol and the kicked rotor.

#include <memory>
#include <vector>

#include "fmx/operators.hpp"
#include "fmx/types.hpp"

namespace fmx {

struct FloquetOperator {
  ComplexMatrix u;
  double period = 0.0;
  std::shared_ptr<const TruncatedSystem> system;

  int dim() const { return static_cast<int>(u.rows()); }
};

/// ||U^dagger U - I||_F / sqrt(D).
double unitarity_defect(const ComplexMatrix& u);

/// exp(-i s h) from the eigendecomposition of h. The input must be Hermitian
/// to 1e-13 relative Frobenius error.
ComplexMatrix hermitian_phase_exp(const RealMatrix& h, double s);
ComplexMatrix hermitian_phase_exp(const ComplexMatrix& h, double s);

/// Caches the eigensystems of h0 - h1 and h0 + h1 so that a T-scan needs only
/// two matrix products per period.
class StepPropagator {
 public:
  explicit StepPropagator(std::shared_ptr<const TruncatedSystem> system);

  /// U(T) = exp(-i (h0 - h1) T/2) exp(-i (h0 + h1) T/2).
  FloquetOperator operator()(double T) const;

  const TruncatedSystem& system() const { return *system_; }

 private:
  ComplexMatrix half_step(int which, double tau) const;

  std::shared_ptr<const TruncatedSystem> system_;
  RealMatrix vecs_[2];  // 0: h0 - h1, 1: h0 + h1
  RealVector vals_[2];
};

FloquetOperator floquet_operator(const TruncatedSystem& system, double T);

/// U = exp(-i T diag(n^2/2)) exp(-i K cos x) in the momentum window.
FloquetOperator kicked_rotor_operator(const ModelSpec& spec, double T, int dim);

/// E(nT) = <psi_n| observable |psi_n> with psi_n = U^n psi0, n = 0..n_max.
std::vector<double> stroboscopic_energies(const FloquetOperator& U, const ComplexVector& psi0,
                                          const ComplexMatrix& observable, int n_max);

namespace detail {
void require_normalized(const ComplexVector& psi, double tol, const char* what);
void require_hermitian(const ComplexMatrix& h, double tol, const char* what);
}  // namespace detail

}  // namespace fmx
