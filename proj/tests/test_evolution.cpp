#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fmx/evolution.hpp"

using namespace fmx;

namespace {

ComplexMatrix random_hermitian(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(nd(rng), nd(rng));
  return 0.5 * (a + a.adjoint());
}

// exp(-i s h) by scaling and squaring of a 20-term Taylor series.
ComplexMatrix taylor_exp(const ComplexMatrix& h, double s) {
  int squarings = 0;
  double norm = std::abs(s) * h.norm();
  while (norm > 0.5) {
    norm /= 2;
    ++squarings;
  }
  const ComplexMatrix a = Complex(0.0, -s / std::pow(2.0, squarings)) * h;
  ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

double symmetry_residual(const ComplexMatrix& u, int q) {
  double worst = 0.0;
  const int d = static_cast<int>(u.rows());
  // Interior: stay away from the window edge, where the truncation is felt.
  for (int m = 6; m + q < d - 6; ++m)
    for (int n = 6; n + q < d - 6; ++n) worst = std::max(worst, std::abs(u(m + q, n + q) - u(m, n)));
  return worst;
}

}  // namespace

TEST(HermitianPhaseExp, DiagonalCase) {
  const RealMatrix h = RealVector::LinSpaced(3, 0.0, 2.0).asDiagonal();
  const ComplexMatrix u = hermitian_phase_exp(h, std::numbers::pi);
  EXPECT_NEAR(std::abs(u(0, 0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(1, 1) + 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(2, 2) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(0, 1)), 0.0, 1e-14);
}

TEST(HermitianPhaseExp, ZeroScaleIsIdentity) {
  const ComplexMatrix h = random_hermitian(5, 3);
  EXPECT_LT((hermitian_phase_exp(h, 0.0) - ComplexMatrix::Identity(5, 5)).norm(), 1e-14);
}

TEST(HermitianPhaseExp, MatchesTaylorSeries) {
  const ComplexMatrix h = random_hermitian(6, 11);
  EXPECT_LT((hermitian_phase_exp(h, 0.7) - taylor_exp(h, 0.7)).cwiseAbs().maxCoeff(), 1e-10);
  const RealMatrix hr = h.real() + h.real().transpose();
  EXPECT_LT((hermitian_phase_exp(hr, 0.7) - taylor_exp(hr.cast<Complex>(), 0.7)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HermitianPhaseExp, RejectsNonHermitian) {
  ComplexMatrix h = random_hermitian(4, 5);
  h(0, 1) += 0.1;
  EXPECT_THROW(hermitian_phase_exp(h, 1.0), ValidationError);
}

TEST(FloquetOperator, NoDriveIsDiagonalPhase) {
  const auto s = build_system(ModelSpec::driven_ho(1.0, 0.0), 3);
  const auto U = floquet_operator(s, 1.0);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(U.u(j, j) - std::exp(Complex(0.0, -double(j)))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(U.u(0, 1)), 0.0, 1e-14);
}

TEST(FloquetOperator, SmallPeriodIsNearIdentity) {
  for (const auto& spec : {ModelSpec::driven_ho(1.0, 1.0), ModelSpec::parametric_ho(1.0, 0.1),
                           ModelSpec::anharmonic(1.0, 1.0, 1.0)}) {
    const auto s16 = build_system(spec, 16);
    if (spec.kind != ModelKind::AnharmonicOsc)
      EXPECT_LT((floquet_operator(s16, 1e-8).u - ComplexMatrix::Identity(16, 16)).norm(), 1e-6);
    // In general ||U - 1|| <= T (||h0|| + ||h1||), which grows with D.
    for (int dim : {16, 32, 64}) {
      const auto s = build_system(spec, dim);
      const double bound = 1e-8 * (s.h0.norm() + s.h1.norm());
      EXPECT_LT((floquet_operator(s, 1e-8).u - ComplexMatrix::Identity(dim, dim)).norm(), bound) << dim;
    }
  }
}

TEST(FloquetOperator, ProtocolOrderPlusHalfActsFirst) {
  const auto s = build_system(ModelSpec::anharmonic(1.0, 0.8, 0.3), 10);
  const double T = 0.9;
  const ComplexMatrix plus = hermitian_phase_exp(RealMatrix(s.h0 + s.h1), T / 2);
  const ComplexMatrix minus = hermitian_phase_exp(RealMatrix(s.h0 - s.h1), T / 2);
  const auto U = floquet_operator(s, T);
  EXPECT_LT((U.u - minus * plus).norm(), 1e-13);
  EXPECT_GT((U.u - plus * minus).norm(), 1e-3);
}

TEST(FloquetOperator, UnitaryForAllModels) {
  for (const auto& spec : {ModelSpec::driven_ho(1.0, 1.0), ModelSpec::parametric_ho(1.0, 0.1),
                           ModelSpec::anharmonic(1.0, 1.0, 1.0)})
    for (double T : {0.3, 1.0, 6.0}) EXPECT_LT(unitarity_defect(floquet_operator(build_system(spec, 64), T).u), 1e-11);
  EXPECT_LT(unitarity_defect(kicked_rotor_operator(ModelSpec::kicked_rotor(2.0), 3.0, 65).u), 1e-11);
}

TEST(FloquetOperator, GroupPropertyWithoutDrive) {
  const auto s = build_system(ModelSpec::anharmonic(1.0, 0.0, 0.5), 16);
  const auto a = floquet_operator(s, 0.4), b = floquet_operator(s, 0.7), ab = floquet_operator(s, 1.1);
  EXPECT_LT((ab.u - a.u * b.u).norm(), 1e-12);
}

TEST(StepPropagator, MatchesDirectConstruction) {
  auto sys = std::make_shared<const TruncatedSystem>(build_system(ModelSpec::anharmonic(1.0, 1.0, 0.2), 24));
  const StepPropagator prop(sys);
  for (double T : {0.25, 2.0, 7.5}) EXPECT_LT((prop(T).u - floquet_operator(*sys, T).u).norm(), 1e-12);
}

TEST(FloquetOperator, RejectsKickedRotorAndBadPeriod) {
  EXPECT_THROW(floquet_operator(build_system(ModelSpec::kicked_rotor(1.0), 5), 1.0), ParameterError);
  EXPECT_THROW(floquet_operator(build_system(ModelSpec::driven_ho(1.0, 1.0), 5), 0.0), ParameterError);
  EXPECT_THROW(kicked_rotor_operator(ModelSpec::kicked_rotor(1.0), 1.0, 6), ParameterError);
  EXPECT_THROW(kicked_rotor_operator(ModelSpec::driven_ho(1.0, 1.0), 1.0, 5), ParameterError);
}

TEST(KickedRotor, NoKickIsFreeRotation) {
  const double T = 1.7;
  const auto U = kicked_rotor_operator(ModelSpec::kicked_rotor(0.0), T, 7);
  const auto window = momentum_window(7);
  for (int k = 0; k < 7; ++k) {
    const double n = window[static_cast<std::size_t>(k)];
    EXPECT_NEAR(std::abs(U.u(k, k) - std::exp(Complex(0.0, -T * n * n / 2))), 0.0, 1e-14);
  }
  EXPECT_NEAR((U.u - ComplexMatrix(U.u.diagonal().asDiagonal())).norm(), 0.0, 1e-14);
}

TEST(KickedRotor, TranslationSymmetryAtRationalPeriod) {
  const auto U = kicked_rotor_operator(ModelSpec::kicked_rotor(1.0), 4.0 * std::numbers::pi, 33);
  EXPECT_LT(symmetry_residual(U.u, 1), 1e-10);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto V = kicked_rotor_operator(ModelSpec::kicked_rotor(1.0), 4.0 * std::numbers::pi * golden, 33);
  EXPECT_GT(symmetry_residual(V.u, 1), 1e-3);
}

TEST(Stroboscopic, EigenstateStaysAtZero) {
  const auto s = build_system(ModelSpec::driven_ho(1.0, 0.0), 8);
  const auto U = floquet_operator(s, 0.9);
  const auto e = stroboscopic_energies(U, basis_state(8, 0), s.h0.cast<Complex>(), 50);
  ASSERT_EQ(e.size(), 51u);
  for (double v : e) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Stroboscopic, ZeroStepsGivesInitialExpectation) {
  const auto s = build_system(ModelSpec::anharmonic(1.0, 1.0, 1.0), 8);
  const auto U = floquet_operator(s, 0.9);
  const auto e = stroboscopic_energies(U, basis_state(8, 3), s.h0.cast<Complex>(), 0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(e[0], s.h0(3, 3));
}

TEST(Stroboscopic, KickedRotorResonanceGrowsQuadratically) {
  const auto U = kicked_rotor_operator(ModelSpec::kicked_rotor(1.0), 4.0 * std::numbers::pi, 201);
  const auto e = stroboscopic_energies(U, basis_state(201, 100), U.system->h0.cast<Complex>(), 20);
  // At T = 4 pi the free rotation is the identity, so E(nT) = (nK)^2 / 4 exactly.
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(e[static_cast<std::size_t>(n)], n * n / 4.0, 1e-9 * (1 + n * n));
}

TEST(Stroboscopic, NormPreservedOverManySteps) {
  const auto s = build_system(ModelSpec::anharmonic(1.0, 1.0, 1.0), 256);
  const auto U = floquet_operator(s, 1.0);
  EXPECT_NO_THROW(stroboscopic_energies(U, basis_state(256, 0), s.h0.cast<Complex>(), 10000));
}

TEST(Stroboscopic, RejectsUnnormalizedStart) {
  const auto s = build_system(ModelSpec::driven_ho(1.0, 1.0), 8);
  const auto U = floquet_operator(s, 1.0);
  EXPECT_THROW(stroboscopic_energies(U, 1.01 * basis_state(8, 0), s.h0.cast<Complex>(), 3), ValidationError);
}
