#include <gtest/gtest.h>

#include <cmath>

#include "fmx/operators.hpp"

using namespace fmx;

namespace {

// <i|x^k|j> by explicit ladder algebra on occupation-number states:
// x = (a + a^dagger) / sqrt(2 omega0), applied k times to |j>.
double ladder_element(double omega0, int k, int i, int j) {
  std::vector<double> v(static_cast<std::size_t>(j + k + 2), 0.0);
  v[static_cast<std::size_t>(j)] = 1.0;
  for (int s = 0; s < k; ++s) {
    std::vector<double> w(v.size(), 0.0);
    for (std::size_t n = 0; n + 1 < v.size(); ++n) {
      if (v[n] == 0.0) continue;
      w[n + 1] += std::sqrt(double(n + 1)) * v[n];    // a^dagger
      if (n > 0) w[n - 1] += std::sqrt(double(n)) * v[n];  // a
    }
    for (auto& x : w) x /= std::sqrt(2.0 * omega0);
    v = w;
  }
  return i < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(i)] : 0.0;
}

}  // namespace

TEST(LadderPower, FirstPowerTwoByTwo) {
  const RealMatrix x = build_ladder_power(1.0, 1, 2);
  EXPECT_DOUBLE_EQ(x(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(x(0, 1), 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(x(1, 0), 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(x(1, 1), 0.0);
}

TEST(LadderPower, ZerothPowerIsIdentity) {
  EXPECT_TRUE(build_ladder_power(1.0, 0, 3).isIdentity(0.0));
}

TEST(LadderPower, FourthPowerGroundState) {
  const RealMatrix x4 = build_ladder_power(1.0, 4, 1);
  ASSERT_EQ(x4.rows(), 1);
  EXPECT_NEAR(x4(0, 0), ladder_element(1.0, 4, 0, 0), 1e-15);
  EXPECT_NEAR(x4(0, 0), 0.75, 1e-15);
}

TEST(LadderPower, MatchesLadderAlgebraEverywhere) {
  for (double omega0 : {1.0, 0.7, 2.5})
    for (int k = 0; k <= 8; ++k) {
      const int dim = 12;
      const RealMatrix m = build_ladder_power(omega0, k, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const double want = ladder_element(omega0, k, i, j);
          EXPECT_NEAR(m(i, j), want, 1e-12 * std::max(1.0, std::abs(want))) << "k=" << k << " (" << i << "," << j << ")";
        }
    }
}

TEST(LadderPower, PaddingBeyondKChangesNothing) {
  for (int k = 1; k <= 8; ++k) {
    const int dim = 10;
    const RealMatrix m = build_ladder_power(1.3, k, dim);
    const RealMatrix wide = build_ladder_power(1.3, k, dim + 4);
    EXPECT_LT((m - wide.topLeftCorner(dim, dim)).cwiseAbs().maxCoeff(), 1e-12 * m.cwiseAbs().maxCoeff()) << k;
  }
}

TEST(LadderPower, DiffersFromPowerOfCroppedMatrix) {
  const RealMatrix x = build_ladder_power(1.0, 1, 4);
  const RealMatrix cropped_power = x * x * x * x;
  EXPECT_GT(std::abs(build_ladder_power(1.0, 4, 4)(3, 3) - cropped_power(3, 3)), 1.0);
}

TEST(LadderPower, FrequencyScaling) {
  for (int k = 0; k <= 8; ++k) {
    const RealMatrix a = build_ladder_power(2.3, k, 9);
    const RealMatrix b = std::pow(2.3, -k / 2.0) * build_ladder_power(1.0, k, 9);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
  }
}

TEST(LadderPower, SymmetricWithBandwidthK) {
  for (int k = 0; k <= 8; ++k) {
    const RealMatrix m = build_ladder_power(1.0, k, 15);
    EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (int i = 0; i < 15; ++i)
      for (int j = 0; j < 15; ++j)
        if (std::abs(i - j) > k) EXPECT_EQ(m(i, j), 0.0);
  }
}

TEST(LadderPower, TraceOfSquare) {
  for (double omega0 : {1.0, 0.5, 3.0}) {
    const int dim = 20;
    double want = 0.0;
    for (int i = 0; i < dim; ++i) want += (2.0 * i + 1.0) / (2.0 * omega0);
    EXPECT_NEAR(build_ladder_power(omega0, 2, dim).trace(), want, 1e-12 * want);
  }
}

TEST(LadderPower, RejectsBadArguments) {
  EXPECT_THROW(build_ladder_power(1.0, 9, 3), ParameterError);
  EXPECT_THROW(build_ladder_power(1.0, -1, 3), ParameterError);
  EXPECT_THROW(build_ladder_power(1.0, 2, 0), ParameterError);
  EXPECT_THROW(build_ladder_power(0.0, 2, 3), ParameterError);
}

TEST(BuildSystem, DrivenHO) {
  const auto s = build_system(ModelSpec::driven_ho(1.0, 1.0), 3);
  EXPECT_EQ(s.basis, BasisKind::HarmonicOscillator);
  EXPECT_TRUE(s.h0.isApprox(RealVector::LinSpaced(3, 0.0, 2.0).asDiagonal().toDenseMatrix()));
  EXPECT_DOUBLE_EQ(s.h1(0, 1), 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.h1(1, 2), 1.0);
  EXPECT_EQ(s.h1(0, 2), 0.0);
}

TEST(BuildSystem, ParametricUsesHalfXSquared) {
  const auto s = build_system(ModelSpec::parametric_ho(1.0, 0.1), 6);
  EXPECT_LT((s.h1 - 0.05 * build_ladder_power(1.0, 2, 6)).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(BuildSystem, AnharmonicAddsQuarticToH0) {
  const auto s = build_system(ModelSpec::anharmonic(1.0, 1.0, 0.4), 8);
  RealMatrix want = 0.1 * build_ladder_power(1.0, 4, 8);
  for (int j = 0; j < 8; ++j) want(j, j) += j;
  EXPECT_LT((s.h0 - want).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((s.h1 - build_ladder_power(1.0, 1, 8)).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(BuildSystem, AnharmonicBetaZeroIsDrivenHO) {
  const auto a = build_system(ModelSpec::anharmonic(1.0, 1.0, 0.0), 3);
  const auto d = build_system(ModelSpec::driven_ho(1.0, 1.0), 3);
  EXPECT_EQ(a.h0, d.h0);
  EXPECT_EQ(a.h1, d.h1);
}

TEST(BuildSystem, KickedRotor) {
  const auto s = build_system(ModelSpec::kicked_rotor(1.0), 3);
  EXPECT_EQ(s.basis, BasisKind::Momentum);
  EXPECT_DOUBLE_EQ(s.h0(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.h0(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(s.h0(2, 2), 0.5);
  EXPECT_DOUBLE_EQ(s.h1(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(s.h1(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(s.h1(1, 0), 0.5);
  EXPECT_EQ(s.h1(0, 2), 0.0);
  EXPECT_EQ(s.h1(1, 1), 0.0);
  EXPECT_EQ(reference_state_index(s), 1);
  EXPECT_EQ(momentum_window(5), (std::vector<int>{-2, -1, 0, 1, 2}));
}

TEST(BuildSystem, RejectsInvalidInput) {
  EXPECT_THROW(build_system(ModelSpec::kicked_rotor(1.0), 4), ParameterError);
  EXPECT_THROW(build_system(ModelSpec::driven_ho(1.0, 1.0), 1), ParameterError);
  EXPECT_THROW(build_system(ModelSpec::driven_ho(-1.0, 1.0), 4), ParameterError);
  EXPECT_THROW(build_system(ModelSpec::anharmonic(1.0, 1.0, -0.1), 4), ParameterError);
}

TEST(BuildSystem, HermitianAndBanded) {
  for (const auto& spec : {ModelSpec::driven_ho(1.0, 0.3), ModelSpec::parametric_ho(0.8, 0.1),
                           ModelSpec::anharmonic(1.2, 0.7, 0.9), ModelSpec::kicked_rotor(2.0)}) {
    for (int dim : {5, 17, 33}) {
      const auto s = build_system(spec, dim);
      EXPECT_LT(hermiticity_defect(s.h0), 1e-13);
      EXPECT_LT(hermiticity_defect(s.h1), 1e-13);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          if (std::abs(i - j) > 4) EXPECT_EQ(s.h0(i, j), 0.0);
          if (std::abs(i - j) > 2) EXPECT_EQ(s.h1(i, j), 0.0);
        }
    }
  }
}

TEST(MomentumMatrix, Examples) {
  const ComplexMatrix p = momentum_matrix(1.0, 2);
  EXPECT_NEAR(std::abs(p(0, 1) - Complex(0.0, -1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p(1, 0) - Complex(0.0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_EQ(p(0, 0), Complex(0.0));
  EXPECT_NEAR(std::abs(momentum_matrix(2.0, 2)(1, 0) - Complex(0.0, 1.0)), 0.0, 1e-15);
  for (int dim : {1, 4, 30}) EXPECT_EQ(hermiticity_defect(momentum_matrix(1.7, dim)), 0.0);
}

TEST(MomentumMatrix, CanonicalCommutatorAwayFromEdge) {
  const int dim = 20;
  const ComplexMatrix x = build_ladder_power(1.4, 1, dim).cast<Complex>();
  const ComplexMatrix p = momentum_matrix(1.4, dim);
  const ComplexMatrix c = x * p - p * x;
  for (int i = 0; i < dim - 1; ++i) EXPECT_NEAR(std::abs(c(i, i) - Complex(0.0, 1.0)), 0.0, 1e-13);
}

TEST(HoEnergy, MatchesKineticPlusPotentialWithoutZeroPoint) {
  const int dim = 12;
  const double w = 1.3;
  const ComplexMatrix p = momentum_matrix(w, dim + 2);
  const RealMatrix x2 = build_ladder_power(w, 2, dim + 2);
  const ComplexMatrix h = 0.5 * p * p + 0.5 * w * w * x2.cast<Complex>();
  const RealMatrix e = ho_energy_matrix(w, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      EXPECT_NEAR(std::abs(h(i, j) - (e(i, j) + (i == j ? w / 2 : 0.0))), 0.0, 1e-12);
}

TEST(ModelKind, RoundTripNames) {
  for (auto k : {ModelKind::DrivenHO, ModelKind::ParametricHO, ModelKind::AnharmonicOsc, ModelKind::KickedRotor})
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_THROW(parse_model_kind("pendulum"), ParameterError);
}
