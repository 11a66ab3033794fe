#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fmx/convergence.hpp"

using namespace fmx;

namespace {

// Magnitudes a_n = a_0 / prod rho_k, so that a_n / a_{n+1} = rho_n.
std::vector<double> magnitudes_from_ratios(const std::vector<double>& rho) {
  std::vector<double> a{1.0};
  for (double r : rho) a.push_back(a.back() / r);
  return a;
}

RatioCurve curve_of(const std::vector<double>& rho) {
  return ratio_curve_from_magnitudes(magnitudes_from_ratios(rho), RatioKind::Element);
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST(RatioCurve, PlainRatios) {
  const auto c = ratio_curve_from_magnitudes({8.0, 4.0, 1.0, 0.5}, RatioKind::Frobenius);
  ASSERT_EQ(c.size(), 3);
  EXPECT_DOUBLE_EQ(c.values[0], 2.0);
  EXPECT_DOUBLE_EQ(c.values[1], 4.0);
  EXPECT_DOUBLE_EQ(c.values[2], 2.0);
  for (int n = 0; n < 3; ++n) EXPECT_TRUE(c.usable(n));
}

TEST(RatioCurve, StepsOverVanishingOrders) {
  // Every other coefficient vanishes: rho_n is the geometric mean over the gap.
  const auto c = ratio_curve_from_magnitudes({0.0, 9.0, 0.0, 1.0, 1e-30, 1.0 / 9.0}, RatioKind::Element);
  EXPECT_FALSE(c.defined(0));
  EXPECT_DOUBLE_EQ(c.values[1], 3.0);
  EXPECT_EQ(c.steps[1], 2);
  EXPECT_FALSE(c.defined(2));
  EXPECT_DOUBLE_EQ(c.values[3], 3.0);
  EXPECT_FALSE(c.defined(4));
}

TEST(RatioCurve, StrideTwoSettlesAlternatingSeries) {
  // Odd orders 100x the even ones, both classes shrinking by 4 every two orders.
  std::vector<double> a;
  for (int n = 0; n < 10; ++n) a.push_back(std::pow(0.5, n) * (n % 2 ? 100.0 : 1.0));
  const auto one = ratio_curve_from_magnitudes(a, RatioKind::Element);
  EXPECT_NEAR(one.values[0], 0.02, 1e-15);
  EXPECT_NEAR(one.values[1], 200.0, 1e-12);
  EXPECT_FALSE(detect_plateau(one));
  const auto two = ratio_curve_from_magnitudes(a, RatioKind::Element, {}, 2);
  EXPECT_EQ(two.size(), 9);
  for (int n = 0; n < 8; ++n) {
    EXPECT_NEAR(two.values[static_cast<std::size_t>(n)], 2.0, 1e-14);
    EXPECT_EQ(two.steps[static_cast<std::size_t>(n)], 2);
  }
  EXPECT_FALSE(two.defined(8));
  EXPECT_THROW(ratio_curve_from_magnitudes(a, RatioKind::Element, {}, 0), ParameterError);
}

TEST(RatioCurve, UndefinedDenominator) {
  const auto c = ratio_curve_from_magnitudes({1.0, 0.0}, RatioKind::Element);
  EXPECT_FALSE(c.defined(0));
}

TEST(RatioCurve, ConvergedFlagsPropagate) {
  const auto c = ratio_curve_from_magnitudes({1.0, 0.5, 0.25, 0.125}, RatioKind::Element, {true, true, false, true});
  EXPECT_TRUE(c.usable(0));
  EXPECT_FALSE(c.usable(1));
  EXPECT_FALSE(c.usable(2));
}

TEST(RatioCurve, AllUndefinedIsAnAnalysisError) {
  MagnusSeries s;
  s.dim = 3;
  s.trust_order = 3;
  s.terms.assign(4, ComplexMatrix::Zero(3, 3));
  EXPECT_THROW(ratio_curve(s, RatioKind::Element, 0, 1), AnalysisError);
  s.trust_order = 1;
  EXPECT_THROW(ratio_curve(s, RatioKind::Element, 0, 1), ParameterError);
}

TEST(Plateau, ConstantCurve) {
  const auto p = detect_plateau(curve_of(std::vector<double>(12, 5.0)));
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->tc, 5.0);
  EXPECT_EQ(p->first_n, 0);
  EXPECT_EQ(p->last_n, 11);
  EXPECT_EQ(p->length, 12);
}

TEST(Plateau, LongestRunWins) {
  const auto p = detect_plateau(curve_of({1, 2, 2, 2, 2, 9, 3, 3, 3, 3, 3, 3, 1}));
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->tc, 3.0);
  EXPECT_EQ(p->first_n, 6);
  EXPECT_EQ(p->last_n, 11);
}

TEST(Plateau, NoneWhenTooShortOrDecaying) {
  EXPECT_FALSE(detect_plateau(curve_of({5, 5, 5, 1, 7})));
  std::vector<double> decay;
  for (int n = 1; n < 30; ++n) decay.push_back(10.0 / n);
  EXPECT_FALSE(detect_plateau(curve_of(decay)));
}

TEST(DecayFit, InverseLaw) {
  std::vector<double> rho;
  for (int n = 0; n < 20; ++n) rho.push_back(n == 0 ? 10.0 : 3.0 / n);
  const auto fit = decay_fit(curve_of(rho));
  EXPECT_NEAR(fit.c_beta, 3.0, 1e-12);
  EXPECT_EQ(fit.n_last, 19);
}

TEST(DecayFit, DetectorSkipsTheSwingingPrefix) {
  // n*rho swings before settling on a slowly decreasing tail.
  std::vector<double> nrho{0, 6, 15, 18, 12, 9.4, 9.9, 10.3, 10.2, 10.0, 9.7, 9.4, 9.1, 8.9, 8.7};
  std::vector<double> rho{1.0};
  for (std::size_t n = 1; n < nrho.size(); ++n) rho.push_back(nrho[n] / double(n));
  const auto c = curve_of(rho);
  const auto start = detect_asymptotic_start(c, 5, 0.10);
  ASSERT_TRUE(start);
  EXPECT_EQ(*start, 5);
  const auto fit = decay_fit(c);
  EXPECT_NEAR(fit.c_beta, 10.3, 1e-12);
  EXPECT_EQ(fit.n_at_sup, 7);
  // The user override wins over the detector.
  DecayFitOptions o;
  o.n_min = 3;
  EXPECT_NEAR(decay_fit(c, o).c_beta, 18.0, 1e-12);
}

TEST(DecayFit, FailsWithoutAsymptoticRegime) {
  std::vector<double> rho;
  for (int n = 0; n < 20; ++n) rho.push_back(n % 2 ? 1.0 : 3.0);
  EXPECT_THROW(decay_fit(curve_of(rho)), AnalysisError);
  EXPECT_THROW(decay_fit(curve_of({1.0, 0.5, 0.33})), AnalysisError);
}

TEST(KappaFit, ExactLine) {
  const std::vector<double> betas{0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> c;
  for (double b : betas) c.push_back(-4.4 * std::log(b));
  const auto k = fit_kappa(betas, c);
  EXPECT_NEAR(k.kappa, 4.4, 1e-12);
  EXPECT_NEAR(k.kappa_stderr, 0.0, 1e-12);
  EXPECT_NEAR(k.slope_affine, 4.4, 1e-10);
  EXPECT_NEAR(k.intercept_affine, 0.0, 1e-9);
  EXPECT_EQ(k.points, 5);
}

TEST(KappaFit, RejectsTooFewOrInvalid) {
  EXPECT_THROW(fit_kappa({0.1, 0.2, 0.3}, {1, 2, 3}), ParameterError);
  EXPECT_THROW(fit_kappa({0.1, 0.2, 0.3, 1.5}, {1, 2, 3, 4}), ParameterError);
}

TEST(Bandwidth, Examples) {
  for (int dim : {8, 16, 32}) {
    const auto b = bandwidth_heuristic(build_system(ModelSpec::driven_ho(1.0, 0.0), dim), 1.0);
    EXPECT_NEAR(b.w, dim - 1.0, 1e-12);
    EXPECT_NEAR(b.tc_estimate, 1.0 / (dim - 1.0), 1e-14);
  }
  const double w32 = bandwidth_heuristic(build_system(ModelSpec::driven_ho(1.0, 1.0), 32), 1.0).w;
  const double w64 = bandwidth_heuristic(build_system(ModelSpec::driven_ho(1.0, 1.0), 64), 1.0).w;
  EXPECT_NEAR(w64 / w32, 2.0, 0.1);
  EXPECT_GE(bandwidth_heuristic(build_system(ModelSpec::anharmonic(1.0, 1.0, 1.0), 16), 0.5).w, 0.0);
}

TEST(ElementLimit, GroundStateDiagonalOfOmegaZero) {
  const auto e = element_limit(ModelSpec::driven_ho(1.0, 1.0), 0, 0, 0, {{16, 32}, 1e-8, Precision::Double, {}, true});
  EXPECT_EQ(e.value, 0.0);
  EXPECT_TRUE(e.converged);
  EXPECT_EQ(e.dim, 32);
}

TEST(ElementLimit, DrivenHOConvergesByD64) {
  ElementLimitOptions o;
  o.dims = {16, 32, 64, 128};
  // n_max stays inside the extended-precision trust order at every D.
  const auto t = element_limits(ModelSpec::driven_ho(1.0, 1.0), 0, 1, 13, o);
  for (const auto& e : t.orders) EXPECT_TRUE(e.converged);
  EXPECT_LE(t.dims_used.back(), 64);
  EXPECT_TRUE(t.warnings.empty());
  const auto p = detect_plateau(t.ratios());
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->tc, kTwoPi, 0.01 * kTwoPi);
}

TEST(ElementLimit, UnconvergedIsFlaggedWithWarning) {
  ElementLimitOptions o;
  o.dims = {8, 12};
  o.precision = Precision::Double;
  const auto t = element_limits(ModelSpec::anharmonic(1.0, 1.0, 0.1), 1, 2, 9, o);
  EXPECT_FALSE(t.orders.back().converged);
  EXPECT_EQ(t.orders.back().dim, 12);
  ASSERT_FALSE(t.warnings.empty());
  EXPECT_NE(t.warnings.back().find("unconverged limit"), std::string::npos);
}

TEST(ElementLimit, ElementScopeCertifiesFurther) {
  // The (1,2) entry keeps its digits well past the order where the whole
  // matrix has lost them; on the common orders both scopes give the same value.
  ElementLimitOptions o;
  o.dims = {24, 32};
  o.precision = Precision::Double;
  const auto spec = ModelSpec::anharmonic(1.0, 1.0, 0.1);
  const auto series = element_limits(spec, 1, 2, 30, o);
  o.scope = CertifyScope::Element;
  const auto element = element_limits(spec, 1, 2, 30, o);
  for (std::size_t k = 0; k < series.trust_orders.size(); ++k)
    EXPECT_GT(element.trust_orders[k], series.trust_orders[k]);
  for (int n = 0; n <= series.trust_orders.back(); ++n)
    EXPECT_EQ(element.orders[static_cast<std::size_t>(n)].raw, series.orders[static_cast<std::size_t>(n)].raw) << n;
}

TEST(ElementLimit, RejectsBadSchedule) {
  EXPECT_THROW(element_limits(ModelSpec::driven_ho(1, 1), 0, 1, 4, {{32, 16}, 1e-8, Precision::Double, {}, true}),
               ParameterError);
  EXPECT_THROW(element_limits(ModelSpec::driven_ho(1, 1), 0, 20, 4, {{16, 32}, 1e-8, Precision::Double, {}, true}),
               ParameterError);
}

TEST(OrderOfLimits, FixedDRatioTailDiffersFromLimit) {
  // At fixed small D the high-order ratio leaves 2 pi; the element limit does not.
  // Orders past 30 are beyond extended precision for the driven HO (the terms
  // shrink like (2 pi)^-n while the intermediates grow), so this runs in quad,
  // certified on the element itself against the octuple reference.
  ElementLimitOptions o;
  o.dims = {16};
  o.precision = Precision::Quad;
  o.scope = CertifyScope::Element;
  const auto t16 = element_limits(ModelSpec::driven_ho(1.0, 1.0), 0, 1, 40, o);
  ASSERT_EQ(t16.trust_orders[0], 40);
  std::vector<double> mags;
  for (const auto& e : t16.orders) mags.push_back(e.value);
  const auto c16 = ratio_curve_from_magnitudes(mags, RatioKind::Element);
  o.dims = {16, 32, 64};
  const auto lim = element_limits(ModelSpec::driven_ho(1.0, 1.0), 0, 1, 40, o).ratios();
  int compared = 0;
  // D = 16 feels the cutoff from n ~ 2D - 3 on; start a little past that.
  for (int n = 33; n < std::min(c16.size(), lim.size()); ++n) {
    if (!c16.defined(n) || !lim.usable(n)) continue;
    EXPECT_GT(std::abs(c16.values[static_cast<std::size_t>(n)] / kTwoPi - 1.0), 0.05) << n;
    EXPECT_LT(std::abs(lim.values[static_cast<std::size_t>(n)] / kTwoPi - 1.0), 0.05) << n;
    ++compared;
  }
  EXPECT_GT(compared, 0);
}

TEST(DrivenHOPlateau, SameForSeveralElements) {
  const auto s = magnus_series(build_system(ModelSpec::driven_ho(1.0, 1.0), 128), 40, Precision::Extended, {false, 1e-6});
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {2, 3}}) {
    const auto p = detect_plateau(ratio_curve(s, RatioKind::Element, i, j));
    ASSERT_TRUE(p) << i << "," << j;
    EXPECT_NEAR(p->tc, kTwoPi, 0.01 * kTwoPi) << i << "," << j;
  }
}

TEST(NormRatio, TailCollapsesWithD) {
  std::vector<RatioCurve> curves;
  int common = 1 << 30;
  for (int dim : {16, 32, 64}) {
    const auto s = magnus_series(build_system(ModelSpec::driven_ho(1.0, 1.0), dim), 24, Precision::Extended);
    curves.push_back(ratio_curve(s, RatioKind::Frobenius));
    int last = -1;
    for (int n = 0; n < curves.back().size(); ++n)
      if (curves.back().usable(n)) last = n;
    common = std::min(common, last);
  }
  ASSERT_GE(common, 8);
  // Norm ratios oscillate from order to order, so compare the averaged tail
  // over the upper half of the range certified at every D.
  std::vector<double> tail;
  for (const auto& c : curves) tail.push_back(tail_ratio(c, common / 2, common));
  EXPECT_GT(tail[0], tail[1]);
  EXPECT_GT(tail[1], tail[2]);
}

TEST(TailRatio, RootTestOverGaps) {
  // a_n = 2^-n on even n only: steps of 2 and a constant ratio of 2.
  std::vector<double> a;
  for (int n = 0; n <= 12; ++n) a.push_back(n % 2 ? 0.0 : std::pow(2.0, -n));
  const auto c = ratio_curve_from_magnitudes(a, RatioKind::Element);
  EXPECT_NEAR(tail_ratio(c, 0, 12), 2.0, 1e-14);
  const auto d = ratio_curve_from_magnitudes({1.0, 0.5, 0.05, 0.025}, RatioKind::Frobenius);
  EXPECT_NEAR(tail_ratio(d, 0, 2), std::cbrt(1.0 / 0.025), 1e-14);
  EXPECT_THROW(tail_ratio(d, 5, 9), AnalysisError);
}

TEST(AnharmonicDecay, BoundHoldsAndIsStableUnderLongerSeries) {
  ElementLimitOptions o;
  o.dims = {64, 96};
  const auto spec = ModelSpec::anharmonic(1.0, 1.0, 0.1);
  const auto shorter = element_limits(spec, 1, 2, 30, o).ratios();
  const auto fit = decay_fit(shorter);
  EXPECT_GT(fit.c_beta, 0.0);
  for (int n = fit.n_min_asymptotic; n < shorter.size(); ++n)
    if (shorter.usable(n)) EXPECT_LE(n * shorter.values[static_cast<std::size_t>(n)], fit.c_beta * (1 + 1e-9));
  const auto longer = decay_fit(element_limits(spec, 1, 2, 40, o).ratios());
  EXPECT_NEAR(longer.c_beta, fit.c_beta, 1e-9 * fit.c_beta);
  EXPECT_GT(longer.n_last, fit.n_last);
}
