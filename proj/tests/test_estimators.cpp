#include <gtest/gtest.h>

#include <cmath>

#include "tailray/copulas.hpp"
#include "tailray/estimators.hpp"

using namespace tailray;

namespace {

ExponentialSample pairs(std::vector<double> x, std::vector<double> y) {
  return {{std::move(x), std::move(y)}, Provenance::simulated};
}

ExponentialSample independent(std::size_t n, std::uint64_t seed) { return sample(CopulaModel(Morgenstern{0.0}), n, seed); }

const double kAlpha = -std::log(0.75) / std::log(2.0);

}  // namespace

TEST(StructureVariable, Examples) {
  const auto s = pairs({2.0, 3.0, 1.0}, {2.0, 1.0, 3.0});
  EXPECT_EQ(structure_variable(s, 0.5)[0], 4.0);
  EXPECT_EQ(structure_variable(s, 0.0)[1], 1.0);
  EXPECT_EQ(structure_variable(s, 1.0)[1], 3.0);
  EXPECT_EQ(structure_variable(s, 0.25)[2], 4.0);
}

TEST(FitRate, ReciprocalMeanExcess) {
  // excesses {0.5, 1.0, 1.5, 0.5, 1.0} above u = 1
  const auto f = fit_rate(std::vector<double>{1.5, 2.0, 2.5, 0.3, 1.5, 2.0, 1.0}, ThresholdRule::fixed(1.0));
  EXPECT_EQ(f.k, 5u);
  EXPECT_NEAR(f.lambda_hat, 5.0 / 4.5, 1e-15);
  EXPECT_NEAR(f.se, f.lambda_hat / std::sqrt(5.0), 1e-15);
  const auto g = fit_rate(std::vector<double>{3, 3, 3, 3, 3, 0}, ThresholdRule::fixed(1.0));
  EXPECT_NEAR(g.lambda_hat, 0.5, 1e-15);
}

TEST(FitRate, ThreeExcessExampleNeedsFiveExceedances) {
  try {
    fit_rate(std::vector<double>{1.5, 2.0, 2.5, 0.0}, ThresholdRule::fixed(1.0));
    FAIL();
  } catch (const InsufficientDataError& e) {
    EXPECT_EQ(e.available(), 3u);
  }
}

TEST(FitLambda, FractionRuleUsesTopK) {
  const auto s = independent(1000, 3);
  const auto f = fit_lambda(s, 0.3, ThresholdRule::fraction(0.10));
  EXPECT_EQ(f.k, 100u);
  EXPECT_EQ(f.omega, 0.3);
  auto t = structure_variable(s, 0.3);
  std::sort(t.begin(), t.end(), std::greater<>());
  EXPECT_EQ(f.u, t[100]);
  double ex = 0.0;
  for (int i = 0; i < 100; ++i) ex += t[i] - f.u;
  EXPECT_NEAR(f.lambda_hat, 100.0 / ex, 1e-12);
}

TEST(FitLambda, HomogeneityOfEstimator) {
  const auto s = independent(2000, 8);
  const double w = 0.3, h = 2.5;
  const auto base = fit_rate(structure_variable(s.x(), s.y(), w, 1 - w), ThresholdRule::fraction(0.1));
  const auto scaled = fit_rate(structure_variable(s.x(), s.y(), h * w, h * (1 - w)), ThresholdRule::fraction(0.1));
  EXPECT_NEAR(scaled.lambda_hat, h * base.lambda_hat, 1e-12 * h * base.lambda_hat);
}

TEST(FitLambda, MarginalBoundaryOnRankedData) {
  const auto s = rank_transform(sample(CopulaModel(BivariateNormal{0.5}), 5000, 6));
  for (double w : {0.0, 1.0}) {
    const auto f = fit_lambda(s, w, ThresholdRule::fraction(0.1));
    EXPECT_NEAR(f.lambda_hat, 1.0, 2.0 * f.se);
  }
}

TEST(FitLambda, InvertedLogisticUnbiasedAtOffDiagonalRay) {
  const CopulaModel m(InvertedLogistic{kAlpha});
  double sum = 0.0;
  const int reps = 500;
  for (int j = 0; j < reps; ++j) sum += fit_lambda(sample(m, 5000, j), 0.35, ThresholdRule::fraction(0.1)).lambda_hat;
  EXPECT_NEAR(sum / reps, true_lambda(m, 0.35), 0.03);
}

TEST(WtProbability, HalvingAndNoExtrapolation) {
  // 10 points, one of them in the base set {X > 0.5, Y > 0.5}.
  std::vector<double> x(10, 0.0), y(10, 0.0);
  x[3] = y[3] = 2.0;
  const auto s = pairs(x, y);
  AngularFit fit{0.5, 1.0, 1.0, 5, 0.4};
  EXPECT_NEAR(wt_probability(s, fit, std::log(2.0)).value, 0.05, 1e-16);
  EXPECT_EQ(wt_probability(s, fit, 0.0).value, empirical_probability(s, SurvivorSet(0.5, 0.5)).value);
  EXPECT_FALSE(wt_probability(s, fit, 3.0).is_zero);
}

TEST(WtProbability, EmptyBaseIsZeroNotError) {
  const auto s = pairs({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3});
  AngularFit fit{0.5, 1.0, 10.0, 5, 0.4};
  const auto e = wt_probability(s, fit, 1.0);
  EXPECT_TRUE(e.is_zero);
  EXPECT_EQ(e.value, 0.0);
}

TEST(WtProbability, VZeroEqualsEmpirical) {
  const auto s = independent(3000, 10);
  const auto fit = fit_lambda(s, 0.4, ThresholdRule::fraction(0.1));
  EXPECT_EQ(wt_probability(s, fit, 0.0).value,
            empirical_probability(s, SurvivorSet(0.4 * fit.u, 0.6 * fit.u)).value);
}

TEST(LtProbability, DiagonalTargetAndCoincidenceWithWt) {
  const auto s = sample(CopulaModel(InvertedLogistic{0.6}), 5000, 13);
  const auto diag = fit_lambda(s, 0.5, ThresholdRule::fraction(0.1));
  // a diagonal target is extrapolated exactly like WT at omega = 1/2
  const double c = 6.0;
  const auto lt = lt_probability(s, SurvivorSet(c, c), diag);
  const auto wt = wt_probability(s, diag, 2.0 * c - diag.u);
  EXPECT_EQ(lt.value, wt.value);
  EXPECT_EQ(lt.rate, 2.0 * diag.lambda_hat);
  // no shift needed when the target sits on the base level
  const auto at_base = lt_probability(s, SurvivorSet(diag.u / 2, diag.u / 2), diag);
  EXPECT_EQ(at_base.value, empirical_probability(s, SurvivorSet(diag.u / 2, diag.u / 2)).value);
}

TEST(LtProbability, IndependenceRate) {
  const auto s = independent(200000, 14);
  const auto diag = fit_lambda(s, 0.5, ThresholdRule::fraction(0.1));
  EXPECT_NEAR(2.0 * diag.lambda_hat, 2.0, 0.05);
  const double a = diag.u / 2, v = 1.0;
  const auto e = lt_probability(s, SurvivorSet(a + v, a + v), diag);
  EXPECT_NEAR(e.value / (std::exp(-2.0 * v) * empirical_probability(s, SurvivorSet(a, a)).value), 1.0, 0.06);
}

TEST(FitHt, IndependenceGivesZeroAlpha) {
  const auto f = fit_ht(independent(5000, 15));
  EXPECT_LT(f.alpha, 0.1);
  EXPECT_GE(f.residuals.size(), 50u);
  EXPECT_GT(f.sigma, 0.0);
  EXPECT_LT(f.grad_norm, 1e-6);
}

TEST(FitHt, StrongLinearDependenceGivesAlphaNearOne) {
  const auto f = fit_ht(sample(CopulaModel(LogisticBEV{0.3}), 5000, 16));
  EXPECT_GT(f.alpha, 0.8);
}

TEST(FitHt, TooFewExceedances) { EXPECT_THROW(fit_ht(independent(200, 1)), InsufficientDataError); }

TEST(HtProbability, BoundaryAndDeterminism) {
  const auto s = sample(CopulaModel(BivariateNormal{0.5}), 5000, 17);
  const auto f = fit_ht(s);
  const double un = 12.0;
  EXPECT_EQ(ht_probability(f, 0.0, un, 100, 1).value, std::exp(-un));
  const auto a = ht_probability(f, 0.3, un, 10000, 5), b = ht_probability(f, 0.3, un, 10000, 5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_LE(a.value, std::exp(-0.7 * un));
  EXPECT_THROW(ht_probability(f, 0.9, 1.0, 10, 1), DomainError);
}

TEST(Diagnose, InvertedLogisticLinearity) {
  const auto s = sample(CopulaModel(InvertedLogistic{kAlpha}), 5000, 18);
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(0.2 + 0.1 * i);
  const auto d = diagnose_linearity(s, 0.5, grid);
  EXPECT_EQ(d.points.size(), 7u);
  EXPECT_GE(d.r_squared, 0.95);
  EXPECT_LT(d.slope, 0.0);
  // slope ~ -lambda(1/2) log m
  EXPECT_NEAR(d.slope / std::log(5000.0), -2.0 / 3.0, 0.15);
}

TEST(Diagnose, EmptySetsAreInsufficient) {
  const auto s = independent(100, 1);
  const std::vector<double> grid{50.0, 60.0, 70.0};
  EXPECT_THROW(diagnose_linearity(s, 0.5, grid), InsufficientDataError);
}

TEST(QqExcesses, TheoreticalQuantiles) {
  AngularFit fit{0.5, 2.0, 1.0, 3, 1.0};
  const auto q = qq_excesses(fit, std::vector<double>{1.3, 0.2, 1.1, 1.9});
  ASSERT_EQ(q.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i].first, -std::log(1.0 - (i + 1) / 4.0) / 2.0, 1e-15);
  EXPECT_NEAR(q[0].second, 0.1, 1e-15);
  EXPECT_NEAR(q[2].second, 0.9, 1e-15);
}

TEST(QqExcesses, HeavyTailCurvesUpward) {
  // Pareto excesses against an exponential fit: the top quantiles sit above the line.
  Rng rng(3);
  std::vector<double> t;
  for (int i = 0; i < 2000; ++i) t.push_back(1.0 + std::pow(uniform_open(rng), -0.5) - 1.0);
  const auto fit = fit_rate(t, ThresholdRule::fixed(1.0));
  const auto q = qq_excesses(fit, t);
  const auto& top = q.back();
  EXPECT_GT(top.second, 1.5 * top.first);
}
