#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tailray/margins.hpp"
#include "tailray/normal.hpp"
#include "tailray/random.hpp"

using namespace tailray;

TEST(RawSample, RejectsBadShapes) {
  EXPECT_THROW(RawSample({"x"}, {{1.0}}), DomainError);
  EXPECT_THROW(RawSample({"a", "b", "c", "d"}, {{1}, {1}, {1}, {1}}), DomainError);
  EXPECT_THROW(RawSample({"x", "y"}, {{1.0, 2.0}, {1.0}}), DomainError);
  EXPECT_THROW(RawSample({"x", "y"}, {{1.0, NAN}, {1.0, 2.0}}), DomainError);
  EXPECT_THROW(RawSample({"x", "y"}, {{}, {}}), DomainError);
  EXPECT_NO_THROW(RawSample({"x", "y", "z"}, {{1}, {2}, {3}}));
}

TEST(ParetoToExponential, ExactPowers) {
  const auto s = pareto_to_exponential({{1.0, std::exp(1.0)}, {1.0, std::exp(2.0)}});
  EXPECT_EQ(s.x()[0], 0.0);
  EXPECT_EQ(s.y()[0], 0.0);
  EXPECT_NEAR(s.x()[1], 1.0, 1e-15);
  EXPECT_NEAR(s.y()[1], 2.0, 1e-15);
  EXPECT_EQ(s.provenance(), Provenance::exact_transform);
}

TEST(ParetoToExponential, ErrorNamesRowAndColumn) {
  try {
    pareto_to_exponential({{1.0, 2.0}, {3.0, 0.5}});
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 1"), std::string::npos) << msg;
  }
}

TEST(ParetoToExponential, ParetoDrawsAreExponential) {
  Rng rng(11);
  std::vector<double> a, b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(1.0 / uniform_open(rng));
    b.push_back(1.0 / uniform_open(rng));
  }
  const auto s = pareto_to_exponential({a, b});
  EXPECT_GT(oracle::ks_pvalue_exponential(s.x()), 0.01);
  EXPECT_GT(oracle::ks_pvalue_exponential(s.y()), 0.01);
}

TEST(ParetoToExponential, RoundTrip) {
  Rng rng(3);
  std::vector<std::vector<double>> cols(2);
  for (int i = 0; i < 1000; ++i)
    for (auto& c : cols) c.push_back(5.0 * standard_exponential(rng));
  const ExponentialSample s(cols, Provenance::simulated);
  const auto back = pareto_to_exponential(exponential_to_pareto(s));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_NEAR(back.column(j)[i], s.column(j)[i], 1e-12 * std::max(1.0, s.column(j)[i]));
}

TEST(RankTransform, SmallExample) {
  const auto r = rank_to_exponential(std::vector<double>{5.0, 1.0, 3.0});
  EXPECT_DOUBLE_EQ(r[0], -std::log(0.25));
  EXPECT_DOUBLE_EQ(r[1], -std::log(0.75));
  EXPECT_DOUBLE_EQ(r[2], -std::log(0.5));
  EXPECT_NEAR(r[0], 1.3863, 1e-4);
  EXPECT_NEAR(r[1], 0.2877, 1e-4);
  EXPECT_NEAR(r[2], 0.6931, 1e-4);
}

TEST(RankTransform, TiesByIndex) {
  const auto r = rank_to_exponential(std::vector<double>{2.0, 2.0, 2.0});
  EXPECT_EQ(r[0], -std::log(1.0 / 4.0));
  EXPECT_EQ(r[1], -std::log(2.0 / 4.0));
  EXPECT_EQ(r[2], -std::log(3.0 / 4.0));
}

TEST(RankTransform, MatchesBruteForceWithTies) {
  Rng rng(5);
  std::vector<double> v;
  for (int i = 0; i < 300; ++i) v.push_back(static_cast<double>(rng() % 20));
  const auto fast = rank_to_exponential(v);
  const auto slow = oracle::brute_force_rank_exponential(v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(fast[i], slow[i]) << i;
}

TEST(RankTransform, OutputIsExactGridAndKeepsRowOrder) {
  Rng rng(8);
  const std::size_t n = 500;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::sin(static_cast<double>(i)) * 10.0;
    b[i] = uniform_open(rng);
  }
  const auto s = rank_transform(RawSample({"a", "b"}, {a, b}));
  EXPECT_EQ(s.provenance(), Provenance::rank_transform);
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> col(s.column(j).begin(), s.column(j).end());
    std::sort(col.begin(), col.end(), std::greater<>());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(col[n - 1 - i], -std::log(static_cast<double>(n - i) / (n + 1.0)));
  }
  // the row holding the largest raw value carries the largest score
  const auto top = std::max_element(a.begin(), a.end()) - a.begin();
  EXPECT_EQ(s.x()[static_cast<std::size_t>(top)], -std::log(1.0 / (n + 1.0)));
}

TEST(RankTransform, InvariantUnderIncreasingMaps) {
  Rng rng(21);
  std::vector<double> a, b, fa, fb;
  for (int i = 0; i < 400; ++i) {
    a.push_back(standard_exponential(rng));
    b.push_back(uniform_open(rng) - 0.5);
    fa.push_back(std::exp(3.0 * a.back()) + 7.0);
    fb.push_back(std::atan(b.back()) * 100.0);
  }
  EXPECT_EQ(rank_transform(RawSample({"a", "b"}, {a, b})), rank_transform(RawSample({"a", "b"}, {fa, fb})));
}

TEST(RankTransform, NaNRejected) {
  EXPECT_THROW(rank_to_exponential(std::vector<double>{1.0, NAN}), DomainError);
}

TEST(CdfTransform, Examples) {
  const RawSample raw({"a", "b", "c"}, {{2.0}, {1.0 - std::exp(-1.0)}, {0.0}});
  std::vector<MarginalCdf> cdfs{[](double x) { return -std::expm1(-x); }, [](double x) { return x; },
                                [](double x) { return normal::cdf(x); }};
  const auto s = cdf_transform(raw, cdfs);
  EXPECT_NEAR(s.column(0)[0], 2.0, 1e-14);
  EXPECT_NEAR(s.column(1)[0], 1.0, 1e-14);
  EXPECT_NEAR(s.column(2)[0], std::log(2.0), 1e-14);
}

TEST(CdfTransform, OutOfRangeRejected) {
  const RawSample raw({"a", "b"}, {{1.0}, {2.0}});
  std::vector<MarginalCdf> cdfs{[](double) { return 0.5; }, [](double) { return 1.0; }};
  EXPECT_THROW(cdf_transform(raw, cdfs), DomainError);
  std::vector<MarginalCdf> one{[](double) { return 0.5; }};
  EXPECT_THROW(cdf_transform(raw, one), DomainError);
}

TEST(ExponentialSample, RejectsNegative) {
  EXPECT_THROW(ExponentialSample({{1.0, -0.1}, {1.0, 1.0}}, Provenance::simulated), DomainError);
}
