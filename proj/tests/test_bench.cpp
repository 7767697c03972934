#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tailray/bench.hpp"
#include "tailray/io.hpp"

using namespace tailray;

namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.model = CopulaModel(InvertedLogistic{-std::log(0.75) / std::log(2.0)});
  c.reps = 12;
  c.m = 1500;
  c.ht_draws = 2000;
  c.seed_base = 77;
  return c;
}

}  // namespace

TEST(TargetSet, Examples) {
  const auto a = target_set(0.5, std::size_t{5000});
  EXPECT_NEAR(a[0], 12.776, 1e-3);
  EXPECT_EQ(a[0], a[1]);
  const auto b = target_set(0.25, std::size_t{5000});
  EXPECT_NEAR(b[0], 4.2587, 2e-4);
  EXPECT_NEAR(b[0], 1.5 * std::log(5000.0) / 3.0, 1e-15);
  EXPECT_NEAR(b[1], 12.776, 1e-3);
  for (double w : {0.05, 0.3, 0.45}) {
    const auto t = target_set(w, std::size_t{5000});
    EXPECT_NEAR(t[1], (1 - w) / w * t[0], 1e-12);
  }
  EXPECT_THROW(target_set(0.0, std::size_t{5000}), DomainError);
  EXPECT_THROW(target_set(1.0, std::size_t{5000}), DomainError);
}

TEST(Config, Defaults) {
  const BenchmarkConfig c;
  EXPECT_EQ(c.reps, 500u);
  EXPECT_EQ(c.m, 5000u);
  EXPECT_EQ(c.frac, 0.10);
  ASSERT_EQ(c.omegas.size(), 10u);
  EXPECT_EQ(c.omegas.front(), 0.5);
  EXPECT_EQ(c.omegas.back(), 0.05);
  EXPECT_EQ(c.omegas[3], 0.35);
  EXPECT_NEAR(c.corner(), 1.5 * std::log(5000.0), 1e-15);
  const auto q = BenchmarkConfig::quick(c.model);
  EXPECT_EQ(q.reps, 100u);
  EXPECT_EQ(q.m, 2000u);
}

TEST(Config, Validation) {
  auto c = small_config();
  c.reps = 0;
  EXPECT_THROW(run_benchmark(c), DomainError);
  c = small_config();
  c.frac = 1.0;
  EXPECT_THROW(run_benchmark(c), DomainError);
  c = small_config();
  c.omegas = {0.5, 1.0};
  EXPECT_THROW(run_benchmark(c), DomainError);
}

TEST(RunBenchmark, MetricIdentitiesAndTruth) {
  const auto c = small_config();
  const auto r = run_benchmark(c);
  EXPECT_EQ(r.cells.size(), c.omegas.size() * 3);
  for (const auto& cell : r.cells) {
    EXPECT_GE(cell.prop_zero, 0.0);
    EXPECT_LE(cell.prop_zero, 1.0);
    EXPECT_GE(cell.prop_exceed, 0.0);
    EXPECT_LE(cell.prop_exceed, 1.0);
    EXPECT_EQ(cell.n_reps_used + cell.n_failed, c.reps);
    EXPECT_NEAR(cell.prop_zero + static_cast<double>(cell.n_nonzero) / cell.n_reps_used, 1.0, 1e-15);
    EXPECT_EQ(cell.true_prob, survivor_exp(c.model, target_set(cell.omega, c.corner())));
  }
  // inverted logistic truth is exact
  const double a = -std::log(0.75) / std::log(2.0);
  const auto t = target_set(0.3, c.corner());
  EXPECT_NEAR(r.cell(Method::wt, 0.3).true_prob,
              std::exp(-std::pow(std::pow(t[0], 1 / a) + std::pow(t[1], 1 / a), a)), 1e-300);
}

TEST(RunBenchmark, WtAndLtAgreeOnTheDiagonal) {
  const auto r = run_benchmark(small_config());
  const auto& wt = r.cell(Method::wt, 0.5);
  const auto& lt = r.cell(Method::lt, 0.5);
  EXPECT_EQ(wt.rmse_nonzero_log, lt.rmse_nonzero_log);
  EXPECT_EQ(wt.prop_exceed, lt.prop_exceed);
  EXPECT_EQ(wt.prop_zero, lt.prop_zero);
}

TEST(RunBenchmark, ReproducibleAndOrderFree) {
  auto c = small_config();
  c.threads = 1;
  const auto a = to_json(run_benchmark(c)).dump();
  const auto b = to_json(run_benchmark(c)).dump();
  EXPECT_EQ(a, b);
  std::vector<std::size_t> order(c.reps);
  for (std::size_t i = 0; i < c.reps; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  c.threads = 3;
  EXPECT_EQ(to_json(run_benchmark(c, order)).dump(), a);
  EXPECT_THROW(run_benchmark(c, {0, 1}), DomainError);
}

TEST(RunBenchmark, SingleReplication) {
  auto c = small_config();
  c.reps = 1;
  EXPECT_EQ(to_json(run_benchmark(c)).dump(), to_json(run_benchmark(c)).dump());
}

TEST(RunBenchmark, FailuresAreCountedNotFatal) {
  auto c = small_config();
  c.m = 300;  // too few conditioning exceedances for HT
  c.methods = {Method::wt, Method::ht};
  const auto r = run_benchmark(c);
  EXPECT_EQ(r.cell(Method::ht, 0.5).n_failed, c.reps);
  EXPECT_EQ(r.cell(Method::wt, 0.5).n_failed, 0u);
  EXPECT_EQ(r.total_failures(), c.reps);
  EXPECT_EQ(r.ht_fits, 0u);
}

TEST(LambdaRecovery, MarginalEndpointsOnRankedData) {
  auto c = small_config();
  c.reps = 20;
  c.m = 5000;
  c.rank_transform = true;
  const auto rows = lambda_recovery(c, {0.01, 0.5, 0.99});
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : {rows[0], rows[2]}) EXPECT_NEAR(row.mean, 1.0, 2.0 * row.pooled_se);
  EXPECT_LE(rows[1].lower, rows[1].mean);
  EXPECT_GE(rows[1].upper, rows[1].mean);
  EXPECT_EQ(default_lambda_grid().size(), 99u);
}
