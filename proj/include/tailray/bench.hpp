#pragma once

// Replicated simulation comparison of the WT, LT and HT estimators on
// joint survivor sets spread across rays, and the lambda recovery study.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tailray/copulas.hpp"
#include "tailray/errors.hpp"
#include "tailray/estimators.hpp"
#include "tailray/margins.hpp"
#include "tailray/random.hpp"

namespace tailray {

inline std::vector<double> default_omegas() {
  std::vector<double> w;
  for (int i = 10; i >= 1; --i) w.push_back(i / 20.0);
  return w;
}

inline std::vector<double> default_lambda_grid() {
  std::vector<double> w;
  for (int i = 1; i <= 99; ++i) w.push_back(i / 100.0);
  return w;
}

struct BenchmarkConfig {
  CopulaModel model = CopulaModel(InvertedLogistic{-std::log(0.75) / std::log(2.0)});
  std::size_t reps = 500;
  std::size_t m = 5000;
  double frac = 0.10;
  std::vector<double> omegas = default_omegas();
  std::optional<double> y_corner;  // defaults to 1.5 log m
  std::uint64_t seed_base = 0;
  std::vector<Method> methods{Method::wt, Method::lt, Method::ht};
  bool rank_transform = false;
  std::size_t ht_draws = 10000;
  double ht_quantile = 0.90;
  std::size_t threads = 0;  // 0: TAILRAY_THREADS or hardware concurrency

  double corner() const { return y_corner.value_or(1.5 * std::log(static_cast<double>(m))); }

  bool uses(Method method) const { return std::find(methods.begin(), methods.end(), method) != methods.end(); }

  void validate() const {
    if (model.dim() != 2) throw DomainError("benchmark: bivariate model required");
    if (reps < 1) throw DomainError("benchmark: reps must be >= 1");
    if (!(frac > 0.0 && frac < 1.0)) throw DomainError("benchmark: frac must lie in (0, 1)");
    if (m < 10) throw DomainError("benchmark: m must be >= 10");
    if (omegas.empty()) throw DomainError("benchmark: at least one omega required");
    for (double w : omegas)
      if (!(w > 0.0 && w < 1.0)) throw DomainError("benchmark: every omega must lie in (0, 1)");
    if (!(corner() > 0.0)) throw DomainError("benchmark: y_corner must be > 0");
    if (methods.empty()) throw DomainError("benchmark: at least one method required");
    if (ht_draws < 1) throw DomainError("benchmark: ht_draws must be >= 1");
  }

  /// Smaller profile for continuous integration.
  static BenchmarkConfig quick(CopulaModel model) {
    BenchmarkConfig c;
    c.model = model;
    c.reps = 100;
    c.m = 2000;
    return c;
  }
};

/// Corner ({omega / (1 - omega)} y, y) of the joint survivor set on ray omega.
inline SurvivorSet target_set(double omega, double y_corner) {
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("target_set: omega must lie in (0, 1)");
  return SurvivorSet(omega / (1.0 - omega) * y_corner, y_corner);
}

inline SurvivorSet target_set(double omega, std::size_t m) {
  return target_set(omega, 1.5 * std::log(static_cast<double>(m)));
}

struct BenchmarkCell {
  Method method = Method::wt;
  double omega = 0.0;
  double rmse_nonzero_log = std::numeric_limits<double>::quiet_NaN();
  double prop_exceed = 0.0;
  double prop_zero = 0.0;
  double true_prob = 0.0;
  std::size_t n_reps_used = 0;
  std::size_t n_nonzero = 0;
  std::size_t n_failed = 0;
};

struct LambdaSummary {
  double omega = 0.0;
  double true_lambda = 0.0;
  double mean = 0.0;
  double lower = 0.0;  // 2.5% empirical quantile across replications
  double upper = 0.0;  // 97.5%
  double pooled_se = 0.0;  // root mean square of the per-fit standard errors
  std::size_t n = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;
  std::vector<LambdaSummary> wt_lambda;
  double ht_alpha_mean = std::numeric_limits<double>::quiet_NaN();
  double ht_beta_mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t ht_fits = 0;
  std::map<std::string, std::size_t> failures;  // message -> count

  const BenchmarkCell& cell(Method method, double omega) const {
    for (const auto& c : cells)
      if (c.method == method && std::abs(c.omega - omega) < 1e-12) return c;
    throw DomainError("BenchmarkReport: no cell for the requested method and omega");
  }
  const LambdaSummary& lambda_at(double omega) const {
    for (const auto& l : wt_lambda)
      if (std::abs(l.omega - omega) < 1e-12) return l;
    throw DomainError("BenchmarkReport: no lambda summary at the requested omega");
  }
  std::size_t total_failures() const {
    std::size_t t = 0;
    for (const auto& [_, c] : failures) t += c;
    return t;
  }
};

namespace detail {

inline std::size_t resolve_threads(std::size_t requested, std::size_t work) {
  std::size_t t = requested;
  if (t == 0) {
    if (const char* env = std::getenv("TAILRAY_THREADS")) t = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
  }
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(t, work));
}

// Runs job(i) for every index in order (a permutation of 0..n-1), in parallel.
template <class Job>
void parallel_for_order(const std::vector<std::size_t>& order, std::size_t threads, Job&& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) job(order[i]);
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline LambdaSummary summarize_lambda(double omega, double truth, const std::vector<std::optional<AngularFit>>& fits) {
  LambdaSummary s;
  s.omega = omega;
  s.true_lambda = truth;
  std::vector<double> vals;
  double se2 = 0.0;
  for (const auto& f : fits) {
    if (!f) continue;
    vals.push_back(f->lambda_hat);
    se2 += f->se * f->se;
  }
  s.n = vals.size();
  if (vals.empty()) {
    s.mean = s.lower = s.upper = s.pooled_se = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  s.mean = sum / static_cast<double>(vals.size());
  s.pooled_se = std::sqrt(se2 / static_cast<double>(vals.size()));
  std::sort(vals.begin(), vals.end());
  s.lower = quantile_sorted(vals, 0.025);
  s.upper = quantile_sorted(vals, 0.975);
  return s;
}

struct RepOutcome {
  // estimates[method][ray]; nullopt marks a failed fit
  std::map<Method, std::vector<std::optional<double>>> estimates;
  std::vector<std::optional<AngularFit>> wt_fits;
  std::optional<std::pair<double, double>> ht_params;
  std::vector<std::string> errors;
};

inline ExponentialSample replicate_sample(const BenchmarkConfig& cfg, std::size_t rep) {
  auto s = sample(cfg.model, cfg.m, cfg.seed_base + rep);
  return cfg.rank_transform ? rank_transform(s) : s;
}

inline RepOutcome run_replication(const BenchmarkConfig& cfg, std::size_t rep) {
  RepOutcome out;
  const auto data = replicate_sample(cfg, rep);
  const std::size_t rays = cfg.omegas.size();
  const double yc = cfg.corner();
  auto record_error = [&](const std::string& prefix, const std::exception& e) {
    out.errors.push_back(prefix + ": " + e.what());
  };

  if (cfg.uses(Method::wt)) {
    auto& est = out.estimates[Method::wt];
    est.assign(rays, std::nullopt);
    out.wt_fits.assign(rays, std::nullopt);
    for (std::size_t r = 0; r < rays; ++r) {
      const double w = cfg.omegas[r];
      try {
        const auto fit = fit_lambda(data, w, ThresholdRule::fraction(cfg.frac));
        out.wt_fits[r] = fit;
        const double level = yc / (1.0 - w);
        est[r] = level > fit.u ? wt_probability(data, fit, level - fit.u).value
                               : empirical_probability(data, target_set(w, yc)).value;
      } catch (const std::exception& e) {
        record_error("WT", e);
      }
    }
  }
  if (cfg.uses(Method::lt)) {
    auto& est = out.estimates[Method::lt];
    est.assign(rays, std::nullopt);
    try {
      const auto diagonal = fit_lambda(data, 0.5, ThresholdRule::fraction(cfg.frac));
      for (std::size_t r = 0; r < rays; ++r) est[r] = lt_probability(data, target_set(cfg.omegas[r], yc), diagonal).value;
    } catch (const std::exception& e) {
      record_error("LT", e);
    }
  }
  if (cfg.uses(Method::ht)) {
    auto& est = out.estimates[Method::ht];
    est.assign(rays, std::nullopt);
    try {
      HtFitOptions opt;
      opt.quantile = cfg.ht_quantile;
      const auto fit = fit_ht(data, opt);
      out.ht_params = std::make_pair(fit.alpha, fit.beta);
      const std::uint64_t rep_seed = cfg.seed_base + rep;
      for (std::size_t r = 0; r < rays; ++r) {
        const double w = cfg.omegas[r];
        est[r] = ht_probability(fit, w, yc / (1.0 - w), cfg.ht_draws, child_seed(rep_seed, r)).value;
      }
    } catch (const std::exception& e) {
      record_error("HT", e);
    }
  }
  return out;
}

}  // namespace detail

/// Runs every replication (seed = seed_base + rep) and aggregates in replication order,
/// so the report does not depend on the execution order or thread count.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const std::vector<std::size_t>& execution_order = {}) {
  cfg.validate();
  std::vector<std::size_t> order = execution_order;
  if (order.empty()) {
    order.resize(cfg.reps);
    for (std::size_t i = 0; i < cfg.reps; ++i) order[i] = i;
  }
  if (order.size() != cfg.reps) throw DomainError("run_benchmark: execution order must list every replication once");

  std::vector<detail::RepOutcome> outcomes(cfg.reps);
  detail::parallel_for_order(order, detail::resolve_threads(cfg.threads, cfg.reps),
                             [&](std::size_t rep) { outcomes[rep] = detail::run_replication(cfg, rep); });

  const std::size_t rays = cfg.omegas.size();
  const double yc = cfg.corner();
  std::vector<double> truth(rays);
  for (std::size_t r = 0; r < rays; ++r) truth[r] = survivor_exp(cfg.model, target_set(cfg.omegas[r], yc));

  BenchmarkReport report;
  for (const auto& o : outcomes)
    for (const auto& e : o.errors) ++report.failures[e];

  for (Method method : cfg.methods) {
    for (std::size_t r = 0; r < rays; ++r) {
      BenchmarkCell cell;
      cell.method = method;
      cell.omega = cfg.omegas[r];
      cell.true_prob = truth[r];
      const double log_truth = std::log(truth[r]);
      double sq = 0.0;
      std::size_t exceed = 0, zero = 0;
      for (const auto& o : outcomes) {
        const auto& est = o.estimates.at(method)[r];
        if (!est) {
          ++cell.n_failed;
          continue;
        }
        ++cell.n_reps_used;
        if (*est == 0.0) {
          ++zero;
          continue;
        }
        ++cell.n_nonzero;
        const double d = std::log(*est) - log_truth;
        sq += d * d;
        if (*est > truth[r]) ++exceed;
      }
      if (cell.n_reps_used > 0) {
        const double used = static_cast<double>(cell.n_reps_used);
        cell.prop_exceed = static_cast<double>(exceed) / used;
        cell.prop_zero = static_cast<double>(zero) / used;
      }
      if (cell.n_nonzero > 0) cell.rmse_nonzero_log = std::sqrt(sq / static_cast<double>(cell.n_nonzero));
      report.cells.push_back(cell);
    }
  }

  if (cfg.uses(Method::wt)) {
    for (std::size_t r = 0; r < rays; ++r) {
      std::vector<std::optional<AngularFit>> fits;
      fits.reserve(outcomes.size());
      for (const auto& o : outcomes) fits.push_back(o.wt_fits[r]);
      report.wt_lambda.push_back(detail::summarize_lambda(cfg.omegas[r], true_lambda(cfg.model, cfg.omegas[r]), fits));
    }
  }
  if (cfg.uses(Method::ht)) {
    double sa = 0.0, sb = 0.0;
    for (const auto& o : outcomes) {
      if (!o.ht_params) continue;
      sa += o.ht_params->first;
      sb += o.ht_params->second;
      ++report.ht_fits;
    }
    if (report.ht_fits > 0) {
      report.ht_alpha_mean = sa / static_cast<double>(report.ht_fits);
      report.ht_beta_mean = sb / static_cast<double>(report.ht_fits);
    }
  }
  return report;
}

/// Mean and 95% envelope of lambda-hat over a grid of rays, against the true lambda.
inline std::vector<LambdaSummary> lambda_recovery(const BenchmarkConfig& cfg, const std::vector<double>& grid,
                                                  std::map<std::string, std::size_t>* failures = nullptr) {
  if (cfg.model.dim() != 2) throw DomainError("lambda_recovery: bivariate model required");
  if (cfg.reps < 1) throw DomainError("lambda_recovery: reps must be >= 1");
  for (double w : grid)
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("lambda_recovery: omega must lie in [0, 1]");
  std::vector<std::vector<std::optional<AngularFit>>> fits(grid.size(), std::vector<std::optional<AngularFit>>(cfg.reps));
  std::vector<std::vector<std::string>> errors(cfg.reps);
  std::vector<std::size_t> order(cfg.reps);
  for (std::size_t i = 0; i < cfg.reps; ++i) order[i] = i;
  detail::parallel_for_order(order, detail::resolve_threads(cfg.threads, cfg.reps), [&](std::size_t rep) {
    const auto data = detail::replicate_sample(cfg, rep);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      try {
        fits[g][rep] = fit_lambda(data, grid[g], ThresholdRule::fraction(cfg.frac));
      } catch (const std::exception& e) {
        errors[rep].push_back(std::string("WT: ") + e.what());
      }
    }
  });
  if (failures)
    for (const auto& es : errors)
      for (const auto& e : es) ++(*failures)[e];
  std::vector<LambdaSummary> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    out.push_back(detail::summarize_lambda(grid[g], true_lambda(cfg.model, grid[g]), fits[g]));
  return out;
}

}  // namespace tailray
