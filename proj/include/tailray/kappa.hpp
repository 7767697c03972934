#pragma once

// Analytics on the decay-exponent function kappa and its angular
// restriction lambda: derivatives, conditional shape parameters,
// a survivor-based numeric oracle and executable property checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailray/copulas.hpp"
#include "tailray/errors.hpp"
#include "tailray/random.hpp"

namespace tailray {

enum class Smoothness { smooth, kinked };

/// kappa as a callable on the non-negative orthant (minus the origin).
struct KappaFunction {
  std::function<double(std::span<const double>)> evaluate;
  std::size_t dim = 2;
  Smoothness hint = Smoothness::smooth;
  // Rays at which lambda is known not to be differentiable (bivariate only).
  std::vector<double> kinks;
  std::string label;
  std::map<std::string, double> params;

  double operator()(std::span<const double> growth) const { return evaluate(growth); }
  double operator()(std::initializer_list<double> growth) const {
    return evaluate(std::span<const double>(growth.begin(), growth.size()));
  }
};

inline KappaFunction kappa_function(const CopulaModel& model) {
  KappaFunction k;
  k.evaluate = [model](std::span<const double> g) { return true_kappa(model, g); };
  k.dim = model.dim();
  k.label = model.name();
  k.params = model.params();
  if (model.is<LogisticBEV>() || model.is<ClaytonLowerTail>()) {
    k.hint = Smoothness::kinked;
    k.kinks = {0.5};
  } else if (model.is<Morgenstern>() && model.as<Morgenstern>().alpha == -1.0) {
    k.hint = Smoothness::kinked;
    k.kinks = {0.5};
  } else if (model.is<TrivariateMaxPareto>()) {
    k.hint = Smoothness::kinked;
  }
  return k;
}

/// Whether the positive-quadrant-dependence upper bound applies to the model.
inline bool is_pqd(const CopulaModel& model) {
  if (model.is<BivariateNormal>()) return model.as<BivariateNormal>().rho >= 0.0;
  if (model.is<Morgenstern>()) return model.as<Morgenstern>().alpha >= 0.0;
  return true;
}

inline double lambda_of(const KappaFunction& kappa, double omega) {
  if (kappa.dim != 2) throw DomainError("lambda_of: bivariate kappa required");
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("lambda_of: omega must lie in [0, 1]");
  return kappa({omega, 1.0 - omega});
}

/// Richardson-extrapolated central difference of lambda at omega.
/// Returns nullopt where lambda has a kink.
inline std::optional<double> lambda_derivative(const KappaFunction& kappa, double omega, double h = 1e-5) {
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("lambda_derivative: omega must lie in (0, 1)");
  if (!(h > 0.0) || omega - h < 0.0 || omega + h > 1.0)
    throw DomainError("lambda_derivative: step leaves [0, 1]");
  for (double kink : kappa.kinks)
    if (std::abs(omega - kink) <= 2.0 * h) return std::nullopt;
  auto lam = [&](double w) { return lambda_of(kappa, w); };
  const double centre = lam(omega);
  const double right = (lam(omega + h) - centre) / h;
  const double left = (centre - lam(omega - h)) / h;
  if (std::abs(right - left) > 0.05 * (1.0 + std::abs(right) + std::abs(left))) return std::nullopt;
  const double d_h = (lam(omega + h) - lam(omega - h)) / (2.0 * h);
  const double d_h2 = (lam(omega + 0.5 * h) - lam(omega - 0.5 * h)) / h;
  return (4.0 * d_h2 - d_h) / 3.0;
}

/// Shape parameters of the limiting independent Pareto pair on ray omega.
struct ShapePair {
  double kappa1;
  double kappa2;
  double omega;
};

inline ShapePair shape_parameters(const KappaFunction& kappa, double omega) {
  const auto deriv = lambda_derivative(kappa, omega);
  if (!deriv) throw NonDifferentiableError("shape_parameters: lambda is not differentiable at this ray", omega);
  const double lam = lambda_of(kappa, omega);
  double k1 = lam + (1.0 - omega) * *deriv;
  double k2 = lam - omega * *deriv;
  // Finite-difference noise can push an exact zero slightly negative.
  constexpr double noise = 1e-8;
  if (k1 < -noise || k2 < -noise)
    throw NumericError("shape_parameters: negative shape parameter; kappa is not monotone at this ray");
  return {std::max(k1, 0.0), std::max(k2, 0.0), omega};
}

/// -log P(X_E > g_1 log n, ...) / log n from the exact survivor function.
inline double kappa_oracle(const CopulaModel& model, std::span<const double> growth, double n) {
  if (!(n >= 1e3)) throw DomainError("kappa_oracle: scale n must be >= 1e3");
  if (growth.size() != model.dim()) throw DomainError("kappa_oracle: growth dimension does not match model");
  const double log_n = std::log(n);
  std::vector<double> corner(growth.begin(), growth.end());
  for (double& c : corner) c *= log_n;
  const double log_s = log_survivor_exp(model, SurvivorSet(corner));
  if (!std::isfinite(log_s)) throw NumericError("kappa_oracle: survivor degenerate in log space");
  return -log_s / log_n;
}

inline double kappa_oracle(const CopulaModel& model, std::initializer_list<double> growth, double n) {
  return kappa_oracle(model, std::span<const double>(growth.begin(), growth.size()), n);
}

struct PropertyResult {
  std::string name;
  bool checked = true;
  bool pass = true;
  double worst_violation = 0.0;
};

struct PropertyReport {
  std::string family;
  std::map<std::string, double> params;
  std::vector<PropertyResult> properties;
  std::uint64_t grid_seed = 0;
  std::size_t grid_size = 0;

  bool all_pass() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.pass; });
  }
  const PropertyResult& get(const std::string& name) const {
    for (const auto& p : properties)
      if (p.name == name) return p;
    throw DomainError("PropertyReport: no property named '" + name + "'");
  }
};

namespace detail {

inline std::vector<std::vector<double>> random_growth_grid(std::size_t dim, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> grid(count, std::vector<double>(dim));
  for (auto& g : grid)
    for (double& c : g) c = 3.0 * uniform_open(rng);
  return grid;
}

class Tracker {
 public:
  Tracker(std::string name, double tol) : result_{std::move(name)}, tol_(tol) {}
  void observe(double violation) {
    result_.worst_violation = std::max(result_.worst_violation, violation);
    if (violation > tol_) result_.pass = false;
  }
  PropertyResult take() { return result_; }

 private:
  PropertyResult result_;
  double tol_;
};

}  // namespace detail

inline constexpr double kPropertyTolerance = 1e-9;

struct SubadditivityViolation {
  std::vector<double> a;
  std::vector<double> b;
  double magnitude;  // kappa(a + b) - kappa(a) - kappa(b)
};

struct ConvexityReport {
  std::size_t pairs_checked = 0;
  std::vector<SubadditivityViolation> violations;
  double worst = 0.0;
  bool convex() const { return violations.empty(); }
};

/// Sampled subadditivity kappa(a + b) <= kappa(a) + kappa(b) over random pairs.
inline ConvexityReport convexity_check(const KappaFunction& kappa, std::size_t pairs, std::uint64_t seed) {
  const auto grid = detail::random_growth_grid(kappa.dim, 2 * pairs, seed);
  ConvexityReport report;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& a = grid[2 * i];
    const auto& b = grid[2 * i + 1];
    std::vector<double> sum(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) sum[j] = a[j] + b[j];
    const double ka = kappa(a), kb = kappa(b), ks = kappa(sum);
    const double excess = ks - ka - kb;
    ++report.pairs_checked;
    if (excess > kPropertyTolerance * (ka + kb)) {
      report.violations.push_back({a, b, excess});
      report.worst = std::max(report.worst, excess);
    }
  }
  return report;
}

/// Executable check of homogeneity, monotonicity, marginal identity, the
/// lower and (optionally) PQD upper bounds, subadditivity and, in three
/// dimensions, consistency under dropping a coordinate.
inline PropertyReport property_suite(const KappaFunction& kappa, bool pqd, std::size_t grid_size, std::uint64_t seed) {
  if (grid_size < 100) throw DomainError("property_suite: at least 100 grid points required");
  const double tol = kPropertyTolerance;
  const std::size_t d = kappa.dim;
  const auto grid = detail::random_growth_grid(d, grid_size, seed);

  detail::Tracker homogeneity("homogeneity", tol);
  detail::Tracker monotonicity("monotonicity", tol);
  detail::Tracker marginal("marginal_identity", tol);
  detail::Tracker lower("lower_bound_max", tol);
  detail::Tracker upper("upper_bound_sum_pqd", tol);
  detail::Tracker consistency("dimension_consistency", tol);

  for (const auto& g : grid) {
    const double k = kappa(g);
    for (double h : {0.5, 2.0, 7.3}) {
      std::vector<double> hg(g);
      for (double& c : hg) c *= h;
      homogeneity.observe(std::abs(kappa(hg) - h * k) / (h * k));
    }
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> bigger(g);
      bigger[i] = bigger[i] * 1.5 + 0.1;
      monotonicity.observe(std::max(0.0, k - kappa(bigger)) / k);

      std::vector<double> axis(d, 0.0);
      axis[i] = g[i];
      marginal.observe(std::abs(kappa(axis) - g[i]) / g[i]);

      if (d == 3) {
        std::vector<double> dropped(g);
        dropped[i] = 0.0;
        consistency.observe(std::max(0.0, kappa(dropped) - k) / k);
      }
    }
    const double mx = *std::max_element(g.begin(), g.end());
    double sum = 0.0;
    for (double c : g) sum += c;
    lower.observe(std::max(0.0, mx - k) / k);
    upper.observe(std::max(0.0, k - sum) / k);
  }

  const auto convexity = convexity_check(kappa, grid_size, mix_seed(seed));
  PropertyResult subadd{"subadditivity", true, convexity.convex(), 0.0};
  subadd.worst_violation = convexity.worst;

  PropertyReport report;
  report.family = kappa.label;
  report.params = kappa.params;
  report.grid_seed = seed;
  report.grid_size = grid_size;
  report.properties.push_back(homogeneity.take());
  report.properties.push_back(monotonicity.take());
  report.properties.push_back(marginal.take());
  report.properties.push_back(lower.take());
  auto up = upper.take();
  if (!pqd) {
    // Recorded but not judged without positive quadrant dependence.
    up.checked = false;
    up.pass = true;
  }
  report.properties.push_back(up);
  report.properties.push_back(subadd);
  if (d == 3) report.properties.push_back(consistency.take());
  return report;
}

}  // namespace tailray
