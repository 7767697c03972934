#pragma once

// Joint tail probability estimators on exponential margins:
//  - ray extrapolation with a Hill fit of lambda(omega)          (WT)
//  - diagonal extrapolation with the coefficient of tail dependence (LT)
//  - conditional extremes with parametric normalization          (HT)
// plus the linearity and quantile-quantile fit diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailray/copulas.hpp"
#include "tailray/errors.hpp"
#include "tailray/margins.hpp"
#include "tailray/random.hpp"

namespace tailray {

/// T_i = min{x_i / a, y_i / b}; a zero weight drops that coordinate.
inline std::vector<double> structure_variable(std::span<const double> x, std::span<const double> y, double a, double b) {
  if (x.size() != y.size()) throw DomainError("structure_variable: coordinate series differ in length");
  if (!(a >= 0.0 && b >= 0.0) || (a == 0.0 && b == 0.0))
    throw DomainError("structure_variable: weights must be >= 0 and not both zero");
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (a == 0.0)
      t[i] = y[i] / b;
    else if (b == 0.0)
      t[i] = x[i] / a;
    else
      t[i] = std::min(x[i] / a, y[i] / b);
  }
  return t;
}

/// Structure variable on ray omega; omega = 0 gives Y_E and omega = 1 gives X_E.
inline std::vector<double> structure_variable(const ExponentialSample& sample, double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("structure_variable: omega must lie in [0, 1]");
  return structure_variable(sample.x(), sample.y(), omega, 1.0 - omega);
}

/// Threshold choice: a fraction of the data to exceed, or a fixed level.
struct ThresholdRule {
  enum class Kind { fraction, fixed };
  Kind kind = Kind::fraction;
  double value = 0.10;

  static ThresholdRule fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) throw DomainError("ThresholdRule: fraction must lie in (0, 1)");
    return {Kind::fraction, f};
  }
  static ThresholdRule fixed(double u) {
    if (!std::isfinite(u)) throw DomainError("ThresholdRule: fixed threshold must be finite");
    return {Kind::fixed, u};
  }
};

inline constexpr std::size_t kMinExceedances = 5;

/// Number of exceedances targeted by a fraction rule.
inline std::size_t exceedance_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

/// The (k+1)-th largest value, so exactly k values lie strictly above it when untied.
inline double upper_order_threshold(std::span<const double> values, std::size_t k) {
  if (k >= values.size()) throw DomainError("upper_order_threshold: k must be below the sample size");
  std::vector<double> copy(values.begin(), values.end());
  auto nth = copy.begin() + static_cast<std::ptrdiff_t>(k);
  std::nth_element(copy.begin(), nth, copy.end(), std::greater<>());
  return *nth;
}

struct AngularFit {
  double omega = 0.0;
  double lambda_hat = 0.0;
  double u = 0.0;
  std::size_t k = 0;
  double se = 0.0;
};

/// Hill estimate of the exponential rate of the excesses of t above the threshold.
inline AngularFit fit_rate(std::span<const double> t, ThresholdRule rule) {
  double u = rule.value;
  if (rule.kind == ThresholdRule::Kind::fraction) {
    const std::size_t target = exceedance_count(t.size(), rule.value);
    if (target < kMinExceedances || target >= t.size())
      throw InsufficientDataError("fit_lambda: fraction rule leaves " + std::to_string(target) + " exceedances", target);
    u = upper_order_threshold(t, target);
  }
  std::size_t k = 0;
  double excess = 0.0;
  for (double v : t) {
    if (v > u) {
      ++k;
      excess += v - u;
    }
  }
  if (k < kMinExceedances)
    throw InsufficientDataError("fit_lambda: only " + std::to_string(k) + " exceedances of the threshold", k);
  if (!(excess > 0.0)) throw NumericError("fit_lambda: all excesses are zero");
  AngularFit fit;
  fit.lambda_hat = static_cast<double>(k) / excess;
  fit.u = u;
  fit.k = k;
  fit.se = fit.lambda_hat / std::sqrt(static_cast<double>(k));
  return fit;
}

/// lambda-hat(omega): reciprocal mean excess of the structure variable above u.
inline AngularFit fit_lambda(const ExponentialSample& sample, double omega, ThresholdRule rule = ThresholdRule{}) {
  auto fit = fit_rate(structure_variable(sample, omega), rule);
  fit.omega = omega;
  return fit;
}

enum class Method { wt, lt, ht, empirical };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::wt: return "WT";
    case Method::lt: return "LT";
    case Method::ht: return "HT";
    case Method::empirical: return "empirical";
  }
  return "?";
}

struct ProbEstimate {
  double value = 0.0;
  Method method = Method::empirical;
  bool is_zero = true;
  double omega = 0.0;
  double threshold = 0.0;     // u_n (WT, LT) or the conditioning level (HT)
  double shift = 0.0;         // extrapolation distance v
  double rate = 0.0;          // lambda-hat, 1/eta-hat or 0
  std::size_t count = 0;      // base-set count (WT, LT, empirical) or indicator hits (HT)
  std::size_t draws = 0;      // r for HT, n otherwise
  std::array<double, 2> base{0.0, 0.0};

  static ProbEstimate make(Method m, double v) {
    ProbEstimate e;
    e.method = m;
    e.value = v;
    e.is_zero = (v == 0.0);
    return e;
  }
};

inline std::size_t joint_count(const ExponentialSample& sample, double x0, double y0) {
  const auto x = sample.x();
  const auto y = sample.y();
  std::size_t c = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > x0 && y[i] > y0) ++c;
  return c;
}

inline ProbEstimate empirical_probability(const ExponentialSample& sample, const SurvivorSet& target) {
  const std::size_t c = joint_count(sample, target[0], target[1]);
  auto e = ProbEstimate::make(Method::empirical, static_cast<double>(c) / static_cast<double>(sample.size()));
  e.count = c;
  e.draws = sample.size();
  e.base = {target[0], target[1]};
  return e;
}

/// exp(-lambda-hat v) times the empirical probability of {X_E > omega u, Y_E > (1 - omega) u}.
inline ProbEstimate wt_probability(const ExponentialSample& sample, const AngularFit& fit, double v) {
  if (!(v >= 0.0)) throw DomainError("wt_probability: extrapolation distance must be >= 0");
  const double bx = fit.omega * fit.u;
  const double by = (1.0 - fit.omega) * fit.u;
  const std::size_t c = joint_count(sample, bx, by);
  const double base = static_cast<double>(c) / static_cast<double>(sample.size());
  auto e = ProbEstimate::make(Method::wt, c == 0 ? 0.0 : std::exp(-fit.lambda_hat * v) * base);
  e.omega = fit.omega;
  e.threshold = fit.u;
  e.shift = v;
  e.rate = fit.lambda_hat;
  e.count = c;
  e.draws = sample.size();
  e.base = {bx, by};
  return e;
}

inline ProbEstimate wt_probability(const ExponentialSample& sample, double omega, double u_n, double v) {
  return wt_probability(sample, fit_lambda(sample, omega, ThresholdRule::fixed(u_n)), v);
}

/// Ray estimate for a corner: fit on the corner's ray, then extrapolate from the fit threshold.
inline ProbEstimate wt_estimate(const ExponentialSample& sample, const SurvivorSet& target, double frac) {
  const double level = target[0] + target[1];
  if (!(level > 0.0)) throw DomainError("wt_estimate: target must not be the origin");
  const double omega = target[0] / level;
  const auto fit = fit_lambda(sample, omega, ThresholdRule::fraction(frac));
  if (level <= fit.u) {
    auto e = empirical_probability(sample, target);
    e.method = Method::wt;
    e.omega = omega;
    e.threshold = level;
    e.rate = fit.lambda_hat;
    return e;
  }
  return wt_probability(sample, fit, level - fit.u);
}

/// Diagonal-shift extrapolation exp(-v / eta-hat) P~(target - (v, v)).
/// diagonal is the fit on omega = 1/2; 1/eta-hat = 2 lambda-hat(1/2) and the
/// base set is never pulled below (u/2, u/2), u the diagonal threshold.
inline ProbEstimate lt_probability(const ExponentialSample& sample, const SurvivorSet& target, const AngularFit& diagonal) {
  if (!(target[0] > 0.0 && target[1] > 0.0)) throw DomainError("lt_probability: target must lie in the open quadrant");
  const double inv_eta = 2.0 * diagonal.lambda_hat;
  const double floor = 0.5 * diagonal.u;
  const double lo = std::min(target[0], target[1]);
  double v = 0.0;
  std::array<double, 2> base{target[0], target[1]};
  if (lo > floor) {
    v = lo - floor;
    if (target[0] == target[1]) {
      base = {floor, floor};
    } else if (target[0] < target[1]) {
      base = {floor, target[1] - v};
    } else {
      base = {target[0] - v, floor};
    }
  }
  const std::size_t c = joint_count(sample, base[0], base[1]);
  const double emp = static_cast<double>(c) / static_cast<double>(sample.size());
  auto e = ProbEstimate::make(Method::lt, c == 0 ? 0.0 : std::exp(-inv_eta * v) * emp);
  e.omega = target[0] / (target[0] + target[1]);
  e.threshold = diagonal.u;
  e.shift = v;
  e.rate = inv_eta;
  e.count = c;
  e.draws = sample.size();
  e.base = base;
  return e;
}

inline ProbEstimate lt_probability(const ExponentialSample& sample, const SurvivorSet& target, double frac) {
  return lt_probability(sample, target, fit_lambda(sample, 0.5, ThresholdRule::fraction(frac)));
}

/// Conditional extremes fit X_E | Y_E = y ~ alpha y + y^beta Z, Z working-normal,
/// on pairs with Y_E above its empirical quantile.
struct HTFit {
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  double u_y = 0.0;
  std::vector<double> residuals;
  double loglik = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;

  double location(double y) const { return alpha * y; }
  double scale(double y) const { return std::pow(y, beta); }
};

struct HtFitOptions {
  double quantile = 0.90;
  double beta_lower = -5.0;
  double beta_upper = 1.0 - 1e-6;
  double grad_tol = 1e-6;
  int max_iter = 500;
};

namespace detail {

struct HtObjective {
  std::span<const double> x;
  std::span<const double> y;
  std::vector<double> log_y;
  double mean_log_y = 0.0;

  HtObjective(std::span<const double> xs, std::span<const double> ys) : x(xs), y(ys), log_y(ys.size()) {
    for (std::size_t i = 0; i < y.size(); ++i) log_y[i] = std::log(y[i]);
    mean_log_y = std::accumulate(log_y.begin(), log_y.end(), 0.0) / static_cast<double>(y.size());
  }

  // Negative profile log-likelihood per observation (mu, sigma profiled out) and its gradient.
  double operator()(const std::array<double, 2>& p, std::array<double, 2>* grad) const {
    const double a = p[0], b = p[1];
    const std::size_t n = x.size();
    std::vector<double> z(n), dza(n), dzb(n);
    double zbar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::exp(-b * log_y[i]);  // y^-beta
      z[i] = (x[i] - a * y[i]) * s;
      dza[i] = -y[i] * s;
      dzb[i] = -z[i] * log_y[i];
      zbar += z[i];
    }
    zbar /= static_cast<double>(n);
    double var = 0.0, cov_a = 0.0, cov_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = z[i] - zbar;
      var += c * c;
      cov_a += c * dza[i];
      cov_b += c * dzb[i];
    }
    var /= static_cast<double>(n);
    cov_a /= static_cast<double>(n);
    cov_b /= static_cast<double>(n);
    if (!(var > 0.0)) return std::numeric_limits<double>::infinity();
    if (grad) {
      (*grad)[0] = cov_a / var;
      (*grad)[1] = mean_log_y + cov_b / var;
    }
    return b * mean_log_y + 0.5 * std::log(var) + 0.5;
  }
};

struct BoxResult {
  std::array<double, 2> point;
  double value;
  double grad_norm;
  int iterations;
  bool converged;
};

// Projected BFGS on a box with active-set handling and Armijo backtracking.
template <class F>
BoxResult minimize_box(const F& f, std::array<double, 2> x, const std::array<double, 2>& lo,
                       const std::array<double, 2>& hi, double grad_tol, int max_iter) {
  auto project = [&](std::array<double, 2> p) {
    for (int i = 0; i < 2; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  };
  auto projected_grad = [&](const std::array<double, 2>& p, const std::array<double, 2>& g) {
    std::array<double, 2> pg = g;
    for (int i = 0; i < 2; ++i) {
      if (p[i] <= lo[i] && g[i] > 0.0) pg[i] = 0.0;
      if (p[i] >= hi[i] && g[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
  };
  x = project(x);
  std::array<double, 2> g{};
  double fx = f(x, &g);
  std::array<std::array<double, 2>, 2> h{{{1.0, 0.0}, {0.0, 1.0}}};
  std::array<bool, 2> prev_active{false, false};
  int it = 0;
  for (; it < max_iter; ++it) {
    const auto pg = projected_grad(x, g);
    const double gn = std::hypot(pg[0], pg[1]);
    if (gn < grad_tol) return {x, fx, gn, it, true};
    std::array<bool, 2> active{};
    for (int i = 0; i < 2; ++i) active[i] = (pg[i] == 0.0 && g[i] != 0.0);
    if (active != prev_active) h = {{{1.0, 0.0}, {0.0, 1.0}}};
    prev_active = active;
    std::array<double, 2> d{};
    for (int i = 0; i < 2; ++i) {
      if (active[i]) continue;
      for (int j = 0; j < 2; ++j)
        if (!active[j]) d[i] -= h[i][j] * g[j];
    }
    double slope = d[0] * g[0] + d[1] * g[1];
    if (!(slope < 0.0)) {
      h = {{{1.0, 0.0}, {0.0, 1.0}}};
      d = {-pg[0], -pg[1]};
    }
    double t = 1.0;
    std::array<double, 2> xn{};
    std::array<double, 2> gnv{};
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = project({x[0] + t * d[0], x[1] + t * d[1]});
      fn = f(xn, &gnv);
      const double decrease = g[0] * (xn[0] - x[0]) + g[1] * (xn[1] - x[1]);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return {x, fx, gn, it, false};
    const std::array<double, 2> s{xn[0] - x[0], xn[1] - x[1]};
    const std::array<double, 2> yv{gnv[0] - g[0], gnv[1] - g[1]};
    const double sy = s[0] * yv[0] + s[1] * yv[1];
    if (sy > 1e-14) {
      // Inverse-Hessian BFGS update.
      std::array<double, 2> hy{h[0][0] * yv[0] + h[0][1] * yv[1], h[1][0] * yv[0] + h[1][1] * yv[1]};
      const double yhy = yv[0] * hy[0] + yv[1] * hy[1];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          h[i][j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    }
    x = xn;
    fx = fn;
    g = gnv;
  }
  const auto pg = projected_grad(x, g);
  return {x, fx, std::hypot(pg[0], pg[1]), it, false};
}

}  // namespace detail

inline HTFit fit_ht(const ExponentialSample& sample, const HtFitOptions& opt = {}) {
  if (!(opt.quantile > 0.0 && opt.quantile < 1.0)) throw DomainError("fit_ht: quantile must lie in (0, 1)");
  const auto xs = sample.x();
  const auto ys = sample.y();
  const std::size_t k = exceedance_count(ys.size(), 1.0 - opt.quantile);
  if (k < 50) throw InsufficientDataError("fit_ht: fewer than 50 conditioning exceedances", k);
  const double u_y = upper_order_threshold(ys, k);
  std::vector<double> cx, cy;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] > u_y) {
      cx.push_back(xs[i]);
      cy.push_back(ys[i]);
    }
  }
  if (cy.size() < 50) throw InsufficientDataError("fit_ht: fewer than 50 conditioning exceedances", cy.size());
  if (!(u_y > 0.0)) throw NumericError("fit_ht: conditioning threshold must be positive");

  const detail::HtObjective objective(cx, cy);
  const std::array<double, 2> lo{0.0, opt.beta_lower};
  const std::array<double, 2> hi{1.0, opt.beta_upper};
  std::optional<detail::BoxResult> best;
  std::optional<detail::BoxResult> best_any;
  for (double a0 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double b0 : {-1.0, 0.0, 0.5}) {
      const auto r = detail::minimize_box(objective, {a0, b0}, lo, hi, opt.grad_tol, opt.max_iter);
      if (!best_any || r.value < best_any->value) best_any = r;
      if (r.converged && (!best || r.value < best->value)) best = r;
    }
  }
  if (!best) {
    throw NumericError("fit_ht: optimizer did not converge; best point (alpha=" + std::to_string(best_any->point[0]) +
                       ", beta=" + std::to_string(best_any->point[1]) +
                       "), projected gradient norm " + std::to_string(best_any->grad_norm));
  }
  HTFit fit;
  fit.alpha = best->point[0];
  fit.beta = best->point[1];
  fit.u_y = u_y;
  fit.grad_norm = best->grad_norm;
  fit.iterations = best->iterations;
  fit.residuals.resize(cy.size());
  for (std::size_t i = 0; i < cy.size(); ++i) fit.residuals[i] = (cx[i] - fit.alpha * cy[i]) / fit.scale(cy[i]);
  const double n = static_cast<double>(cy.size());
  fit.mu = std::accumulate(fit.residuals.begin(), fit.residuals.end(), 0.0) / n;
  double var = 0.0;
  for (double z : fit.residuals) var += (z - fit.mu) * (z - fit.mu);
  fit.sigma = std::sqrt(var / n);
  fit.loglik = -n * (best->value + 0.5 * std::log(2.0 * std::numbers::pi));
  return fit;
}

/// Monte Carlo conditional-extremes estimate of P(X_E > omega u_n, Y_E > (1 - omega) u_n).
inline ProbEstimate ht_probability(const HTFit& fit, double omega, double u_n, std::size_t r, std::uint64_t seed) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("ht_probability: omega must lie in [0, 1]");
  if (r == 0) throw DomainError("ht_probability: draw count must be >= 1");
  if (fit.residuals.empty()) throw DomainError("ht_probability: fit has no residuals");
  const double y_level = (1.0 - omega) * u_n;
  const double x_level = omega * u_n;
  if (y_level < fit.u_y) throw DomainError("ht_probability: conditioning level lies below the fit threshold");
  const double marginal = std::exp(-y_level);
  ProbEstimate e;
  e.method = Method::ht;
  e.omega = omega;
  e.threshold = y_level;
  e.draws = r;
  e.base = {x_level, y_level};
  if (omega == 0.0) {
    // {X_E > 0} has probability one on exponential margins.
    e.value = marginal;
    e.is_zero = false;
    e.count = r;
    return e;
  }
  Rng rng(seed);
  const double m = static_cast<double>(fit.residuals.size());
  std::size_t hits = 0;
  for (std::size_t j = 0; j < r; ++j) {
    const double ystar = y_level + standard_exponential(rng);
    const auto idx = std::min(static_cast<std::size_t>(uniform_open(rng) * m), fit.residuals.size() - 1);
    if (fit.location(ystar) + fit.scale(ystar) * fit.residuals[idx] > x_level) ++hits;
  }
  e.count = hits;
  e.value = marginal * static_cast<double>(hits) / static_cast<double>(r);
  e.is_zero = (hits == 0);
  return e;
}

struct LinearityDiagnostic {
  std::vector<std::pair<double, double>> points;  // (c, log count), non-empty sets only
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// log #{X_E > c omega log m, Y_E > c (1 - omega) log m} against c, with a least-squares line.
inline LinearityDiagnostic diagnose_linearity(const ExponentialSample& sample, double omega,
                                              std::span<const double> c_grid) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("diagnose_linearity: omega must lie in [0, 1]");
  for (std::size_t i = 1; i < c_grid.size(); ++i)
    if (!(c_grid[i] > c_grid[i - 1])) throw DomainError("diagnose_linearity: c grid must be increasing");
  const double log_m = std::log(static_cast<double>(sample.size()));
  LinearityDiagnostic out;
  for (double c : c_grid) {
    const std::size_t cnt = joint_count(sample, c * omega * log_m, c * (1.0 - omega) * log_m);
    if (cnt > 0) out.points.emplace_back(c, std::log(static_cast<double>(cnt)));
  }
  if (out.points.size() < 3)
    throw InsufficientDataError("diagnose_linearity: fewer than 3 non-empty sets", out.points.size());
  const double n = static_cast<double>(out.points.size());
  double sx = 0, sy = 0;
  for (auto [c, l] : out.points) {
    sx += c;
    sy += l;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [c, l] : out.points) {
    sxx += (c - mx) * (c - mx);
    sxy += (c - mx) * (l - my);
    syy += (l - my) * (l - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

/// (theoretical, empirical) quantile pairs for the excesses behind an angular fit.
inline std::vector<std::pair<double, double>> qq_excesses(const AngularFit& fit, std::span<const double> structure) {
  std::vector<double> ex;
  for (double t : structure)
    if (t > fit.u) ex.push_back(t - fit.u);
  std::sort(ex.begin(), ex.end());
  const double k = static_cast<double>(ex.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const double p = static_cast<double>(i + 1) / (k + 1.0);
    out.emplace_back(-std::log1p(-p) / fit.lambda_hat, ex[i]);
  }
  return out;
}

inline std::vector<std::pair<double, double>> qq_excesses(const AngularFit& fit, const ExponentialSample& sample) {
  return qq_excesses(fit, structure_variable(sample, fit.omega));
}

}  // namespace tailray
