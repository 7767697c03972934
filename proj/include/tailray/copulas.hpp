#pragma once

// The six example dependence structures: exact samplers on exponential
// margins, exact joint survivor functions and closed-form decay exponents.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tailray/errors.hpp"
#include "tailray/margins.hpp"
#include "tailray/normal.hpp"
#include "tailray/random.hpp"

namespace tailray {

struct BivariateNormal {
  double rho;
};
struct InvertedLogistic {
  double alpha;
};
struct Morgenstern {
  double alpha;
};
struct LogisticBEV {
  double alpha;
};
struct ClaytonLowerTail {
  double alpha;
};
struct TrivariateMaxPareto {};

using CopulaFamily =
    std::variant<BivariateNormal, InvertedLogistic, Morgenstern, LogisticBEV, ClaytonLowerTail, TrivariateMaxPareto>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// A validated member of one of the six families.
class CopulaModel {
 public:
  CopulaModel(CopulaFamily family) : family_(family) { validate(); }

  const CopulaFamily& family() const noexcept { return family_; }
  std::size_t dim() const noexcept { return std::holds_alternative<TrivariateMaxPareto>(family_) ? 3 : 2; }

  template <class F>
  bool is() const noexcept {
    return std::holds_alternative<F>(family_);
  }
  template <class F>
  const F& as() const {
    return std::get<F>(family_);
  }

  /// Short tag used on the command line and in reports.
  std::string name() const {
    return std::visit(Overloaded{[](const BivariateNormal&) { return std::string("bvn"); },
                                 [](const InvertedLogistic&) { return std::string("invlog"); },
                                 [](const Morgenstern&) { return std::string("morgenstern"); },
                                 [](const LogisticBEV&) { return std::string("logistic"); },
                                 [](const ClaytonLowerTail&) { return std::string("clayton"); },
                                 [](const TrivariateMaxPareto&) { return std::string("trivariate"); }},
                      family_);
  }

  std::map<std::string, double> params() const {
    return std::visit(Overloaded{[](const BivariateNormal& f) { return std::map<std::string, double>{{"rho", f.rho}}; },
                                 [](const TrivariateMaxPareto&) { return std::map<std::string, double>{}; },
                                 [](const auto& f) { return std::map<std::string, double>{{"alpha", f.alpha}}; }},
                      family_);
  }

  friend bool operator==(const CopulaModel& a, const CopulaModel& b) {
    return a.name() == b.name() && a.params() == b.params();
  }

 private:
  void validate() const {
    auto fail = [](const std::string& msg) { throw DomainError(msg); };
    std::visit(Overloaded{[&](const BivariateNormal& f) {
                            if (!(f.rho > -1.0 && f.rho < 1.0)) fail("bvn: rho must lie in (-1, 1)");
                          },
                          [&](const InvertedLogistic& f) {
                            if (!(f.alpha > 0.0 && f.alpha <= 1.0)) fail("invlog: alpha must lie in (0, 1]");
                          },
                          [&](const Morgenstern& f) {
                            if (!(f.alpha >= -1.0 && f.alpha <= 1.0)) fail("morgenstern: alpha must lie in [-1, 1]");
                          },
                          [&](const LogisticBEV& f) {
                            if (!(f.alpha > 0.0 && f.alpha <= 1.0)) fail("logistic: alpha must lie in (0, 1]");
                          },
                          [&](const ClaytonLowerTail& f) {
                            if (!(f.alpha > 0.0 && std::isfinite(f.alpha))) fail("clayton: alpha must be > 0");
                          },
                          [](const TrivariateMaxPareto&) {}},
               family_);
  }

  CopulaFamily family_;
};

/// Build a model from its command-line tag and parameter map.
inline CopulaModel make_model(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw DomainError(name + ": missing parameter '" + key + "'");
    return it->second;
  };
  if (name == "bvn") return CopulaModel(BivariateNormal{get("rho")});
  if (name == "invlog") return CopulaModel(InvertedLogistic{get("alpha")});
  if (name == "morgenstern") return CopulaModel(Morgenstern{get("alpha")});
  if (name == "logistic") return CopulaModel(LogisticBEV{get("alpha")});
  if (name == "clayton") return CopulaModel(ClaytonLowerTail{get("alpha")});
  if (name == "trivariate") return CopulaModel(TrivariateMaxPareto{});
  throw DomainError("unknown model '" + name + "'");
}

/// Corner of the joint exceedance event {X_E > x, Y_E > y [, Z_E > z]}.
class SurvivorSet {
 public:
  SurvivorSet(std::vector<double> corner) : corner_(std::move(corner)) {
    if (corner_.size() < 2 || corner_.size() > 3) throw DomainError("SurvivorSet: dimension must be 2 or 3");
    for (double c : corner_)
      if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("SurvivorSet: coordinates must be finite and >= 0");
  }
  SurvivorSet(double x, double y) : SurvivorSet(std::vector<double>{x, y}) {}
  SurvivorSet(double x, double y, double z) : SurvivorSet(std::vector<double>{x, y, z}) {}

  std::size_t dim() const noexcept { return corner_.size(); }
  double operator[](std::size_t i) const { return corner_.at(i); }
  std::span<const double> corner() const noexcept { return corner_; }

 private:
  std::vector<double> corner_;
};

namespace detail {

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(-log(1 - exp(-x))) for x > 0.
inline double log_neg_log1m_exp(double x) {
  if (x > 30.0) {
    const double p = std::exp(-x);
    return -x + std::log1p(p * (0.5 + p / 3.0));
  }
  return std::log(-std::log1p(-std::exp(-x)));
}

// log(expm1(w)) given log w.
inline double log_expm1_from_log(double log_w) {
  if (log_w < -30.0) return log_w + 0.5 * std::exp(log_w);
  const double w = std::exp(log_w);
  if (w > 30.0) return w + std::log1p(-std::exp(-w));
  return std::log(std::expm1(w));
}

// Positive stable variate with Laplace transform exp(-t^alpha) (Kanter's representation).
inline double positive_stable(double alpha, Rng& rng) {
  if (alpha >= 1.0) return 1.0;
  const double theta = std::numbers::pi * uniform_open(rng);
  const double w = standard_exponential(rng);
  const double log_a = (alpha * std::log(std::sin(alpha * theta)) +
                        (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * theta)) - std::log(std::sin(theta))) /
                       (1.0 - alpha);
  return std::exp((1.0 - alpha) / alpha * (log_a - std::log(w)));
}

inline double log_survivor_bvn(double rho, double x, double y) {
  const double z1 = normal::upper_quantile_log(-x);
  const double z2 = normal::upper_quantile_log(-y);
  const double zg = std::max(z1, z2);
  const double zb = std::min(z1, z2);
  const double s = std::sqrt(1.0 - rho * rho);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double tol = 1e-13;
  double err = 0.0;
  double l1 = 0.0;
  if (zg > 1.0) {
    // Substitution t = zg (y - zg); integrand rescaled by Q at t = 0.
    const double log_q0 = normal::log_upper_tail((zb - rho * zg) / s);
    auto f = [&](double t) {
      const double arg = (zb - rho * zg - rho * t / zg) / s;
      return std::exp(normal::log_upper_tail(arg) - log_q0 - t - t * t / (2.0 * zg * zg));
    };
    const double upper = 40.0 * zg;
    const double val = Quad::integrate(f, 0.0, upper, 25, tol, &err, &l1);
    if (!(val > 0.0) || err > 1e-10 * l1)
      throw NumericError("bvn survivor: quadrature did not converge (achieved relative error " +
                         std::to_string(err / std::max(l1, 1e-300)) + ")");
    return -0.5 * zg * zg - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(zg) + log_q0 + std::log(val);
  }
  auto f = [&](double v) { return normal::upper_tail((zb - rho * v) / s) * normal::pdf(v); };
  const double val = Quad::integrate(f, zg, zg + 40.0, 25, tol, &err, &l1);
  if (!(val > 0.0) || err > 1e-10 * l1)
    throw NumericError("bvn survivor: quadrature did not converge (achieved relative error " +
                       std::to_string(err / std::max(l1, 1e-300)) + ")");
  return std::log(val);
}

inline double log_survivor_logistic_bev(double alpha, double x, double y) {
  if (alpha >= 1.0) return -x - y;
  if (x > y) std::swap(x, y);  // now a >= b
  const double la = log_neg_log1m_exp(x);
  const double lb = log_neg_log1m_exp(y);
  const double r = std::exp((lb - la) / alpha);
  const double e = std::expm1(alpha * std::log1p(r));
  // W = a + b - V = b (1 - (a/b) e), V the logistic exponent at (a, b).
  const double t = e > 0.0 ? std::exp(la - lb + std::log(e)) : 0.0;
  const double log_w = lb + std::log1p(-t);
  const double joint = std::log1p(-std::exp(-x)) + std::log1p(-std::exp(-y)) + log_expm1_from_log(log_w);
  return log_add_exp(-x - y, joint);
}

inline double log_survivor_clayton(double alpha, double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  const double d = std::exp((lo - hi) / alpha) * -std::expm1(-lo / alpha);
  return -hi - alpha * std::log1p(d);
}

// Reciprocal of the original-scale threshold G^{-1}(1 - e^{-x}), G(s) = (1 - 1/s)^2.
inline double trivariate_reciprocal_threshold(double x_e) {
  const double p = std::exp(-x_e);
  return p / (1.0 + std::sqrt(1.0 - p));
}

inline double survivor_trivariate(double xe, double ye, double ze) {
  const double sx = trivariate_reciprocal_threshold(xe);
  const double sy = trivariate_reciprocal_threshold(ye);
  const double sz = trivariate_reciprocal_threshold(ze);
  // Condition on the shared components U, V; every term is non-negative.
  const double a_above = std::min(sx, sy) + std::max(sy - sx, 0.0) * sx;
  const double a_below = std::max(sx - sy, 0.0) + (1.0 - std::max(sx, sy)) * sx;
  const double b_all = sz * (2.0 - sz);
  const double b_above = std::min(sy, sz) + std::max(sy - sz, 0.0) * sz;
  return a_above * b_all + b_above * a_below;
}

}  // namespace detail

/// n i.i.d. draws on exact standard exponential margins; deterministic in (model, n, seed).
inline ExponentialSample sample(const CopulaModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<double>> cols(model.dim(), std::vector<double>(n));
  auto& xs = cols[0];
  auto& ys = cols[1];
  std::visit(
      Overloaded{
          [&](const BivariateNormal& f) {
            std::normal_distribution<double> n01;
            const double s = std::sqrt(1.0 - f.rho * f.rho);
            for (std::size_t i = 0; i < n; ++i) {
              const double z1 = n01(rng);
              const double z2 = f.rho * z1 + s * n01(rng);
              xs[i] = -normal::log_upper_tail(z1);
              ys[i] = -normal::log_upper_tail(z2);
            }
          },
          [&](const InvertedLogistic& f) {
            // Reflection of the logistic draw: X_E = -log U = (E / S)^alpha.
            for (std::size_t i = 0; i < n; ++i) {
              const double s = detail::positive_stable(f.alpha, rng);
              xs[i] = std::pow(standard_exponential(rng) / s, f.alpha);
              ys[i] = std::pow(standard_exponential(rng) / s, f.alpha);
            }
          },
          [&](const LogisticBEV& f) {
            for (std::size_t i = 0; i < n; ++i) {
              const double s = detail::positive_stable(f.alpha, rng);
              const double gx = std::pow(standard_exponential(rng) / s, f.alpha);
              const double gy = std::pow(standard_exponential(rng) / s, f.alpha);
              // U = exp(-g); X_E = -log(1 - U).
              xs[i] = -std::log(-std::expm1(-gx));
              ys[i] = -std::log(-std::expm1(-gy));
            }
          },
          [&](const ClaytonLowerTail& f) {
            std::gamma_distribution<double> frailty(f.alpha, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
              double g = frailty(rng);
              if (g < std::numeric_limits<double>::min()) g = std::numeric_limits<double>::min();
              xs[i] = f.alpha * std::log1p(standard_exponential(rng) / g);
              ys[i] = f.alpha * std::log1p(standard_exponential(rng) / g);
            }
          },
          [&](const Morgenstern& f) {
            // The copula is radially symmetric, so draw the survival uniforms directly
            // and invert dC(v|u)/du = v{1 + a(1 - v)}, a = alpha(1 - 2u).
            for (std::size_t i = 0; i < n; ++i) {
              const double u = uniform_open(rng);
              const double w = uniform_open(rng);
              const double a = f.alpha * (1.0 - 2.0 * u);
              const double v = 2.0 * w / ((1.0 + a) + std::sqrt((1.0 + a) * (1.0 + a) - 4.0 * a * w));
              xs[i] = -std::log(u);
              ys[i] = -std::log(v);
            }
          },
          [&](const TrivariateMaxPareto&) {
            auto& zs = cols[2];
            auto to_exp = [](double s) { return -std::log(s) - std::log(2.0 - s); };
            for (std::size_t i = 0; i < n; ++i) {
              // Reciprocals of the four standard Paretos T, U, V, W.
              const double t = uniform_open(rng);
              const double u = uniform_open(rng);
              const double v = uniform_open(rng);
              const double w = uniform_open(rng);
              xs[i] = to_exp(std::min(t, u));
              ys[i] = to_exp(std::min(u, v));
              zs[i] = to_exp(std::min(v, w));
            }
          }},
      model.family());
  return {std::move(cols), Provenance::simulated};
}

/// log P(X_E > x, Y_E > y [, Z_E > z]) evaluated without leaving log space where possible.
inline double log_survivor_exp(const CopulaModel& model, const SurvivorSet& s) {
  if (s.dim() != model.dim())
    throw DomainError("survivor_exp: corner dimension " + std::to_string(s.dim()) + " does not match model dimension " +
                      std::to_string(model.dim()));
  if (model.dim() == 3) {
    const double p = detail::survivor_trivariate(s[0], s[1], s[2]);
    if (!(p > 0.0)) throw NumericError("survivor_exp: trivariate survivor underflow");
    return std::log(p);
  }
  const double x = s[0];
  const double y = s[1];
  if (x == 0.0) return -y;
  if (y == 0.0) return -x;
  return std::visit(Overloaded{[&](const BivariateNormal& f) { return detail::log_survivor_bvn(f.rho, x, y); },
                               [&](const InvertedLogistic& f) {
                                 return -std::pow(std::pow(x, 1.0 / f.alpha) + std::pow(y, 1.0 / f.alpha), f.alpha);
                               },
                               [&](const Morgenstern& f) {
                                 return -x - y + std::log1p(f.alpha * std::expm1(-x) * std::expm1(-y));
                               },
                               [&](const LogisticBEV& f) { return detail::log_survivor_logistic_bev(f.alpha, x, y); },
                               [&](const ClaytonLowerTail& f) { return detail::log_survivor_clayton(f.alpha, x, y); },
                               [](const TrivariateMaxPareto&) -> double { throw DomainError("unreachable"); }},
                    model.family());
}

inline double survivor_exp(const CopulaModel& model, const SurvivorSet& s) { return std::exp(log_survivor_exp(model, s)); }

/// Closed-form joint tail decay exponent at the growth vector.
inline double true_kappa(const CopulaModel& model, std::span<const double> growth) {
  if (growth.size() != model.dim()) throw DomainError("true_kappa: growth dimension does not match model");
  bool any_positive = false;
  for (double g : growth) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("true_kappa: growth must be finite and >= 0");
    any_positive = any_positive || g > 0.0;
  }
  if (!any_positive) throw DomainError("true_kappa: growth vector must not be zero");
  if (model.dim() == 3) {
    const double b = growth[0], g = growth[1], d = growth[2];
    if (g >= b && g >= d) return g + std::min({b, g, d});
    return b + d;
  }
  const double b = growth[0];
  const double g = growth[1];
  return std::visit(Overloaded{[&](const BivariateNormal& f) {
                                 const double r = f.rho;
                                 const double quad = (b + g - 2.0 * r * std::sqrt(b * g)) / (1.0 - r * r);
                                 if (r > 0.0) {
                                   // Regime of the quadratic form: rho^2 < min(b/g, g/b).
                                   if (r * r * g < b && r * r * b < g) return quad;
                                   return std::max(b, g);
                                 }
                                 if (std::min(b, g) > 0.0) return quad;
                                 return b + g;
                               },
                               [&](const InvertedLogistic& f) {
                                 return std::pow(std::pow(b, 1.0 / f.alpha) + std::pow(g, 1.0 / f.alpha), f.alpha);
                               },
                               [&](const Morgenstern& f) {
                                 // At alpha = -1 the leading constant 1 + alpha vanishes.
                                 return f.alpha == -1.0 ? b + g + std::min(b, g) : b + g;
                               },
                               [&](const LogisticBEV&) { return std::max(b, g); },
                               [&](const ClaytonLowerTail&) { return std::max(b, g); },
                               [](const TrivariateMaxPareto&) -> double { throw DomainError("unreachable"); }},
                    model.family());
}

inline double true_kappa(const CopulaModel& model, std::initializer_list<double> growth) {
  return true_kappa(model, std::span<const double>(growth.begin(), growth.size()));
}

/// Angular dependence function of a bivariate model.
inline double true_lambda(const CopulaModel& model, double omega) {
  if (model.dim() != 2) throw DomainError("true_lambda: bivariate models only");
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("true_lambda: omega must lie in [0, 1]");
  return true_kappa(model, {omega, 1.0 - omega});
}

/// Analytic derivative of lambda where a closed form is available.
inline std::optional<double> analytic_lambda_derivative(const CopulaModel& model, double omega) {
  if (!(omega > 0.0 && omega < 1.0)) return std::nullopt;
  const double w = omega;
  if (model.is<InvertedLogistic>()) {
    const double a = model.as<InvertedLogistic>().alpha;
    const double p = 1.0 / a;
    return (std::pow(w, p - 1.0) - std::pow(1.0 - w, p - 1.0)) * std::pow(std::pow(w, p) + std::pow(1.0 - w, p), a - 1.0);
  }
  if (model.is<Morgenstern>()) {
    if (model.as<Morgenstern>().alpha == -1.0) return omega == 0.5 ? std::nullopt : std::optional<double>(w < 0.5 ? 1.0 : -1.0);
    return 0.0;
  }
  if (model.is<BivariateNormal>()) {
    const double r = model.as<BivariateNormal>().rho;
    const double b = w, g = 1.0 - w;
    if (r > 0.0 && !(r * r * g < b && r * r * b < g)) return b > g ? 1.0 : -1.0;
    // d/dw of (1 - 2 r sqrt(w(1-w))) / (1 - r^2).
    return -r * (1.0 - 2.0 * w) / std::sqrt(w * (1.0 - w)) / (1.0 - r * r);
  }
  return std::nullopt;
}

/// Heffernan-Tawn normalization a(t), b(t) at t = log n and the limit survivor exp{-k(x)}.
struct HtNormalization {
  std::function<double(double)> a;
  std::function<double(double)> b;
  std::function<double(double)> limit_survivor;
};

inline HtNormalization true_ht_normalization(const CopulaModel& model) {
  return std::visit(
      Overloaded{
          [](const BivariateNormal& f) -> HtNormalization {
            if (!(f.rho > 0.0)) throw DomainError("true_ht_normalization: bvn tabulated for rho > 0 only");
            const double r = f.rho;
            return {[r](double t) { return std::sqrt(2.0 * r * r * t); }, [r](double t) { return r * r * t; },
                    [r](double x) { return normal::upper_tail(x / std::sqrt(1.0 - r * r)); }};
          },
          [](const InvertedLogistic& f) -> HtNormalization {
            const double a = f.alpha;
            return {[a](double t) { return std::pow(t, 1.0 - a); }, [](double) { return 0.0; },
                    [a](double x) { return x <= 0.0 ? 1.0 : std::exp(-a * std::pow(x, 1.0 / a)); }};
          },
          [](const Morgenstern& f) -> HtNormalization {
            const double a = f.alpha;
            return {[](double) { return 1.0; }, [](double) { return 0.0; },
                    [a](double x) { return x <= 0.0 ? 1.0 : std::exp(-x) * (1.0 + a * (1.0 - std::exp(-x))); }};
          },
          [](const LogisticBEV& f) -> HtNormalization {
            const double a = f.alpha;
            return {[](double) { return 1.0; }, [](double t) { return t; },
                    [a](double x) {
                      // e^{-x}[1 + e^x - V(1, e^{-x})], V(1, e^{-x}) = (1 + e^{x/a})^a.
                      return std::exp(-x) * (1.0 + std::exp(x) - std::pow(1.0 + std::exp(x / a), a));
                    }};
          },
          [](const ClaytonLowerTail& f) -> HtNormalization {
            const double a = f.alpha;
            return {[](double) { return 1.0; }, [](double t) { return t; },
                    [a](double x) { return std::pow(std::exp(x / a) + 1.0, -a); }};
          },
          [](const TrivariateMaxPareto&) -> HtNormalization {
            throw DomainError("true_ht_normalization: not defined for the trivariate model");
          }},
      model.family());
}

/// Leading term L1(n; beta, gamma) of the bivariate normal slowly varying function.
/// For bias diagnostics only.
inline double bvn_slowly_varying_leading(double rho, double n, double beta, double gamma) {
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("bvn L1: rho must lie in (-1, 1)");
  if (!(n > 1.0)) throw DomainError("bvn L1: n must exceed 1");
  const bool quadratic = (rho > 0.0) ? (rho * rho * gamma < beta && rho * rho * beta < gamma) : std::min(beta, gamma) > 0.0;
  if (quadratic) {
    const double r = rho;
    const double q = 1.0 - r * r;
    const double sb = std::sqrt(beta), sg = std::sqrt(gamma);
    const double expo = (2.0 * r * r - r * (sb / sg + sg / sb)) / (2.0 * q);
    const double num = std::pow(beta, (1.0 - r * sg / sb) / (2.0 * q)) * std::pow(gamma, (1.0 - r * sb / sg) / (2.0 * q)) *
                       std::pow(q, 1.5);
    return std::pow(4.0 * std::numbers::pi * std::log(n), expo) * num / ((sb - r * sg) * (sg - r * sb));
  }
  if (rho > 0.0 && (rho * rho * gamma == beta || rho * rho * beta == gamma)) return 0.5;
  return 1.0;
}

}  // namespace tailray
