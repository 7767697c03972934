#pragma once

// CSV samples and JSON documents for the command-line tool.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tailray/bench.hpp"
#include "tailray/copulas.hpp"
#include "tailray/errors.hpp"
#include "tailray/estimators.hpp"
#include "tailray/kappa.hpp"
#include "tailray/margins.hpp"

namespace tailray {

using Json = nlohmann::ordered_json;

/// Malformed configuration; pointer is the JSON pointer of the offending field.
class ConfigError : public DomainError {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : DomainError("config " + (pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, std::size_t row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw DomainError("csv: not a number at row " + std::to_string(row) + ", column " + std::to_string(col) + ": '" +
                      s + "'");
  return v;
}

}  // namespace detail

inline RawSample read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: empty input");
  const auto names = detail::split_csv_line(line);
  if (names.size() < 2 || names.size() > 3)
    throw DomainError("csv: expected 2 or 3 columns, header has " + std::to_string(names.size()));
  std::vector<std::vector<double>> cols(names.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != names.size())
      throw DomainError("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(names.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) cols[j].push_back(detail::parse_number(cells[j], row, j));
    ++row;
  }
  return RawSample(names, std::move(cols));
}

inline RawSample read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_csv(in);
}

/// Reads a CSV already on exponential margins (as written by `simulate`).
inline ExponentialSample read_exponential_csv(const std::string& path) {
  const auto raw = read_csv(path);
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < raw.dim(); ++j) cols.emplace_back(raw.column(j).begin(), raw.column(j).end());
  return {std::move(cols), Provenance::exact_transform};
}

inline void write_csv(std::ostream& out, const ExponentialSample& s) {
  static const char* names[] = {"x", "y", "z"};
  for (std::size_t j = 0; j < s.dim(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.column(j)[i]);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

// NaN has no JSON spelling; it becomes null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const CopulaModel& model) {
  Json j;
  j["name"] = model.name();
  for (const auto& [k, v] : model.params()) j[k] = v;
  return j;
}

inline Json to_json(const AngularFit& f) {
  return Json{{"omega", f.omega}, {"lambda_hat", f.lambda_hat}, {"k", f.k}, {"u", f.u}, {"se", f.se}};
}

inline Json to_json(const ProbEstimate& e) {
  return Json{{"method", to_string(e.method)}, {"value", e.value},      {"is_zero", e.is_zero},
              {"omega", e.omega},               {"threshold", e.threshold}, {"shift", e.shift},
              {"rate", e.rate},                 {"count", e.count},     {"draws", e.draws}};
}

inline Json to_json(const HTFit& f) {
  return Json{{"alpha", f.alpha}, {"beta", f.beta},       {"mu", f.mu},
              {"sigma", f.sigma}, {"u_y", f.u_y},         {"n_exceedances", f.residuals.size()},
              {"loglik", f.loglik}, {"grad_norm", f.grad_norm}};
}

inline Json to_json(const PropertyReport& r) {
  Json props = Json::array();
  for (const auto& p : r.properties)
    props.push_back({{"name", p.name}, {"checked", p.checked}, {"pass", p.pass}, {"worst_violation", p.worst_violation}});
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  return Json{{"family", r.family}, {"params", params}, {"properties", props}, {"grid_seed", r.grid_seed},
              {"grid_size", r.grid_size}, {"all_pass", r.all_pass()}};
}

inline Json to_json(const LambdaSummary& l) {
  return Json{{"omega", l.omega},   {"true_lambda", l.true_lambda},           {"mean", number_or_null(l.mean)},
              {"lower", number_or_null(l.lower)}, {"upper", number_or_null(l.upper)},
              {"pooled_se", number_or_null(l.pooled_se)}, {"n", l.n}};
}

inline Json to_json(const BenchmarkConfig& c) {
  Json methods = Json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  return Json{{"model", to_json(c.model)},
              {"reps", c.reps},
              {"m", c.m},
              {"frac", c.frac},
              {"omegas", c.omegas},
              {"y_corner", c.corner()},
              {"seed_base", c.seed_base},
              {"methods", methods},
              {"rank_transform", c.rank_transform},
              {"ht_draws", c.ht_draws},
              {"ht_quantile", c.ht_quantile}};
}

inline Json to_json(const BenchmarkReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"method", to_string(c.method)},
                     {"omega", c.omega},
                     {"rmse_nonzero_log", number_or_null(c.rmse_nonzero_log)},
                     {"prop_exceed", c.prop_exceed},
                     {"prop_zero", c.prop_zero},
                     {"true_prob", c.true_prob},
                     {"n_reps_used", c.n_reps_used},
                     {"n_nonzero", c.n_nonzero},
                     {"n_failed", c.n_failed}});
  Json lam = Json::array();
  for (const auto& l : r.wt_lambda) lam.push_back(to_json(l));
  Json failures = Json::object();
  for (const auto& [msg, n] : r.failures) failures[msg] = n;
  return Json{{"cells", cells},
              {"wt_lambda", lam},
              {"ht", {{"alpha_mean", number_or_null(r.ht_alpha_mean)},
                      {"beta_mean", number_or_null(r.ht_beta_mean)},
                      {"fits", r.ht_fits}}},
              {"failures", failures}};
}

/// Tidy long-format rows: method, omega, metric, value.
inline void write_tidy_csv(std::ostream& out, const BenchmarkReport& r) {
  out << "method,omega,metric,value\n";
  char buf[64];
  auto row = [&](const char* method, double omega, const char* metric, double value) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << method << ',' << omega << ',' << metric << ',' << (std::isfinite(value) ? buf : "NA") << '\n';
  };
  for (const auto& c : r.cells) {
    const char* m = to_string(c.method);
    row(m, c.omega, "rmse_nonzero_log", c.rmse_nonzero_log);
    row(m, c.omega, "prop_exceed", c.prop_exceed);
    row(m, c.omega, "prop_zero", c.prop_zero);
    row(m, c.omega, "true_prob", c.true_prob);
    row(m, c.omega, "n_reps_used", static_cast<double>(c.n_reps_used));
  }
  for (const auto& l : r.wt_lambda) {
    row("WT", l.omega, "lambda_mean", l.mean);
    row("WT", l.omega, "lambda_lower", l.lower);
    row("WT", l.omega, "lambda_upper", l.upper);
    row("WT", l.omega, "lambda_true", l.true_lambda);
  }
}

inline Method parse_method(const std::string& s) {
  if (s == "wt" || s == "WT") return Method::wt;
  if (s == "lt" || s == "LT") return Method::lt;
  if (s == "ht" || s == "HT") return Method::ht;
  throw DomainError("unknown method '" + s + "' (expected wt, lt or ht)");
}

namespace detail {

inline double config_number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) throw ConfigError(pointer, "expected a number");
  return j.get<double>();
}

inline std::uint64_t config_count(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    throw ConfigError(pointer, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

}  // namespace detail

/// Builds a benchmark configuration from JSON; unspecified fields keep their defaults.
inline BenchmarkConfig parse_benchmark_config(const Json& j, BenchmarkConfig c = {}) {
  if (!j.is_object()) throw ConfigError("", "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string ptr = "/" + key;
    if (key == "model") {
      if (!value.is_object()) throw ConfigError(ptr, "expected an object");
      if (!value.contains("name") || !value["name"].is_string()) throw ConfigError(ptr + "/name", "expected a model name");
      std::map<std::string, double> params;
      for (const auto& [pk, pv] : value.items())
        if (pk != "name") params[pk] = detail::config_number(pv, ptr + "/" + pk);
      try {
        c.model = make_model(value["name"].get<std::string>(), params);
      } catch (const DomainError& e) {
        throw ConfigError(ptr, e.what());
      }
    } else if (key == "reps") {
      c.reps = detail::config_count(value, ptr);
    } else if (key == "m") {
      c.m = detail::config_count(value, ptr);
    } else if (key == "frac") {
      c.frac = detail::config_number(value, ptr);
      if (!(c.frac > 0.0 && c.frac < 1.0)) throw ConfigError(ptr, "must lie in (0, 1)");
    } else if (key == "omegas") {
      if (!value.is_array() || value.empty()) throw ConfigError(ptr, "expected a non-empty array");
      c.omegas.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double w = detail::config_number(value[i], ptr + "/" + std::to_string(i));
        if (!(w > 0.0 && w < 1.0)) throw ConfigError(ptr + "/" + std::to_string(i), "omega must lie in (0, 1)");
        c.omegas.push_back(w);
      }
    } else if (key == "y_corner") {
      c.y_corner = detail::config_number(value, ptr);
    } else if (key == "seed_base") {
      c.seed_base = detail::config_count(value, ptr);
    } else if (key == "methods") {
      if (!value.is_array() || value.empty()) throw ConfigError(ptr, "expected a non-empty array");
      c.methods.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        const auto p = ptr + "/" + std::to_string(i);
        if (!value[i].is_string()) throw ConfigError(p, "expected a method name");
        try {
          c.methods.push_back(parse_method(value[i].get<std::string>()));
        } catch (const DomainError& e) {
          throw ConfigError(p, e.what());
        }
      }
    } else if (key == "rank_transform") {
      if (!value.is_boolean()) throw ConfigError(ptr, "expected a boolean");
      c.rank_transform = value.get<bool>();
    } else if (key == "ht_draws") {
      c.ht_draws = detail::config_count(value, ptr);
    } else if (key == "ht_quantile") {
      c.ht_quantile = detail::config_number(value, ptr);
      if (!(c.ht_quantile > 0.0 && c.ht_quantile < 1.0)) throw ConfigError(ptr, "must lie in (0, 1)");
    } else if (key == "threads") {
      c.threads = detail::config_count(value, ptr);
    } else {
      throw ConfigError(ptr, "unknown field");
    }
  }
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

inline BenchmarkConfig read_benchmark_config(const std::string& path, BenchmarkConfig defaults = {}) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return parse_benchmark_config(j, std::move(defaults));
}

}  // namespace tailray
