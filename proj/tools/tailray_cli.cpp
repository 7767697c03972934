// tailray: simulate, kappa, estimate, benchmark, recover and diagnose.
// Exit codes: 0 success, 2 usage or domain error, 3 numeric failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tailray/io.hpp"
#include "tailray/tailray.hpp"

namespace {

using tailray::Json;

struct ModelFlags {
  std::string name;
  std::optional<double> rho;
  std::optional<double> alpha;

  void attach(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--model", name, "bvn | invlog | morgenstern | logistic | clayton | trivariate");
    if (required) opt->required();
    app->add_option("--rho", rho, "bvn correlation");
    app->add_option("--alpha", alpha, "dependence parameter of the other families");
  }

  tailray::CopulaModel build() const {
    std::map<std::string, double> params;
    if (rho) params["rho"] = *rho;
    if (alpha) params["alpha"] = *alpha;
    return tailray::make_model(name, params);
  }
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw tailray::DomainError("not a number list: '" + s + "'");
    out.push_back(v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

// lo:hi:step, inclusive of hi up to rounding.
std::vector<double> parse_range(const std::string& s) {
  std::vector<double> parts;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto end = s.find(':', start);
    if ((i < 2) == (end == std::string::npos)) throw tailray::DomainError("range must be lo:hi:step, got '" + s + "'");
    parts.push_back(parse_list(s.substr(start, end == std::string::npos ? std::string::npos : end - start)).at(0));
    start = end + 1;
  }
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || !(hi >= lo)) throw tailray::DomainError("range needs lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

void emit(const Json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw tailray::DomainError("cannot write '" + out_path + "'");
  f << doc.dump(2) << '\n';
}

tailray::ExponentialSample load_sample(const std::string& path, bool rank) {
  if (rank) return tailray::rank_transform(tailray::read_csv(path));
  return tailray::read_exponential_csv(path);
}

std::string csv_path_for(const std::string& json_path) {
  const auto dot = json_path.find_last_of('.');
  const auto slash = json_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return json_path + ".csv";
  return json_path.substr(0, dot) + ".csv";
}

void print_failures(const std::map<std::string, std::size_t>& failures) {
  std::size_t total = 0;
  for (const auto& [msg, n] : failures) total += n;
  if (total == 0) return;
  std::cerr << "per-replication failures: " << total << '\n';
  for (const auto& [msg, n] : failures) std::cerr << "  " << n << " x " << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint tail probabilities by ray extrapolation in exponential margins"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a sample on exponential margins as CSV");
  ModelFlags sim_model;
  sim_model.attach(sim);
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "CSV path (standard output if omitted)");

  // kappa
  auto* kap = app.add_subcommand("kappa", "evaluate kappa or run its property suite");
  ModelFlags kap_model;
  kap_model.attach(kap);
  std::string kap_growth;
  std::size_t kap_grid = 200;
  std::uint64_t kap_seed = 0;
  std::string kap_out;
  kap->add_option("--growth", kap_growth, "comma-separated growth rates; omit for the property report");
  kap->add_option("--grid-size", kap_grid, "random grid size for the property suite");
  kap->add_option("--seed", kap_seed, "grid seed");
  kap->add_option("--out", kap_out, "JSON path");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate lambda or a joint survivor probability");
  est->require_subcommand(1);
  std::string est_input, est_out;
  bool est_rank = false;
  double est_frac = 0.10;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", est_input, "CSV sample on exponential margins")->required();
    sub->add_flag("--rank", est_rank, "rank-transform the input margins first");
    sub->add_option("--frac", est_frac, "fraction of the sample above the threshold");
    sub->add_option("--out", est_out, "JSON path");
  };
  auto* est_lam = est->add_subcommand("lambda", "Hill estimate of lambda on one ray");
  add_common(est_lam);
  double est_omega = 0.5;
  est_lam->add_option("--omega", est_omega, "ray")->required();
  auto* est_prob = est->add_subcommand("prob", "P(X > x, Y > y)");
  add_common(est_prob);
  std::string est_method = "wt";
  double est_x = 0.0, est_y = 0.0;
  std::size_t est_draws = 10000;
  std::uint64_t est_seed = 0;
  double est_htq = 0.90;
  est_prob->add_option("--method", est_method, "wt | lt | ht")->check(CLI::IsMember({"wt", "lt", "ht"}));
  est_prob->add_option("--x", est_x, "x corner on exponential margins")->required();
  est_prob->add_option("--y", est_y, "y corner on exponential margins")->required();
  est_prob->add_option("--draws", est_draws, "Monte Carlo draws for ht");
  est_prob->add_option("--seed", est_seed, "seed for ht");
  est_prob->add_option("--ht-quantile", est_htq, "conditioning quantile for ht");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "replicated WT / LT / HT comparison");
  std::string bench_config, bench_out, bench_csv;
  bool bench_quick = false;
  std::optional<std::uint64_t> bench_seed;
  std::optional<std::size_t> bench_threads;
  bench->add_option("--config", bench_config, "JSON configuration");
  bench->add_option("--out", bench_out, "JSON report path; the tidy CSV goes next to it");
  bench->add_option("--csv", bench_csv, "tidy CSV path");
  bench->add_flag("--quick", bench_quick, "reps=100, m=2000 unless the config says otherwise");
  bench->add_option("--seed-base", bench_seed, "overrides the config seed_base");
  bench->add_option("--threads", bench_threads, "worker threads");

  // recover
  auto* rec = app.add_subcommand("recover", "lambda recovery over a grid of rays");
  ModelFlags rec_model;
  rec_model.attach(rec);
  std::size_t rec_reps = 500, rec_m = 5000;
  double rec_frac = 0.10;
  std::uint64_t rec_seed = 0;
  std::string rec_grid = "0.01:0.99:0.01", rec_out;
  bool rec_rank = false;
  std::optional<std::size_t> rec_threads;
  rec->add_option("--reps", rec_reps)->check(CLI::PositiveNumber);
  rec->add_option("--m", rec_m)->check(CLI::PositiveNumber);
  rec->add_option("--frac", rec_frac);
  rec->add_option("--seed-base", rec_seed);
  rec->add_option("--grid", rec_grid, "lo:hi:step");
  rec->add_flag("--rank", rec_rank, "rank-transform each replicate");
  rec->add_option("--threads", rec_threads);
  rec->add_option("--out", rec_out, "JSON path");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "log-count linearity and excess QQ pairs");
  std::string diag_input, diag_grid = "0.2:0.8:0.1", diag_out;
  double diag_omega = 0.5, diag_frac = 0.10;
  bool diag_qq = false, diag_rank = false;
  diag->add_option("--input", diag_input, "CSV sample on exponential margins")->required();
  diag->add_option("--omega", diag_omega, "ray")->required();
  diag->add_option("--c-grid", diag_grid, "lo:hi:step");
  diag->add_flag("--qq", diag_qq, "include QQ pairs of the structure-variable excesses");
  diag->add_option("--frac", diag_frac, "fraction used for the QQ fit");
  diag->add_flag("--rank", diag_rank, "rank-transform the input margins first");
  diag->add_option("--out", diag_out, "JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      const auto model = sim_model.build();
      const auto data = tailray::sample(model, sim_n, sim_seed);
      const Json echo{{"command", "simulate"}, {"model", tailray::to_json(model)}, {"n", sim_n},
                      {"seed", sim_seed},      {"out", sim_out}};
      if (sim_out.empty()) {
        tailray::write_csv(std::cout, data);
        std::cerr << echo.dump() << '\n';
      } else {
        std::ofstream f(sim_out);
        if (!f) throw tailray::DomainError("cannot write '" + sim_out + "'");
        tailray::write_csv(f, data);
        std::cout << echo.dump(2) << '\n';
      }
    } else if (kap->parsed()) {
      const auto model = kap_model.build();
      const auto kappa = tailray::kappa_function(model);
      Json doc;
      if (!kap_growth.empty()) {
        const auto g = parse_list(kap_growth);
        doc["kappa"] = tailray::true_kappa(model, g);
        doc["model"] = tailray::to_json(model);
        doc["growth"] = g;
      } else {
        doc = tailray::to_json(tailray::property_suite(kappa, tailray::is_pqd(model), kap_grid, kap_seed));
        doc["model"] = tailray::to_json(model);
        const auto conv = tailray::convexity_check(kappa, kap_grid, tailray::mix_seed(kap_seed));
        Json examples = Json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(conv.violations.size(), 5); ++i)
          examples.push_back({{"a", conv.violations[i].a}, {"b", conv.violations[i].b},
                              {"excess", conv.violations[i].magnitude}});
        doc["subadditivity_counterexamples"] = examples;
      }
      emit(doc, kap_out);
    } else if (est_lam->parsed()) {
      const auto data = load_sample(est_input, est_rank);
      const auto fit = tailray::fit_lambda(data, est_omega, tailray::ThresholdRule::fraction(est_frac));
      Json doc = tailray::to_json(fit);
      doc["config"] = {{"input", est_input}, {"omega", est_omega}, {"frac", est_frac}, {"rank", est_rank}};
      emit(doc, est_out);
    } else if (est_prob->parsed()) {
      const auto data = load_sample(est_input, est_rank);
      const tailray::SurvivorSet target(est_x, est_y);
      const auto method = tailray::parse_method(est_method);
      tailray::ProbEstimate e;
      Json extra = Json::object();
      if (method == tailray::Method::wt) {
        e = tailray::wt_estimate(data, target, est_frac);
      } else if (method == tailray::Method::lt) {
        e = tailray::lt_probability(data, target, est_frac);
      } else {
        tailray::HtFitOptions opt;
        opt.quantile = est_htq;
        const auto fit = tailray::fit_ht(data, opt);
        const double level = est_x + est_y;
        e = tailray::ht_probability(fit, est_x / level, level, est_draws, est_seed);
        extra = tailray::to_json(fit);
      }
      Json doc = tailray::to_json(e);
      if (!extra.empty()) doc["ht_fit"] = extra;
      doc["config"] = {{"input", est_input}, {"method", est_method}, {"x", est_x},       {"y", est_y},
                       {"frac", est_frac},   {"rank", est_rank},     {"draws", est_draws}, {"seed", est_seed},
                       {"ht_quantile", est_htq}};
      emit(doc, est_out);
    } else if (bench->parsed()) {
      tailray::BenchmarkConfig defaults;
      if (bench_quick) defaults = tailray::BenchmarkConfig::quick(defaults.model);
      auto cfg = bench_config.empty() ? defaults : tailray::read_benchmark_config(bench_config, defaults);
      if (bench_seed) cfg.seed_base = *bench_seed;
      if (bench_threads) cfg.threads = *bench_threads;
      const auto report = tailray::run_benchmark(cfg);
      print_failures(report.failures);
      Json doc{{"config", tailray::to_json(cfg)}, {"report", tailray::to_json(report)}};
      emit(doc, bench_out);
      std::string csv = bench_csv;
      if (csv.empty() && !bench_out.empty()) csv = csv_path_for(bench_out);
      if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw tailray::DomainError("cannot write '" + csv + "'");
        tailray::write_tidy_csv(f, report);
      }
    } else if (rec->parsed()) {
      tailray::BenchmarkConfig cfg;
      cfg.model = rec_model.build();
      cfg.reps = rec_reps;
      cfg.m = rec_m;
      cfg.frac = rec_frac;
      cfg.seed_base = rec_seed;
      cfg.rank_transform = rec_rank;
      if (rec_threads) cfg.threads = *rec_threads;
      if (!(rec_frac > 0.0 && rec_frac < 1.0)) throw tailray::DomainError("--frac must lie in (0, 1)");
      const auto grid = parse_range(rec_grid);
      std::map<std::string, std::size_t> failures;
      const auto rows = tailray::lambda_recovery(cfg, grid, &failures);
      print_failures(failures);
      Json out = Json::array();
      for (const auto& r : rows) out.push_back(tailray::to_json(r));
      Json doc{{"config",
                {{"model", tailray::to_json(cfg.model)}, {"reps", rec_reps}, {"m", rec_m}, {"frac", rec_frac},
                 {"seed_base", rec_seed}, {"grid", rec_grid}, {"rank_transform", rec_rank}}},
               {"lambda", out}};
      emit(doc, rec_out);
    } else if (diag->parsed()) {
      const auto data = load_sample(diag_input, diag_rank);
      const auto grid = parse_range(diag_grid);
      const auto d = tailray::diagnose_linearity(data, diag_omega, grid);
      Json pts = Json::array();
      for (auto [c, l] : d.points) pts.push_back({{"c", c}, {"log_count", l}});
      Json doc{{"config", {{"input", diag_input}, {"omega", diag_omega}, {"c_grid", diag_grid}, {"rank", diag_rank}}},
               {"points", pts},
               {"slope", d.slope},
               {"intercept", d.intercept},
               {"r_squared", d.r_squared}};
      if (diag_qq) {
        const auto fit = tailray::fit_lambda(data, diag_omega, tailray::ThresholdRule::fraction(diag_frac));
        Json qq = Json::array();
        for (auto [t, e] : tailray::qq_excesses(fit, data)) qq.push_back({t, e});
        doc["fit"] = tailray::to_json(fit);
        doc["qq"] = qq;
        doc["config"]["frac"] = diag_frac;
      }
      emit(doc, diag_out);
    }
  } catch (const tailray::ConfigError& e) {
    std::cerr << Json{{"error", e.what()}, {"pointer", e.pointer()}}.dump() << '\n';
    return 2;
  } catch (const tailray::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const tailray::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
