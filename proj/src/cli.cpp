#include "vph/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "vph/diagnostics.hpp"
#include "vph/error.hpp"
#include "vph/estimate.hpp"
#include "vph/experiments.hpp"
#include "vph/io.hpp"
#include "vph/random.hpp"
#include "vph/simulate.hpp"
#include "vph/stabilize.hpp"

namespace vph {

namespace {

struct GlobalOptions {
  std::uint64_t seed = 1;
  double ridge = 0.0;
  std::optional<double> bandwidth;
  double delta = 7.0;
  std::optional<double> b_rate;
  double silverman_exponent = -0.2;
  double pivot_tolerance = 1e-12;
  std::string negative_target = "skip";
  std::size_t threads = 0;
};

std::optional<double> time_option(const std::string& text, const char* name) {
  if (text.empty()) return std::nullopt;
  const auto v = parse_time_days(text);
  if (!v) throw CLI::ValidationError(name, "expected days or an ISO-8601 date");
  return v;
}

struct CatalogOptions {
  std::string input;
  std::optional<double> min_magnitude, max_depth, min_lat, max_lat, min_lon, max_lon;
  std::string start, end;
  std::optional<double> window_end;
  bool counts = false;
  bool cumulative = false;

  void add(CLI::App* app) {
    app->add_option("-i,--input", input, "Catalog (or count) file")->required();
    app->add_option("--min-magnitude", min_magnitude);
    app->add_option("--max-depth", max_depth);
    app->add_option("--min-lat", min_lat);
    app->add_option("--max-lat", max_lat);
    app->add_option("--min-lon", min_lon);
    app->add_option("--max-lon", max_lon);
    app->add_option("--start", start, "Window start (days or ISO-8601 in the file's scale)");
    app->add_option("--end", end, "Window end");
    app->add_option("--window-end", window_end, "Window end after the origin shift");
    app->add_flag("--counts", counts, "Input holds start,end,count periods to disaggregate");
    app->add_flag("--cumulative", cumulative, "Counts are cumulative");
  }

  EventCatalog load(std::uint64_t seed) const {
    if (counts) {
      CumulativeCountSpec spec;
      spec.mode = cumulative ? CountMode::cumulative : CountMode::incremental;
      return disaggregate_counts(std::filesystem::path(input), spec, seed);
    }
    CatalogFileSpec spec;
    spec.filter = {min_magnitude, max_depth, min_lat, max_lat, min_lon, max_lon,
                   time_option(start, "--start"), time_option(end, "--end")};
    spec.window_end = window_end;
    spec.jitter_seed = seed;
    return read_catalog(std::filesystem::path(input), spec);
  }
};

// Writes to the named file, or to `fallback` for "" and "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
      out_ = file_.get();
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

NegativeTargetPolicy parse_policy(const std::string& s) {
  if (s == "skip") return NegativeTargetPolicy::skip;
  if (s == "zero") return NegativeTargetPolicy::zero;
  if (s == "apply") return NegativeTargetPolicy::apply;
  throw CLI::ValidationError("--negative-target", "expected skip, zero or apply");
}

SolveOptions solve_options(const GlobalOptions& g) {
  SolveOptions o;
  o.ridge = g.ridge;
  o.pivot_tolerance = g.pivot_tolerance;
  return o;
}

SmootherConfig smoother(const GlobalOptions& g) {
  SmootherConfig s;
  s.bandwidth = g.bandwidth;
  s.silverman_exponent = g.silverman_exponent;
  return s;
}

struct Model {
  double mu;
  double K;
  double beta;
};

struct ModelOptions {
  std::optional<double> mu, K, beta;
  bool fit = false;

  void add(CLI::App* app, bool with_K) {
    app->add_option("--mu", mu, "Background rate per day");
    if (with_K) app->add_option("--K", K, "Constant productivity");
    app->add_option("--beta", beta, "Exponential kernel rate per day");
    app->add_flag("--fit", fit, "Fit a constant-productivity Hawkes model for unset parameters");
  }

  Model resolve(const EventCatalog& cat, std::ostream& err) const {
    if (mu && beta && (K || !fit)) return {*mu, K.value_or(0.0), *beta};
    if (!fit) throw CLI::ValidationError("model", "give --mu and --beta (and --K), or --fit");
    const double T = cat.window_end() > 0.0 ? cat.window_end() : 1.0;
    const HawkesParams init{static_cast<double>(cat.size()) / (2.0 * T), 0.5,
                            TriggeringKernel::exponential(1.0)};
    const FitResult f = fit_constant_hawkes(cat, init);
    if (!f.converged) err << "warning: constant-productivity fit did not converge\n";
    return {mu.value_or(f.mu_hat), K.value_or(f.K_hat), beta.value_or(f.beta_hat)};
  }
};

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks, bool& all_ok) {
  for (const CheckResult& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all_ok = all_ok && c.passed;
  }
}

void print_summary(std::ostream& out, const ScenarioSummary& s) {
  out << std::setprecision(4);
  out << scenario_name(s.scenario) << " (" << s.replicates << " replicates, mean n = "
      << s.mean_events << ")\n";
  for (const EstimatorSummary* e : {&s.unscaled_empirical, &s.mle, &s.scaled_empirical}) {
    out << "  " << std::left << std::setw(20) << e->name << std::right << e->mean << " +- "
        << e->sd;
    if (e->failures > 0) out << "  (" << e->failures << " failed)";
    out << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-productivity Hawkes estimation toolkit", "vphawkes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value run configuration file");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every randomized step");
  app.add_option("--ridge", g.ridge, "Added to the diagonal of G before solving");
  app.add_option("--bandwidth", g.bandwidth, "Smoothing bandwidth (default: rule of thumb)");
  app.add_option("--delta", g.delta, "Window of the empirical estimator, days");
  app.add_option("--b-rate", g.b_rate, "Super-thinning rate (default: n / T)");
  app.add_option("--silverman-exponent", g.silverman_exponent, "Exponent of n in the bandwidth rule");
  app.add_option("--pivot-tolerance", g.pivot_tolerance, "Smallest accepted diagonal of G");
  app.add_option("--negative-target", g.negative_target,
                 "Rescaling when n < mu T: skip, zero or apply");
  app.add_option("--threads", g.threads, "Worker threads for benches (0 = all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a catalog");
  std::string sim_scenario = "normals", sim_out, sim_truth;
  double sim_T = 1000.0, sim_mu = 0.5, sim_beta = 0.7, sim_growth = kDefaultExponentialGrowth;
  double sim_K = 0.5;
  sim->add_option("--scenario", sim_scenario,
                  "normals, exponential, constant, cauchy, renewal, etas, hawkes or poisson");
  sim->add_option("--T", sim_T, "Window length, days");
  sim->add_option("--mu", sim_mu);
  sim->add_option("--beta", sim_beta);
  sim->add_option("--K", sim_K, "Productivity of the constant 'hawkes' scenario");
  sim->add_option("--growth", sim_growth, "Rate of the exponential scenario");
  sim->add_option("-o,--output", sim_out, "Catalog file (default stdout)");
  sim->add_option("--truth", sim_truth, "Also write time,true_K to this file");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a constant-productivity exponential Hawkes model");
  CatalogOptions fit_cat;
  fit_cat.add(fit);
  std::string fit_out;
  double init_mu = 0.0, init_K = 0.5, init_beta = 1.0;
  fit->add_option("--init-mu", init_mu, "Starting mu (default n / 2T)");
  fit->add_option("--init-K", init_K);
  fit->add_option("--init-beta", init_beta);
  fit->add_option("-o,--output", fit_out, "JSON file (default stdout)");

  // productivity
  auto* prod = app.add_subcommand("productivity", "Per-event productivity estimates");
  CatalogOptions prod_cat;
  prod_cat.add(prod);
  ModelOptions prod_model;
  prod_model.add(prod, false);
  std::string estimator = "mle", domain = "time", prod_out;
  double grid_step = 0.01;
  prod->add_option("--estimator", estimator, "mle or empirical")
      ->check(CLI::IsMember({"mle", "empirical"}));
  prod->add_option("--domain", domain, "time or mark")->check(CLI::IsMember({"time", "mark"}));
  prod->add_option("--grid-step", grid_step, "Mark grid step");
  prod->add_option("-o,--output", prod_out, "CSV file (default stdout)");

  // residuals
  auto* res = app.add_subcommand("residuals", "Super-thinned residual diagnostics");
  CatalogOptions res_cat;
  res_cat.add(res);
  ModelOptions res_model;
  res_model.add(res, true);
  std::size_t nsim = 1000;
  double level = 0.95;
  std::string band_method = "simultaneous", res_out;
  res->add_option("--nsim", nsim, "Simulated paths for the band");
  res->add_option("--level", level, "Band level");
  res->add_option("--band", band_method, "pointwise, bonferroni or simultaneous")
      ->check(CLI::IsMember({"pointwise", "bonferroni", "simultaneous"}));
  res->add_option("-o,--output", res_out, "CSV file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run simulation studies");
  std::string bench_scenario = "all", bench_out;
  std::size_t replicates = 100;
  bool check = false;
  bench->add_option("--scenario", bench_scenario,
                    "normals, exponential, constant, cauchy, renewal, table, ladder, noise, etas "
                    "or all");
  bench->add_option("--replicates", replicates);
  bench->add_flag("--check", check, "Exit 3 if a published tolerance fails");
  bench->add_option("-o,--output", bench_out, "CSV summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*sim) {
      const TriggeringKernel kernel = TriggeringKernel::exponential(sim_beta);
      SimulatedProcess p;
      if (sim_scenario == "etas") {
        p = simulate_etas(sim_mu, kernel, 0.2, 1.2, MagnitudeDistribution{2.3, 3.5}, sim_T, g.seed);
      } else if (sim_scenario == "poisson") {
        p.catalog = simulate_poisson(sim_mu, sim_T, g.seed);
        p.true_K.assign(p.catalog.size(), 0.0);
      } else if (sim_scenario == "hawkes") {
        p = simulate_variable_hawkes(sim_mu, kernel, ConstantProductivity{sim_K}, sim_T, g.seed);
      } else {
        const Scenario s = parse_scenario(sim_scenario);
        p = simulate_variable_hawkes(sim_mu, kernel, scenario_productivity(s, sim_growth), sim_T,
                                     g.seed);
      }
      Sink sink(sim_out, out);
      write_catalog(*sink, p.catalog);
      if (!sim_truth.empty()) {
        Sink truth(sim_truth, out);
        *truth << "time,true_K\n" << std::setprecision(17);
        for (std::size_t i = 0; i < p.catalog.size(); ++i) {
          *truth << p.catalog.time(i) << ',' << p.true_K[i] << '\n';
        }
      }
      return kExitOk;
    }

    if (*fit) {
      const EventCatalog cat = fit_cat.load(g.seed);
      const double T = cat.window_end() > 0.0 ? cat.window_end() : 1.0;
      const double mu0 = init_mu > 0.0 ? init_mu : static_cast<double>(cat.size()) / (2.0 * T);
      const FitResult r =
          fit_constant_hawkes(cat, HawkesParams{mu0, init_K, TriggeringKernel::exponential(init_beta)});
      Sink sink(fit_out, out);
      *sink << fit_result_json(r) << '\n';
      return kExitOk;
    }

    if (*prod) {
      const EventCatalog cat = prod_cat.load(g.seed);
      const Model m = prod_model.resolve(cat, err);
      const TriggeringKernel kernel = TriggeringKernel::exponential(m.beta);
      ProductivityEstimate raw = estimator == "mle"
                                     ? mle_productivities(cat, m.mu, kernel, solve_options(g))
                                     : empirical_productivities(cat, g.delta, m.mu);
      RescaleOptions rescale;
      rescale.on_negative_target = parse_policy(g.negative_target);
      Sink sink(prod_out, out);
      if (domain == "mark") {
        if (!cat.has_marks()) throw std::invalid_argument("mark domain needs a magnitude column");
        SmootherConfig sc = smoother(g);
        sc.domain = SmoothingDomain::mark;
        const auto marks = cat.marks();
        const auto [lo, hi] = std::minmax_element(marks.begin(), marks.end());
        sc.grid = EvaluationGrid{*lo, *hi, grid_step};
        const MarkCurve curve = smooth_by_mark(truncate_nonneg(raw), marks, cat.size(), m.mu,
                                               cat.window_end(), sc, rescale);
        write_curve_csv(*sink, curve);
      } else {
        PipelineConfig pc;
        pc.smoother = smoother(g);
        pc.rescale = rescale;
        const ProductivityEstimate est = stabilize_pipeline(raw, cat, m.mu, pc);
        write_productivity_csv(*sink, cat, raw.values, est.values);
      }
      return kExitOk;
    }

    if (*res) {
      const EventCatalog cat = res_cat.load(g.seed);
      const Model m = res_model.resolve(cat, err);
      const IntensityModel lambda(cat, m.mu, TriggeringKernel::exponential(m.beta),
                                  std::vector<double>(cat.size(), m.K));
      const double T = cat.window_end();
      const double b = g.b_rate.value_or(T > 0.0 ? static_cast<double>(cat.size()) / T : 1.0);
      const SuperThinResult r = super_thin(cat, lambda, b, g.seed);
      const auto cumsum = normalized_cumsum(r.standardized_u);
      const BandMethod method = band_method == "pointwise"    ? BandMethod::pointwise
                                : band_method == "bonferroni" ? BandMethod::bonferroni
                                                              : BandMethod::simultaneous_rank;
      if (r.times.empty()) throw std::invalid_argument("no residual points");
      const UniformityBand band = uniformity_band(r.times.size(), nsim, level,
                                                  derive_seed(g.seed, 3), method);
      const double D = ks_statistic_uniform(r.standardized_u);
      err << "residuals " << r.times.size() << ", b = " << b << ", KS D = " << D
          << ", p = " << ks_pvalue(D, r.standardized_u.size())
          << ", band " << (band.contains(cumsum) ? "contains" : "excludes") << " the path\n";
      Sink sink(res_out, out);
      write_residuals_csv(*sink, r, cumsum, band);
      return kExitOk;
    }

    if (*bench) {
      bool all_ok = true;
      ExperimentConfig base;
      base.replicates = replicates;
      base.seed = g.seed;
      base.delta = g.delta;
      base.threads = g.threads;
      base.solve = solve_options(g);
      base.pipeline.smoother = smoother(g);
      if (app.count("--negative-target") > 0) {
        base.pipeline.rescale.on_negative_target = parse_policy(g.negative_target);
      }
      std::vector<ScenarioSummary> table;
      auto want = [&](const std::string& name) {
        return bench_scenario == "all" || bench_scenario == name ||
               (bench_scenario == "table" && name != "ladder" && name != "noise" &&
                name != "etas");
      };
      bool matched = false;
      for (Scenario s : all_scenarios()) {
        if (!want(std::string(scenario_name(s)))) continue;
        matched = true;
        ExperimentConfig c = base;
        c.scenario = s;
        table.push_back(run_scenario(c));
        print_summary(out, table.back());
        if (check) print_checks(out, check_against_published(table.back()), all_ok);
      }
      if (want("ladder")) {
        matched = true;
        const LadderSummary l = run_stabilization_ladder(base);
        out << "ladder: raw " << l.mean_raw << ", truncated+smoothed " << l.mean_truncated_smoothed
            << ", rescaled " << l.mean_stabilized << '\n';
        if (check) print_checks(out, {check_ladder(l)}, all_ok);
      }
      if (want("noise")) {
        matched = true;
        const auto grid = linspace(0.0, 0.001, 20);
        const NoiseSummary n = run_noise_sensitivity(base, grid);
        out << "noise: n = " << n.events << ", spearman " << n.spearman << '\n';
        for (const NoiseRow& r : n.rows) {
          out << "  sigma " << r.sigma << "  lambda-RMSE " << r.lambda_rmse << "  K-RMSE "
              << r.k_rmse << '\n';
        }
        if (check) print_checks(out, check_noise(n), all_ok);
      }
      if (want("etas")) {
        matched = true;
        EtasConfig e;
        e.seed = g.seed;
        e.delta = g.delta;
        e.bandwidth = g.bandwidth;
        e.threads = g.threads;
        const EtasSummary s = run_etas_magnitude(e);
        out << "etas: mean RMSE mle " << s.mean_rmse_mle << ", empirical " << s.mean_rmse_empirical
            << " (" << s.failures << " failed)\n";
        if (check) print_checks(out, check_etas(s), all_ok);
      }
      if (!matched) throw CLI::ValidationError("--scenario", "unknown bench " + bench_scenario);
      if (!bench_out.empty()) {
        Sink sink(bench_out, out);
        *sink << "scenario,estimator,mean,sd,failures,replicates\n" << std::setprecision(10);
        for (const ScenarioSummary& s : table) {
          for (const EstimatorSummary* e : {&s.unscaled_empirical, &s.mle, &s.scaled_empirical}) {
            *sink << scenario_name(s.scenario) << ',' << e->name << ',' << e->mean << ',' << e->sd
                  << ',' << e->failures << ',' << s.replicates << '\n';
          }
        }
      }
      return check && !all_ok ? kExitCheckFailed : kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(argc, argv, out, err);
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace vph
