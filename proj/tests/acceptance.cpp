// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is nonzero when any check fails, except checks listed in
// kKnownDiscrepancies. Those still print FAIL; if one of them passes the run
// also exits nonzero so the list cannot go stale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vph/diagnostics.hpp"
#include "vph/error.hpp"
#include "vph/estimate.hpp"
#include "vph/experiments.hpp"
#include "vph/io.hpp"
#include "vph/log.hpp"
#include "vph/random.hpp"
#include "vph/simulate.hpp"
#include "vph/stabilize.hpp"

using namespace vph;
using Clock = std::chrono::steady_clock;

namespace {

const std::set<std::string> kKnownDiscrepancies{"constant.mle"};

struct Report {
  int unexpected = 0;

  void line(int id, const std::string& title, const std::vector<CheckResult>& checks) {
    bool all = true;
    std::ostringstream detail;
    for (const CheckResult& c : checks) {
      all = all && c.passed;
      const bool known = kKnownDiscrepancies.count(c.name) > 0;
      if (c.passed == known) ++unexpected;
      if (!c.passed) {
        detail << " [FAIL " << c.name << (known ? " (known discrepancy)" : "") << ": " << c.detail
               << "]";
      }
    }
    if (all) {
      detail.str("");
      for (const CheckResult& c : checks) detail << " [" << c.name << ": " << c.detail << "]";
    }
    std::printf("%s criterion %d (%s):%s\n", all ? "PASS" : "FAIL", id, title.c_str(),
                detail.str().c_str());
    std::fflush(stdout);
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const TriggeringKernel kFig1Kernel = TriggeringKernel::exponential(0.7);
constexpr double kMu = 0.5;
constexpr double kT = 1000.0;

SimulatedProcess fig1(std::uint64_t seed) {
  return simulate_variable_hawkes(kMu, kFig1Kernel, scenario_productivity(Scenario::normals), kT,
                                  seed);
}

std::vector<CheckResult> criterion1() {
  double worst = 0.0;
  std::size_t max_n = 0, solved = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto p = fig1(derive_seed(101, r));
    max_n = std::max(max_n, p.catalog.size());
    const auto G = TriggeringMatrix::build(p.catalog, kFig1Kernel);
    const auto x = solve_inverse_intensities(G).inverse_intensity;
    const auto gx = G.multiply(x);
    for (double v : gx) worst = std::max(worst, std::abs(v - 1.0));
    ++solved;
  }

  // A 2000-event catalog from a stationary constant-productivity process.
  auto big = simulate_variable_hawkes(kMu, kFig1Kernel, ConstantProductivity{0.5}, 2500.0, 7);
  std::vector<double> t(big.catalog.times().begin(), big.catalog.times().begin() + 2000);
  const EventCatalog cat(t, t.back());
  double best = 1e9;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = Clock::now();
    const auto sol = solve_mle_productivities(cat, kMu, kFig1Kernel);
    best = std::min(best, seconds_since(t0));
    if (sol.estimate.values.size() != 2000) best = 1e9;
  }
  return {{"score.residual", solved == 50 && worst < 1e-8,
           fmt("max |G x - 1| = %.3g over 50 catalogs, largest n = %.0f", worst,
               static_cast<double>(max_n))},
          {"score.timing", best < 1.0, fmt("n = 2000 solve in %.4f s", best)}};
}

std::vector<CheckResult> criterion2() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t valid = 0, drawn = 0, oracle_failures = 0;
  double worst = 0.0;
  while (valid < 100 && drawn < 100000) {
    ++drawn;
    const int n = size(rng);
    const double T = 10.0;
    std::vector<double> t(static_cast<std::size_t>(n));
    for (double& v : t) v = T * u(rng);
    std::sort(t.begin(), t.end());
    if (std::adjacent_find(t.begin(), t.end()) != t.end()) continue;
    const EventCatalog cat(t, T);
    MleSolution sol;
    try {
      sol = solve_mle_productivities(cat, kMu, kFig1Kernel);
    } catch (const SingularMatrixError&) {
      continue;
    }
    if (std::any_of(sol.intensity.begin(), sol.intensity.end(), [](double v) { return v <= 0.0; })) {
      continue;
    }
    ++valid;
    const auto ref = oracle::newton_mle(cat, kMu, kFig1Kernel);
    if (!ref) {
      ++oracle_failures;
      continue;
    }
    for (std::size_t i = 0; i < cat.size(); ++i) {
      worst = std::max(worst, std::abs(sol.estimate.values[i] - (*ref)[i]));
    }
  }
  return {{"oracle.match", valid == 100 && oracle_failures == 0 && worst < 1e-4,
           fmt("max |K - K_oracle| = %.3g over %.0f catalogs (%.0f drawn)", worst,
               static_cast<double>(valid), static_cast<double>(drawn))}};
}

std::vector<CheckResult> criterion3() {
  const auto t0 = Clock::now();
  std::vector<CheckResult> out;
  for (Scenario s : all_scenarios()) {
    ExperimentConfig cfg;
    cfg.scenario = s;
    cfg.replicates = 100;
    const ScenarioSummary summary = run_scenario(cfg);
    std::printf("  %-12s unscaled empirical %.4g, mle %.4g, scaled empirical %.4g (failures %zu/%zu/%zu)\n",
                std::string(scenario_name(s)).c_str(), summary.unscaled_empirical.mean,
                summary.mle.mean, summary.scaled_empirical.mean, summary.unscaled_empirical.failures,
                summary.mle.failures, summary.scaled_empirical.failures);
    for (CheckResult& c : check_against_published(summary)) out.push_back(std::move(c));
  }
  const double elapsed = seconds_since(t0);
  out.push_back({"table.runtime", elapsed < 600.0, fmt("%.1f s", elapsed)});
  return out;
}

std::vector<CheckResult> criterion4() {
  ExperimentConfig cfg;
  cfg.replicates = 100;
  const LadderSummary l = run_stabilization_ladder(cfg);
  std::printf("  ladder means: raw %.4g, truncated+smoothed %.4g, rescaled %.4g\n", l.mean_raw,
              l.mean_truncated_smoothed, l.mean_stabilized);
  return {check_ladder(l)};
}

std::vector<CheckResult> criterion5() {
  double gap = 0.0, count = 0.0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto p = fig1(derive_seed(505, r));
    const double n = static_cast<double>(p.catalog.size());
    double sumK = 0.0;
    for (double k : p.true_K) sumK += k;
    gap += n - kMu * kT - sumK;
    count += n;
  }
  const double rel = std::abs(gap / 500.0) / (count / 500.0);
  return {{"martingale", rel < 0.02,
           fmt("|mean(n - mu T - sum K)| / mean(n) = %.4g (mean n %.1f)", rel, count / 500.0)}};
}

std::vector<CheckResult> criterion6() {
  double worst = 0.0;
  std::size_t catalogs = 0;
  for (Scenario s : all_scenarios()) {
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto p = simulate_variable_hawkes(kMu, kFig1Kernel, scenario_productivity(s), kT,
                                              derive_seed(606 + static_cast<int>(s), r));
      const double target = static_cast<double>(p.catalog.size()) - kMu * kT;
      std::vector<ProductivityEstimate> inputs;
      inputs.push_back(empirical_productivities(p.catalog, 7.0, kMu));
      try {
        inputs.push_back(mle_productivities(p.catalog, kMu, kFig1Kernel));
      } catch (const SingularMatrixError&) {
      }
      for (const auto& est : inputs) {
        PipelineConfig cfg = experiment_pipeline();
        cfg.order = {Stage::truncate, Stage::smooth};
        const auto smoothed = stabilize_pipeline(est, p.catalog, kMu, cfg);
        if (smoothed.sum() == 0.0) continue;
        const auto out = rescale_total(smoothed, p.catalog.size(), kMu, kT,
                                       {NegativeTargetPolicy::apply, 1e-12});
        double sum = 0.0;
        for (double v : out.values) sum += v;
        worst = std::max(worst, std::abs(sum - target) / std::max(1.0, std::abs(target)));
        ++catalogs;
      }
    }
  }
  return {{"rescale.exact", worst <= 1e-10,
           fmt("max relative error %.3g over %.0f estimates", worst, static_cast<double>(catalogs))}};
}

std::vector<CheckResult> criterion7() {
  ExperimentConfig cfg;
  const auto grid = linspace(0.0, 0.001, 20);
  const NoiseSummary n = run_noise_sensitivity(cfg, grid);
  std::printf("  noise: n = %zu, last-event error %.3g, sigma=0 head error %.3g\n", n.events,
              n.last_event_error, n.rows.front().k_max_error_head);
  auto checks = check_noise(n);
  const double expected = n.last_event_error;
  const double got = n.rows.front().k_rmse;
  checks.push_back({"noise.last_term_only", std::abs(got - expected) <= 1e-8 + 1e-8 * expected,
                    fmt("sigma=0 K-RMSE %.6g vs |K_n| / sqrt(n) %.6g", got, expected)});
  return checks;
}

std::vector<CheckResult> criterion8() {
  int rejections = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    const auto p = fig1(derive_seed(1, 800000 + r));
    const IntensityModel model(p.catalog, kMu, kFig1Kernel, p.true_K);
    const double b = static_cast<double>(p.catalog.size()) / kT;
    const auto res = super_thin(p.catalog, [&](double t) { return model(t); }, b,
                                derive_seed(1, 900000 + r));
    const double D = ks_statistic_uniform(res.standardized_u);
    if (ks_pvalue(D, res.standardized_u.size()) < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;

  const std::size_t m = 200;
  const auto band = uniformity_band(m, 2000, 0.95, 810);
  Rng rng = make_rng(811);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inside = 0;
  const int paths = 4000;
  for (int k = 0; k < paths; ++k) {
    std::vector<double> x(m);
    for (double& v : x) v = u(rng);
    if (band.contains(normalized_cumsum(x))) ++inside;
  }
  const double coverage = static_cast<double>(inside) / paths;
  return {{"ks.size", std::abs(rate - 0.05) <= 0.02, fmt("rejection rate %.3f over 1000", rate)},
          {"band.coverage", std::abs(coverage - 0.95) <= 0.02,
           fmt("coverage %.4f over %.0f fresh paths (m = 200, nsim = 2000)", coverage, paths)}};
}

std::vector<CheckResult> criterion9() {
  const EtasConfig cfg;
  const EtasSummary s = run_etas_magnitude(cfg);
  std::printf("  etas: mean RMSE mle %.4g, empirical %.4g, failures %zu\n", s.mean_rmse_mle,
              s.mean_rmse_empirical, s.failures);
  return check_etas(s);
}

std::vector<CheckResult> criterion10() {
  const double truth[3] = {0.5, 0.5, 0.7};
  const char* names[3] = {"mu", "K", "beta"};
  int covered[3] = {0, 0, 0};
  int usable = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto p = simulate_variable_hawkes(truth[0], TriggeringKernel::exponential(truth[2]),
                                            ConstantProductivity{truth[1]}, 2000.0,
                                            derive_seed(1010, r));
    const auto fit = fit_constant_hawkes(p.catalog, {0.3, 0.3, TriggeringKernel::exponential(1.0)});
    const double est[3] = {fit.mu_hat, fit.K_hat, fit.beta_hat};
    ++usable;
    for (int k = 0; k < 3; ++k) {
      const double se = fit.standard_errors[static_cast<std::size_t>(k)];
      if (std::isfinite(se) && std::abs(est[k] - truth[k]) <= 1.959964 * se) ++covered[k];
    }
  }
  std::vector<CheckResult> out;
  for (int k = 0; k < 3; ++k) {
    const double c = static_cast<double>(covered[k]) / usable;
    out.push_back({std::string("fit.coverage.") + names[k], std::abs(c - 0.95) <= 0.05,
                   fmt("%.2f", c)});
  }

  const std::filesystem::path counts = VPH_FIXTURE_DIR "/weekly_counts.csv";
  const auto a = fit_constant_hawkes(disaggregate_counts(counts, {}, 42),
                                     {0.5, 0.5, TriggeringKernel::exponential(1.0)});
  const auto b = fit_constant_hawkes(disaggregate_counts(counts, {}, 42),
                                     {0.5, 0.5, TriggeringKernel::exponential(1.0)});
  const bool same = a.mu_hat == b.mu_hat && a.K_hat == b.K_hat && a.beta_hat == b.beta_hat &&
                    a.standard_errors == b.standard_errors;
  out.push_back({"fit.fixture_deterministic", same,
                 fmt("mu %.4g, K %.4g, beta %.4g", a.mu_hat, a.K_hat, a.beta_hat)});
  return out;
}

}  // namespace

int main() {
  set_warning_handler({});
  Report report;
  const auto t0 = Clock::now();
  report.line(1, "score-equation optimality", criterion1());
  report.line(2, "oracle equivalence", criterion2());
  report.line(3, "table reproduction", criterion3());
  report.line(4, "stabilization ladder", criterion4());
  report.line(5, "martingale identity", criterion5());
  report.line(6, "rescaling exactness", criterion6());
  report.line(7, "noise sensitivity", criterion7());
  report.line(8, "diagnostics calibration", criterion8());
  report.line(9, "ETAS magnitude study", criterion9());
  report.line(10, "constant fit recovery", criterion10());
  std::printf("total %.1f s; %d unexpected outcome(s)\n", seconds_since(t0), report.unexpected);
  return report.unexpected == 0 ? 0 : 1;
}
