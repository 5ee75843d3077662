#include "vph/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vph/diagnostics.hpp"
#include "vph/error.hpp"
#include "vph/random.hpp"

namespace vph {

namespace {

constexpr std::array<std::string_view, 5> kScenarioNames = {"normals", "exponential", "constant",
                                                             "cauchy", "renewal"};

// Runs body(i) for i in [0, count) on a small worker pool. Each index owns
// its output slot, so results do not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

void finalize(EstimatorSummary& s, std::span<const std::optional<double>> slots) {
  s.per_replicate.clear();
  s.failures = 0;
  for (const auto& v : slots) {
    if (v) {
      s.per_replicate.push_back(*v);
    } else {
      ++s.failures;
    }
  }
  const MeanSd m = mean_sd(s.per_replicate);
  s.mean = m.mean;
  s.sd = m.sd;
}

// Estimator failures that a replicate reports instead of aborting the run.
template <class F>
std::optional<double> guarded(F&& f) {
  try {
    return f();
  } catch (const SingularMatrixError&) {
  } catch (const ZeroSumError&) {
  } catch (const DegenerateSpreadError&) {
  }
  return std::nullopt;
}

PipelineConfig with_order(PipelineConfig cfg, std::vector<Stage> order) {
  cfg.order = std::move(order);
  return cfg;
}

}  // namespace

PipelineConfig experiment_pipeline() {
  PipelineConfig cfg;
  cfg.rescale.on_negative_target = NegativeTargetPolicy::apply;
  return cfg;
}

std::string_view scenario_name(Scenario s) noexcept {
  return kScenarioNames[static_cast<std::size_t>(s)];
}

Scenario parse_scenario(std::string_view name) {
  for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
    if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
  }
  throw std::invalid_argument("unknown scenario: " + std::string(name));
}

std::vector<Scenario> all_scenarios() {
  return {Scenario::normals, Scenario::exponential, Scenario::constant, Scenario::cauchy,
          Scenario::renewal};
}

double normal_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

double cauchy_density(double x, double location, double scale) {
  const double z = (x - location) / scale;
  return 1.0 / (M_PI * scale * (1.0 + z * z));
}

double normals_productivity(double t) {
  return 80.0 * normal_density(t, 200.0, 60.0) + 40.0 * normal_density(t, 800.0, 70.0);
}

double exponential_productivity(double t, double growth) { return 0.7 * std::exp(growth * t); }

double cauchy_productivity(double t) { return 100.0 * cauchy_density(t, 700.0, 100.0); }

double renewal_productivity(double gap) { return 4.0 * normal_density(gap, 5.0, 1.0); }

ProductivitySpec scenario_productivity(Scenario s, double exponential_growth) {
  switch (s) {
    case Scenario::normals:
      return TimeProductivity{normals_productivity};
    case Scenario::exponential:
      return TimeProductivity{
          [exponential_growth](double t) { return exponential_productivity(t, exponential_growth); }};
    case Scenario::constant:
      return ConstantProductivity{kConstantProductivity};
    case Scenario::cauchy:
      return TimeProductivity{cauchy_productivity};
    case Scenario::renewal:
      return RenewalProductivity{renewal_productivity};
  }
  throw std::invalid_argument("unknown scenario");
}

ScenarioSummary run_scenario(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
  const TriggeringKernel kernel = TriggeringKernel::exponential(cfg.beta);
  const ProductivitySpec spec = scenario_productivity(cfg.scenario, cfg.exponential_growth);
  const PipelineConfig unscaled_cfg =
      with_order(cfg.pipeline, {Stage::truncate, Stage::smooth});

  const std::size_t R = cfg.replicates;
  std::vector<std::optional<double>> unscaled(R), mle(R), scaled(R);
  std::vector<double> counts(R);

  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const SimulatedProcess sim =
        simulate_variable_hawkes(cfg.mu, kernel, spec, cfg.T, derive_seed(cfg.seed, r));
    const EventCatalog& cat = sim.catalog;
    counts[r] = static_cast<double>(cat.size());
    if (cat.size() < 2) return;

    const ProductivityEstimate emp = empirical_productivities(cat, cfg.delta, cfg.mu);
    unscaled[r] = guarded([&] {
      return rmse(stabilize_pipeline(emp, cat, cfg.mu, unscaled_cfg).values, sim.true_K);
    });
    scaled[r] = guarded([&] {
      return rmse(stabilize_pipeline(emp, cat, cfg.mu, cfg.pipeline).values, sim.true_K);
    });
    mle[r] = guarded([&] {
      ProductivityEstimate k = mle_productivities(cat, cfg.mu, kernel, cfg.solve);
      return rmse(stabilize_pipeline(std::move(k), cat, cfg.mu, cfg.pipeline).values, sim.true_K);
    });
  });

  ScenarioSummary out;
  out.scenario = cfg.scenario;
  out.replicates = R;
  out.mean_events = mean_sd(counts).mean;
  out.unscaled_empirical.name = "unscaled_empirical";
  out.mle.name = "mle";
  out.scaled_empirical.name = "scaled_empirical";
  finalize(out.unscaled_empirical, unscaled);
  finalize(out.mle, mle);
  finalize(out.scaled_empirical, scaled);
  return out;
}

LadderSummary run_stabilization_ladder(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
  const TriggeringKernel kernel = TriggeringKernel::exponential(cfg.beta);
  const ProductivitySpec spec = scenario_productivity(cfg.scenario, cfg.exponential_growth);
  const PipelineConfig ts_cfg = with_order(cfg.pipeline, {Stage::truncate, Stage::smooth});
  const PipelineConfig full_cfg =
      with_order(cfg.pipeline, {Stage::truncate, Stage::smooth, Stage::rescale});

  const std::size_t R = cfg.replicates;
  std::vector<std::optional<LadderReplicate>> slots(R);
  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const SimulatedProcess sim =
        simulate_variable_hawkes(cfg.mu, kernel, spec, cfg.T, derive_seed(cfg.seed, r));
    const EventCatalog& cat = sim.catalog;
    if (cat.size() < 2) return;
    try {
      const ProductivityEstimate raw = mle_productivities(cat, cfg.mu, kernel, cfg.solve);
      LadderReplicate rep;
      rep.raw = rmse(raw.values, sim.true_K);
      rep.truncated_smoothed = rmse(stabilize_pipeline(raw, cat, cfg.mu, ts_cfg).values, sim.true_K);
      rep.stabilized = rmse(stabilize_pipeline(raw, cat, cfg.mu, full_cfg).values, sim.true_K);
      slots[r] = rep;
    } catch (const SingularMatrixError&) {
    } catch (const ZeroSumError&) {
    } catch (const DegenerateSpreadError&) {
    }
  });

  LadderSummary out;
  std::size_t ordered = 0;
  for (const auto& s : slots) {
    if (!s) {
      ++out.failures;
      continue;
    }
    out.replicates.push_back(*s);
    out.mean_raw += s->raw;
    out.mean_truncated_smoothed += s->truncated_smoothed;
    out.mean_stabilized += s->stabilized;
    if (s->raw >= 10.0 * s->truncated_smoothed && s->stabilized < s->truncated_smoothed) ++ordered;
  }
  if (!out.replicates.empty()) {
    const auto m = static_cast<double>(out.replicates.size());
    out.mean_raw /= m;
    out.mean_truncated_smoothed /= m;
    out.mean_stabilized /= m;
  }
  // Failed replicates count against the ordering fraction.
  out.fraction_ordered = static_cast<double>(ordered) / static_cast<double>(R);
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

NoiseSummary run_noise_sensitivity(const ExperimentConfig& cfg, std::span<const double> sigma_grid,
                                   NoiseDraws draws) {
  const TriggeringKernel kernel = TriggeringKernel::exponential(cfg.beta);
  const ProductivitySpec spec = scenario_productivity(cfg.scenario, cfg.exponential_growth);
  const SimulatedProcess sim =
      simulate_variable_hawkes(cfg.mu, kernel, spec, cfg.T, kNoiseCatalogSeed);
  const EventCatalog& cat = sim.catalog;
  if (cat.size() < 2) throw std::runtime_error("noise catalog has fewer than two events");
  const std::size_t n = cat.size();
  const std::vector<double> lambda = intensities_at_events(cat, cfg.mu, kernel, sim.true_K);
  const TriggeringMatrix G = TriggeringMatrix::build(cat, kernel);

  NoiseSummary out;
  out.events = n;
  out.last_event_error = std::abs(sim.true_K.back()) / std::sqrt(static_cast<double>(n));
  out.rows.resize(sigma_grid.size());

  parallel_for(sigma_grid.size(), cfg.threads, [&](std::size_t s) {
    const double sigma = sigma_grid[s];
    Rng rng = make_rng(cfg.seed, draws == NoiseDraws::common ? 0 : s);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> noisy(lambda);
    for (double& v : noisy) v += sigma * noise(rng);

    std::vector<double> K = solve_productivities(G, std::span(noisy).subspan(1), cfg.mu, cfg.solve);
    double head = 0.0;
    for (std::size_t i = 0; i < K.size(); ++i) head = std::max(head, std::abs(K[i] - sim.true_K[i]));
    K.push_back(0.0);
    out.rows[s] = NoiseRow{sigma, rmse(noisy, lambda), rmse(K, sim.true_K), head};
  });

  std::vector<double> lam_err, k_err;
  for (const NoiseRow& r : out.rows) {
    lam_err.push_back(r.lambda_rmse);
    k_err.push_back(r.k_rmse);
  }
  out.spearman = out.rows.size() >= 2 ? spearman(lam_err, k_err) : 0.0;
  return out;
}

EtasSummary run_etas_magnitude(const EtasConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
  const TriggeringKernel kernel = TriggeringKernel::exponential(cfg.beta);
  const MagnitudeDistribution mags{cfg.magnitude_rate, cfg.m0};
  const std::size_t R = cfg.replicates;

  std::vector<SimulatedProcess> sims;
  sims.reserve(R);
  for (std::size_t r = 0; r < R; ++r) {
    sims.push_back(
        simulate_etas(cfg.mu, kernel, cfg.A, cfg.a, mags, cfg.T, derive_seed(cfg.seed, r)));
  }
  double max_mark = cfg.m0;
  for (const auto& s : sims) {
    for (double m : s.catalog.marks()) max_mark = std::max(max_mark, m);
  }

  SmootherConfig smoother;
  smoother.bandwidth = cfg.bandwidth;
  smoother.domain = SmoothingDomain::mark;
  smoother.grid = EvaluationGrid{cfg.m0, max_mark, cfg.grid_step};

  EtasSummary out;
  out.grid = smoother.grid->points();
  out.true_curve.resize(out.grid.size());
  for (std::size_t k = 0; k < out.grid.size(); ++k) {
    out.true_curve[k] = cfg.A * std::exp(cfg.a * (out.grid[k] - cfg.m0));
  }

  struct Curves {
    std::vector<double> mle, emp;
    double rmse_mle = 0.0, rmse_emp = 0.0;
  };
  std::vector<std::optional<Curves>> slots(R);

  parallel_for(R, cfg.threads, [&](std::size_t r) {
    const EventCatalog& cat = sims[r].catalog;
    if (cat.size() < 2) return;
    const auto marks = cat.marks();
    const double own_max = *std::max_element(marks.begin(), marks.end());
    // Score each replicate on the part of the grid its own magnitudes cover.
    std::size_t cover = 0;
    while (cover < out.grid.size() && out.grid[cover] <= own_max + 1e-12) ++cover;

    auto score = [&](const std::vector<double>& curve) {
      return rmse(std::span(curve).first(cover), std::span(out.true_curve).first(cover));
    };
    try {
      Curves c;
      const ProductivityEstimate mle =
          truncate_nonneg(mle_productivities(cat, cfg.mu, kernel, cfg.solve));
      c.mle = smooth_by_mark(mle, marks, cat.size(), cfg.mu, cfg.T, smoother, cfg.rescale).values;
      const ProductivityEstimate emp =
          truncate_nonneg(empirical_productivities(cat, cfg.delta, cfg.mu));
      c.emp = smooth_by_mark(emp, marks, cat.size(), cfg.mu, cfg.T, smoother, cfg.rescale).values;
      c.rmse_mle = score(c.mle);
      c.rmse_emp = score(c.emp);
      slots[r] = std::move(c);
    } catch (const SingularMatrixError&) {
    } catch (const ZeroSumError&) {
    } catch (const DegenerateSpreadError&) {
    }
  });

  out.mean_curve_mle.assign(out.grid.size(), 0.0);
  out.mean_curve_empirical.assign(out.grid.size(), 0.0);
  for (const auto& s : slots) {
    if (!s) {
      ++out.failures;
      continue;
    }
    out.rmse_mle.push_back(s->rmse_mle);
    out.rmse_empirical.push_back(s->rmse_emp);
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      out.mean_curve_mle[k] += s->mle[k];
      out.mean_curve_empirical[k] += s->emp[k];
    }
  }
  const std::size_t ok = out.rmse_mle.size();
  if (ok > 0) {
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      out.mean_curve_mle[k] /= static_cast<double>(ok);
      out.mean_curve_empirical[k] /= static_cast<double>(ok);
    }
    out.mean_rmse_mle = mean_sd(out.rmse_mle).mean;
    out.mean_rmse_empirical = mean_sd(out.rmse_empirical).mean;
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman length mismatch");
  if (a.size() < 2) throw std::invalid_argument("spearman needs at least two pairs");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const MeanSd ma = mean_sd(ra);
  const MeanSd mb = mean_sd(rb);
  double cov = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) cov += (ra[i] - ma.mean) * (rb[i] - mb.mean);
  cov /= static_cast<double>(ra.size() - 1);
  if (ma.sd == 0.0 || mb.sd == 0.0) return 0.0;
  return cov / (ma.sd * mb.sd);
}

std::span<const PublishedRow> published_table() {
  static constexpr std::array<PublishedRow, 5> rows = {{
      {Scenario::normals, 1.75, 0.187, 0.0925},
      {Scenario::exponential, 1.90, 0.171, 0.0912},
      {Scenario::constant, 1.08, 0.121, 0.0570},
      {Scenario::cauchy, 1.23, 0.210, 0.188},
      {Scenario::renewal, 1.14, 0.761, 0.626},
  }};
  return rows;
}

std::vector<CheckResult> check_against_published(const ScenarioSummary& summary) {
  const auto table = published_table();
  const auto row = std::find_if(table.begin(), table.end(),
                                [&](const PublishedRow& r) { return r.scenario == summary.scenario; });
  const std::string prefix(scenario_name(summary.scenario));
  const bool strict_rows = summary.scenario == Scenario::normals ||
                           summary.scenario == Scenario::exponential ||
                           summary.scenario == Scenario::constant;
  const double tol = strict_rows ? 0.5 : 0.6;

  std::vector<CheckResult> out;
  auto within = [&](const char* name, const EstimatorSummary& est, double target) {
    std::ostringstream d;
    d << "measured " << est.mean << " vs published " << target << " (+-" << tol * 100 << "%)";
    if (est.failures > 0) d << ", " << est.failures << " failed replicates";
    const bool ok = !est.per_replicate.empty() && std::abs(est.mean - target) <= tol * target;
    out.push_back({prefix + "." + name, ok, d.str()});
  };
  if (strict_rows) within("unscaled_empirical", summary.unscaled_empirical, row->unscaled_empirical);
  within("mle", summary.mle, row->mle);
  within("scaled_empirical", summary.scaled_empirical, row->scaled_empirical);
  if (strict_rows) {
    const bool ordered = summary.unscaled_empirical.mean > summary.mle.mean &&
                         summary.mle.mean > summary.scaled_empirical.mean;
    std::ostringstream d;
    d << summary.unscaled_empirical.mean << " > " << summary.mle.mean << " > "
      << summary.scaled_empirical.mean;
    out.push_back({prefix + ".ordering", ordered, d.str()});
  }
  return out;
}

CheckResult check_ladder(const LadderSummary& ladder) {
  std::ostringstream d;
  d << "ordered in " << ladder.fraction_ordered * 100 << "% of replicates (mean raw "
    << ladder.mean_raw << ", truncated+smoothed " << ladder.mean_truncated_smoothed
    << ", rescaled " << ladder.mean_stabilized << ")";
  return {"ladder.ordering", ladder.fraction_ordered >= 0.9, d.str()};
}

std::vector<CheckResult> check_noise(const NoiseSummary& noise) {
  std::vector<CheckResult> out;
  const auto zero = std::find_if(noise.rows.begin(), noise.rows.end(),
                                 [](const NoiseRow& r) { return r.sigma == 0.0; });
  if (zero != noise.rows.end()) {
    std::ostringstream d;
    d << "max error before the last event " << zero->k_max_error_head << ", K-RMSE "
      << zero->k_rmse << " vs last-event term " << noise.last_event_error;
    const bool ok = zero->k_max_error_head <= 1e-8;
    out.push_back({"noise.sigma_zero", ok, d.str()});
  } else {
    out.push_back({"noise.sigma_zero", false, "grid has no sigma = 0 point"});
  }
  std::ostringstream d;
  d << "spearman " << noise.spearman << " over " << noise.rows.size() << " sigma values";
  out.push_back({"noise.spearman", noise.spearman > 0.9, d.str()});
  return out;
}

bool increasing_trend(std::span<const double> grid, std::span<const double> curve, double lo,
                      double hi) {
  if (grid.size() != curve.size()) throw std::invalid_argument("grid and curve differ in length");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] >= lo - 1e-9 && grid[k] <= hi + 1e-9) {
      x.push_back(grid[k]);
      y.push_back(curve[k]);
    }
  }
  if (x.size() < 2) return false;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx > 0.0 && y.back() > y.front();
}

std::vector<CheckResult> check_etas(const EtasSummary& etas) {
  constexpr double kLo = 3.5, kHi = 5.5, kMle = 1.56, kEmpirical = 0.926, kTol = 0.6;
  std::vector<CheckResult> out;
  const bool covers = !etas.grid.empty() && etas.grid.front() <= kLo + 1e-9 &&
                      etas.grid.back() >= kHi - 1e-9;
  out.push_back({"etas.mle_increasing",
                 covers && increasing_trend(etas.grid, etas.mean_curve_mle, kLo, kHi),
                 covers ? "averaged MLE curve over [3.5, 5.5]" : "grid does not reach 5.5"});
  out.push_back({"etas.empirical_increasing",
                 covers && increasing_trend(etas.grid, etas.mean_curve_empirical, kLo, kHi),
                 covers ? "averaged empirical curve over [3.5, 5.5]" : "grid does not reach 5.5"});
  std::ostringstream d;
  d << "empirical " << etas.mean_rmse_empirical << " < MLE " << etas.mean_rmse_mle;
  out.push_back({"etas.ordering", etas.mean_rmse_empirical < etas.mean_rmse_mle, d.str()});
  auto within = [&](const char* name, double measured, double target) {
    std::ostringstream m;
    m << "measured " << measured << " vs published " << target << " (+-60%)";
    out.push_back({name, std::abs(measured - target) <= kTol * target, m.str()});
  };
  within("etas.mle_rmse", etas.mean_rmse_mle, kMle);
  within("etas.empirical_rmse", etas.mean_rmse_empirical, kEmpirical);
  return out;
}

}  // namespace vph
