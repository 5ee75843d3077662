#include "vph/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "vph/error.hpp"
#include "vph/log.hpp"

namespace vph {

double MagnitudeDistribution::sample(Rng& rng) const {
  std::exponential_distribution<double> exp_dist(rate);
  return m0 + exp_dist(rng);
}

EventCatalog simulate_poisson(double rate, double T, std::uint64_t seed) {
  if (!(rate >= 0.0)) throw std::invalid_argument("Poisson rate must be nonnegative");
  if (!(T > 0.0)) throw std::invalid_argument("window length must be positive");
  Rng rng = make_rng(seed);
  std::poisson_distribution<long long> count_dist(rate * T);
  const long long n = rate > 0.0 ? count_dist(rng) : 0;
  std::uniform_real_distribution<double> uni(0.0, T);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (auto& t : times) t = uni(rng);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return EventCatalog(std::move(times), T);
}

namespace {

struct Pending {
  double time;
  std::ptrdiff_t parent;
  double magnitude;
  bool operator>(const Pending& o) const { return time > o.time; }
};

double productivity_for(const ProductivitySpec& spec, double t, double previous_time,
                        double magnitude) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantProductivity>) {
          return s.k;
        } else if constexpr (std::is_same_v<S, TimeProductivity>) {
          return s.f(t);
        } else if constexpr (std::is_same_v<S, RenewalProductivity>) {
          return s.f(t - previous_time);
        } else {
          return s.A * std::exp(s.a * (magnitude - s.m0));
        }
      },
      spec);
}

}  // namespace

SimulatedProcess simulate_variable_hawkes(double mu, const TriggeringKernel& kernel,
                                          const ProductivitySpec& spec, double T,
                                          std::uint64_t seed,
                                          std::optional<MagnitudeDistribution> mags,
                                          const SimulationOptions& opts) {
  if (!(mu > 0.0)) throw std::invalid_argument("background rate mu must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("window length must be positive");
  const bool needs_marks = std::holds_alternative<MagnitudeProductivity>(spec);
  if (needs_marks && !mags) {
    throw std::invalid_argument("magnitude productivity needs a magnitude distribution");
  }

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni01(0.0, 1.0);
  auto draw_magnitude = [&]() { return mags ? mags->sample(rng) : 0.0; };

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending;
  std::poisson_distribution<long long> background_count(mu * T);
  const long long n_background = background_count(rng);
  if (static_cast<std::size_t>(n_background) > opts.max_events) {
    throw CascadeOverflowError(opts.max_events);
  }
  for (long long b = 0; b < n_background; ++b) {
    const double t = T * uni01(rng);
    pending.push({t, -1, draw_magnitude()});
  }

  std::vector<double> times;
  std::vector<double> marks;
  std::vector<double> K;
  std::vector<std::ptrdiff_t> parents;
  double previous = 0.0;

  while (!pending.empty()) {
    const Pending ev = pending.top();
    pending.pop();
    // Ties have probability zero but a collision would break strict ordering.
    if (!times.empty() && !(ev.time > times.back())) continue;

    const auto index = static_cast<std::ptrdiff_t>(times.size());
    const double k = productivity_for(spec, ev.time, previous, ev.magnitude);
    if (!(k >= 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("productivity spec produced invalid value " +
                                  std::to_string(k) + " at t=" + std::to_string(ev.time));
    }
    times.push_back(ev.time);
    marks.push_back(ev.magnitude);
    K.push_back(k);
    parents.push_back(ev.parent);
    previous = ev.time;

    const double horizon = T - ev.time;
    const double expected = k * kernel.integral(horizon);
    if (expected <= 0.0) continue;
    std::poisson_distribution<long long> child_count(expected);
    const long long children = child_count(rng);
    if (times.size() + pending.size() + static_cast<std::size_t>(children) > opts.max_events) {
      throw CascadeOverflowError(opts.max_events);
    }
    for (long long c = 0; c < children; ++c) {
      const double lag = kernel.sample_lag(uni01(rng), horizon);
      const double child_time = std::min(ev.time + lag, T);
      pending.push({child_time, index, draw_magnitude()});
    }
  }

  std::optional<std::vector<double>> catalog_marks;
  if (mags) catalog_marks = std::move(marks);
  return SimulatedProcess{EventCatalog(std::move(times), T, std::move(catalog_marks)),
                          std::move(K), std::move(parents)};
}

double etas_mean_productivity(double A, double a, const MagnitudeDistribution& mags) {
  if (!(a < mags.rate)) return std::numeric_limits<double>::infinity();
  return A * mags.rate / (mags.rate - a);
}

SimulatedProcess simulate_etas(double mu, const TriggeringKernel& kernel, double A, double a,
                               const MagnitudeDistribution& mags, double T, std::uint64_t seed,
                               const SimulationOptions& opts) {
  if (!(A >= 0.0)) throw std::invalid_argument("ETAS base productivity must be nonnegative");
  const double branching = etas_mean_productivity(A, a, mags);
  if (!(branching < 1.0)) {
    warn("ETAS branching ratio " + std::to_string(branching) +
         " >= 1; the cascade may not terminate before the event cap");
  }
  return simulate_variable_hawkes(mu, kernel, MagnitudeProductivity{A, a, mags.m0}, T, seed,
                                  mags, opts);
}

}  // namespace vph
