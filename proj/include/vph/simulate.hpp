#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "vph/core.hpp"
#include "vph/random.hpp"

namespace vph {

struct ConstantProductivity {
  double k;
};
/// K(tau_i) = f(tau_i).
struct TimeProductivity {
  std::function<double(double)> f;
};
/// K(tau_i) = f(tau_i - tau_{i-1}), with tau_0 = 0 for the first event.
struct RenewalProductivity {
  std::function<double(double)> f;
};
/// K(tau_i) = A exp(a (m_i - m0)).
struct MagnitudeProductivity {
  double A;
  double a;
  double m0;
};

using ProductivitySpec = std::variant<ConstantProductivity, TimeProductivity,
                                      RenewalProductivity, MagnitudeProductivity>;

/// Exponential magnitudes above a cutoff: m = m0 + Exp(rate).
struct MagnitudeDistribution {
  double rate;
  double m0;

  double sample(Rng& rng) const;
  double mean() const { return m0 + 1.0 / rate; }
};

struct SimulationOptions {
  std::size_t max_events = 1'000'000;
};

/// One branching realization with per-event bookkeeping in time order.
struct SimulatedProcess {
  EventCatalog catalog;
  std::vector<double> true_K;
  /// Index of the parent event, or -1 for background events.
  std::vector<std::ptrdiff_t> parent;
};

/// Homogeneous Poisson process on [0, T].
EventCatalog simulate_poisson(double rate, double T, std::uint64_t seed);

/// Cluster simulation: Poisson(mu) immigrants, and every event at tau with
/// productivity K(tau) has Poisson(K(tau) * G(T - tau)) children at lags drawn
/// from g truncated to [0, T - tau]. Events are finalized in time order so
/// history-dependent productivities (renewal) are exact.
/// Throws CascadeOverflowError past `opts.max_events`.
SimulatedProcess simulate_variable_hawkes(double mu, const TriggeringKernel& kernel,
                                          const ProductivitySpec& spec, double T,
                                          std::uint64_t seed,
                                          std::optional<MagnitudeDistribution> mags = std::nullopt,
                                          const SimulationOptions& opts = {});

/// ETAS: productivity A exp(a (m - m0)) with iid magnitudes for every event.
SimulatedProcess simulate_etas(double mu, const TriggeringKernel& kernel, double A, double a,
                               const MagnitudeDistribution& mags, double T, std::uint64_t seed,
                               const SimulationOptions& opts = {});

/// E[K] under the ETAS magnitude law; finite only when a < rate.
double etas_mean_productivity(double A, double a, const MagnitudeDistribution& mags);

}  // namespace vph
