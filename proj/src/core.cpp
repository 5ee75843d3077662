#include "vph/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vph/error.hpp"
#include "vph/simd/kernels.hpp"

namespace vph {

EventCatalog::EventCatalog(std::vector<double> times, double window_end,
                           std::optional<std::vector<double>> marks,
                           std::optional<std::vector<Location>> coords)
    : times_(std::move(times)),
      window_end_(window_end),
      marks_(std::move(marks)),
      coords_(std::move(coords)) {
  if (!(window_end_ >= 0.0) || !std::isfinite(window_end_)) {
    throw std::invalid_argument("window end must be finite and nonnegative");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] >= 0.0 && times_[i] <= window_end_)) {
      throw std::invalid_argument("event time " + std::to_string(times_[i]) +
                                  " outside [0, " + std::to_string(window_end_) + "]");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) throw NonIncreasingTimesError(i);
  }
  if (marks_ && marks_->size() != times_.size()) {
    throw std::invalid_argument("marks length does not match times");
  }
  if (coords_ && coords_->size() != times_.size()) {
    throw std::invalid_argument("coords length does not match times");
  }
}

std::span<const double> EventCatalog::marks() const {
  if (!marks_) throw std::logic_error("catalog has no marks");
  return *marks_;
}

std::span<const Location> EventCatalog::coords() const {
  if (!coords_) throw std::logic_error("catalog has no coordinates");
  return *coords_;
}

std::size_t EventCatalog::count_before(double t) const {
  return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) -
                                  times_.begin());
}

TriggeringKernel TriggeringKernel::exponential(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("exponential kernel needs beta > 0");
  }
  return TriggeringKernel(ExponentialKernel{beta});
}

TriggeringKernel TriggeringKernel::etas_power_law(double c, double rho, double a, double m0) {
  if (!(c > 0.0)) throw std::invalid_argument("power-law kernel needs c > 0");
  if (!(rho > 1.0)) throw std::invalid_argument("power-law kernel needs rho > 1 to normalize");
  return TriggeringKernel(EtasPowerLawKernel{c, rho, a, m0});
}

double TriggeringKernel::density(double u) const {
  if (u < 0.0) return 0.0;
  return std::visit(
      [u](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          return k.beta * std::exp(-k.beta * u);
        } else {
          return (k.rho - 1.0) * std::pow(k.c, k.rho - 1.0) * std::pow(u + k.c, -k.rho);
        }
      },
      params_);
}

double TriggeringKernel::integral(double u) const {
  if (!(u > 0.0)) return 0.0;
  if (std::isinf(u)) return 1.0;
  return std::visit(
      [u](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          return -std::expm1(-k.beta * u);
        } else {
          // 1 - (c / (u + c))^(rho - 1)
          return -std::expm1((k.rho - 1.0) * std::log(k.c / (u + k.c)));
        }
      },
      params_);
}

double TriggeringKernel::sample_lag(double u01, double horizon) const {
  const double v = u01 * integral(horizon);
  return std::visit(
      [v](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          return -std::log1p(-v) / k.beta;
        } else {
          return k.c * std::expm1(-std::log1p(-v) / (k.rho - 1.0));
        }
      },
      params_);
}

double TriggeringKernel::exponential_rate() const {
  if (const auto* e = std::get_if<ExponentialKernel>(&params_)) return e->beta;
  throw std::logic_error("kernel is not exponential");
}

std::string TriggeringKernel::describe() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          os << "exponential(beta=" << k.beta << ")";
        } else {
          os << "power_law(c=" << k.c << ", rho=" << k.rho << ")";
        }
      },
      params_);
  return os.str();
}

void HawkesParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("background rate mu must be positive");
  if (!(K >= 0.0)) throw std::invalid_argument("productivity K must be nonnegative");
}

std::string PipelineFlags::to_string() const {
  std::string out;
  auto add = [&](PipelineFlag f, const char* name) {
    if (!has(f)) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(PipelineFlag::raw, "raw");
  add(PipelineFlag::truncated, "truncated");
  add(PipelineFlag::smoothed, "smoothed");
  add(PipelineFlag::rescaled, "rescaled");
  return out;
}

double ProductivityEstimate::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

namespace {

void require_aligned(const EventCatalog& catalog, std::span<const double> K) {
  if (K.size() != catalog.size()) {
    throw std::invalid_argument("productivity vector length " + std::to_string(K.size()) +
                                " does not match catalog size " +
                                std::to_string(catalog.size()));
  }
}

// Events older than this many e-folds contribute exactly zero in double.
constexpr double kExpCutoff = 746.0;

double excitation(std::span<const double> times, std::span<const double> K,
                  const TriggeringKernel& kernel, double t) {
  if (kernel.is_exponential()) {
    const double beta = kernel.exponential_rate();
    const auto first = std::lower_bound(times.begin(), times.end(), t - kExpCutoff / beta);
    const auto start = static_cast<std::size_t>(first - times.begin());
    return beta * simd::exp_decay_sum(times.subspan(start), K.subspan(start, times.size() - start),
                                      t, beta);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) acc += K[i] * kernel.density(t - times[i]);
  return acc;
}

}  // namespace

double conditional_intensity(const EventCatalog& catalog, double mu,
                             const TriggeringKernel& kernel, std::span<const double> K, double t) {
  require_aligned(catalog, K);
  const std::size_t count = catalog.count_before(t);
  return mu + excitation(catalog.times().first(count), K.first(count), kernel, t);
}

std::vector<double> intensities_at_events(const EventCatalog& catalog, double mu,
                                          const TriggeringKernel& kernel,
                                          std::span<const double> K) {
  require_aligned(catalog, K);
  const auto times = catalog.times();
  std::vector<double> out(times.size(), mu);
  if (kernel.is_exponential()) {
    const double beta = kernel.exponential_rate();
    double decayed = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      decayed = std::exp(-beta * (times[i] - times[i - 1])) * (decayed + K[i - 1]);
      out[i] = mu + beta * decayed;
    }
    return out;
  }
  for (std::size_t j = 1; j < times.size(); ++j) {
    out[j] = mu + excitation(times.first(j), K.first(j), kernel, times[j]);
  }
  return out;
}

IntensityModel::IntensityModel(EventCatalog catalog, double mu, TriggeringKernel kernel,
                               std::vector<double> K)
    : catalog_(std::move(catalog)), mu_(mu), kernel_(kernel), K_(std::move(K)) {
  require_aligned(catalog_, K_);
}

double IntensityModel::operator()(double t) const {
  const std::size_t count = catalog_.count_before(t);
  return mu_ + excitation(catalog_.times().first(count), std::span<const double>(K_).first(count),
                          kernel_, t);
}

}  // namespace vph
