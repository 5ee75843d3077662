#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vph {

struct Location {
  double x = 0.0;
  double y = 0.0;
};

/// Event times on the observation window [0, T], strictly increasing, with
/// optional magnitudes and passive spatial coordinates.
class EventCatalog {
 public:
  EventCatalog() = default;

  /// Throws NonIncreasingTimesError for unsorted or tied times and
  /// std::invalid_argument for times outside [0, window_end] or
  /// misaligned marks/coords.
  EventCatalog(std::vector<double> times, double window_end,
               std::optional<std::vector<double>> marks = std::nullopt,
               std::optional<std::vector<Location>> coords = std::nullopt);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double window_end() const noexcept { return window_end_; }

  std::span<const double> times() const noexcept { return times_; }
  double time(std::size_t i) const { return times_[i]; }

  bool has_marks() const noexcept { return marks_.has_value(); }
  std::span<const double> marks() const;

  bool has_coords() const noexcept { return coords_.has_value(); }
  std::span<const Location> coords() const;

  /// Number of events with time strictly less than t.
  std::size_t count_before(double t) const;

 private:
  std::vector<double> times_;
  double window_end_ = 0.0;
  std::optional<std::vector<double>> marks_;
  std::optional<std::vector<Location>> coords_;
};

/// g(u) = beta * exp(-beta * u).
struct ExponentialKernel {
  double beta;
};

/// Normalized power law g(u) = (rho - 1) c^(rho - 1) (u + c)^(-rho).
/// `a` and `m0` describe the magnitude factor exp(a (m - m0)), which callers
/// fold into the productivity rather than the time density.
struct EtasPowerLawKernel {
  double c;
  double rho;
  double a = 0.0;
  double m0 = 0.0;
};

/// Normalized, causal triggering density.
class TriggeringKernel {
 public:
  using Params = std::variant<ExponentialKernel, EtasPowerLawKernel>;

  static TriggeringKernel exponential(double beta);
  static TriggeringKernel etas_power_law(double c, double rho, double a = 0.0, double m0 = 0.0);

  /// g(u); zero for u < 0.
  double density(double u) const;
  /// Integral of g over [0, u]; zero for u <= 0, tends to 1.
  double integral(double u) const;
  /// Lag drawn from g truncated to [0, horizon] by inversion of `u01` in [0, 1).
  double sample_lag(double u01, double horizon) const;

  bool is_exponential() const noexcept {
    return std::holds_alternative<ExponentialKernel>(params_);
  }
  /// Rate of the exponential variant; throws std::logic_error otherwise.
  double exponential_rate() const;
  const Params& params() const noexcept { return params_; }
  std::string describe() const;

 private:
  explicit TriggeringKernel(Params p) : params_(p) {}
  Params params_;
};

/// Free-function spellings of the kernel contracts.
inline double kernel_eval(const TriggeringKernel& kernel, double u) { return kernel.density(u); }
inline double kernel_tail_integral(const TriggeringKernel& kernel, double u) {
  return kernel.integral(u);
}

struct HawkesParams {
  double mu;
  double K;
  TriggeringKernel kernel;

  /// Throws std::invalid_argument unless mu > 0 and K >= 0.
  void validate() const;
  bool supercritical() const noexcept { return K >= 1.0; }
};

enum class PipelineFlag : std::uint8_t {
  raw = 1u << 0,
  truncated = 1u << 1,
  rescaled = 1u << 2,
  smoothed = 1u << 3,
};

class PipelineFlags {
 public:
  constexpr PipelineFlags() = default;
  constexpr PipelineFlags(PipelineFlag f) : bits_(static_cast<std::uint8_t>(f)) {}

  constexpr bool has(PipelineFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr PipelineFlags& set(PipelineFlag f) {
    bits_ |= static_cast<std::uint8_t>(f);
    return *this;
  }
  constexpr PipelineFlags& clear(PipelineFlag f) {
    bits_ &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(f));
    return *this;
  }
  constexpr std::uint8_t bits() const { return bits_; }
  friend constexpr bool operator==(PipelineFlags, PipelineFlags) = default;

  std::string to_string() const;

 private:
  std::uint8_t bits_ = 0;
};

/// Per-event productivity estimates K(tau_1..tau_n).
struct ProductivityEstimate {
  std::vector<double> values;
  PipelineFlags flags;
  std::optional<double> bandwidth;

  double sum() const;
};

/// lambda(t) = mu + sum over tau_i < t of K_i g(t - tau_i).
/// Throws std::invalid_argument if K is not aligned with the catalog.
double conditional_intensity(const EventCatalog& catalog, double mu,
                             const TriggeringKernel& kernel, std::span<const double> K, double t);

/// Intensities at every event time, lambda(tau_1)..lambda(tau_n). O(n) for
/// the exponential kernel, O(n^2) otherwise.
std::vector<double> intensities_at_events(const EventCatalog& catalog, double mu,
                                          const TriggeringKernel& kernel,
                                          std::span<const double> K);

/// Evaluates a fitted intensity at arbitrary times; keeps a reference-free
/// copy of everything it needs.
class IntensityModel {
 public:
  IntensityModel(EventCatalog catalog, double mu, TriggeringKernel kernel, std::vector<double> K);

  double operator()(double t) const;
  const EventCatalog& catalog() const noexcept { return catalog_; }
  double mu() const noexcept { return mu_; }

 private:
  EventCatalog catalog_;
  double mu_;
  TriggeringKernel kernel_;
  std::vector<double> K_;
};

}  // namespace vph
