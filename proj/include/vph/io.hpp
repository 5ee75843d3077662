#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vph/core.hpp"
#include "vph/diagnostics.hpp"
#include "vph/estimate.hpp"
#include "vph/stabilize.hpp"

namespace vph {

/// Parses an ISO-8601 date or datetime ("2004-09-28", "2004-09-28T17:15:24.5Z",
/// "2004-09-28 17:15") or a plain number, returning days. Dates map to days
/// since 1970-01-01 UTC. Returns nullopt when neither form matches.
std::optional<double> parse_time_days(std::string_view text);

struct CatalogFilter {
  std::optional<double> min_magnitude;
  std::optional<double> max_depth;
  std::optional<double> min_latitude;
  std::optional<double> max_latitude;
  std::optional<double> min_longitude;
  std::optional<double> max_longitude;
  /// Same time scale as the file (days).
  std::optional<double> start;
  std::optional<double> end;
};

/// Delimiter-separated catalog with a header row. Column names are matched
/// case-insensitively; "time" is required, the others are optional.
struct CatalogFileSpec {
  char delimiter = ',';
  std::vector<std::string> time_columns{"time", "datetime", "date", "t"};
  std::vector<std::string> magnitude_columns{"magnitude", "mag", "m"};
  std::vector<std::string> latitude_columns{"latitude", "lat"};
  std::vector<std::string> longitude_columns{"longitude", "lon", "long"};
  std::vector<std::string> depth_columns{"depth"};
  CatalogFilter filter;
  /// Overrides the window end, in shifted time.
  std::optional<double> window_end;
  /// Seed of the tie-breaking jitter.
  std::uint64_t jitter_seed = 0;
};

/// Reads, filters and shifts a catalog. The time origin is the filter start
/// if set, else an "# origin=" metadata line, else the first retained event.
/// The window end is spec.window_end, else the filter end, else an
/// "# window_end=" line, else the last event. Tied times are separated by
/// seeded uniform offsets below half the smallest nonzero gap.
/// Throws ParseError with the 1-based line number on malformed input.
EventCatalog read_catalog(std::istream& in, const CatalogFileSpec& spec = {});
EventCatalog read_catalog(const std::filesystem::path& path, const CatalogFileSpec& spec = {});

/// Writes "time[,magnitude][,longitude,latitude]" rows with %.17g and the
/// metadata lines read_catalog understands, so the round trip is exact.
void write_catalog(std::ostream& out, const EventCatalog& catalog);
void write_catalog(const std::filesystem::path& path, const EventCatalog& catalog);

/// Makes tied sorted times strictly increasing; returns the number moved.
std::size_t break_ties(std::vector<double>& sorted_times, std::uint64_t seed);

enum class CountMode { incremental, cumulative };

/// Rows of "start,end,count" (header required). Times as in catalogs.
struct CumulativeCountSpec {
  char delimiter = ',';
  CountMode mode = CountMode::incremental;
};

/// Spreads each period's count uniformly over the period. The origin is the
/// earliest period start and the window ends at the last period end.
/// Throws ParseError on overlapping periods or negative counts.
EventCatalog disaggregate_counts(std::istream& in, const CumulativeCountSpec& spec,
                                 std::uint64_t seed);
EventCatalog disaggregate_counts(const std::filesystem::path& path,
                                 const CumulativeCountSpec& spec, std::uint64_t seed);

std::string fit_result_json(const FitResult& fit);

void write_productivity_csv(std::ostream& out, const EventCatalog& catalog,
                            std::span<const double> raw, std::span<const double> estimate);
void write_curve_csv(std::ostream& out, const MarkCurve& curve);
void write_residuals_csv(std::ostream& out, const SuperThinResult& result,
                         std::span<const double> cumsum, const UniformityBand& band);

}  // namespace vph
