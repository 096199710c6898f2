#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metocean {

/// One sea state. Time is UTC seconds since the epoch.
struct SeaStateRecord {
  double time = 0;
  double hs = 0;
  double tp = 0;
  std::optional<double> covariate;
};

/// Storm-peak event produced by declustering.
struct StormPeak {
  double peak_hs = 0;
  double assoc_tp = 0;
  std::optional<double> covariate;
  int n_sea_states = 1;
  double start = 0;
  double end = 0;
};

struct CsvSchema {
  std::string time = "time";
  std::string hs = "hs";
  std::string tp = "tp";
  std::string covariate = "dir";  // optional column
};

struct RowReject {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<SeaStateRecord> records;
  std::vector<RowReject> rejects;
  bool has_covariate = false;
};

/// Parse a sea-state CSV. Rows with invalid numerics are rejected and
/// reported; structural problems (missing columns, empty file) throw.
LoadResult load_csv(const std::string& path, const CsvSchema& schema = {});

/// Same as load_csv but from an in-memory document.
LoadResult parse_csv(const std::string& text, const CsvSchema& schema = {});

/// Writes one line per rejected row ("line <n>: <reason>").
void write_reject_report(const std::string& path, const LoadResult& result);

/// Accepts epoch seconds or ISO-8601 (YYYY-MM-DD[THH:MM[:SS[.fff]]][Z]).
std::optional<double> parse_timestamp(const std::string& text);

struct DeclusterOptions {
  double threshold_q = 0.9;                ///< hs quantile defining exceedances
  std::optional<double> threshold;         ///< absolute threshold; overrides threshold_q
  double min_gap_hours = 24.0;             ///< below-threshold time separating storms
  std::optional<double> cadence_hours;     ///< sampling interval; median spacing if unset
};

struct DeclusterResult {
  std::vector<StormPeak> storms;
  double rate_per_year = 0;   ///< lambda
  double threshold = 0;
  double span_years = 0;
  double cadence_hours = 0;
  std::vector<std::string> warnings;
};

/// Threshold-exceedance run declustering. Records must be sorted by time.
DeclusterResult decluster(std::span<const SeaStateRecord> records,
                          const DeclusterOptions& options = {});

/// Allocation of observations to covariate intervals.
struct CovariateBinning {
  std::size_t n_bins = 1;
  std::vector<double> edges;            ///< empty for the single stationary bin
  std::vector<std::size_t> allocation;  ///< observation index -> bin index (0-based)

  std::vector<std::size_t> counts() const;
  /// Bin index for a single covariate value (wraps periodic 360-degree domains).
  std::size_t bin_of(double value) const;
};

/// Assign values to bins bounded by ordered edges. A 360-degree edge span is
/// treated as periodic. Passing no edges yields a single bin.
CovariateBinning allocate_bins(std::span<const double> values, std::span<const double> edges);

/// Degenerate single-bin allocation for n observations without covariate.
CovariateBinning single_bin(std::size_t n);

/// Type-7 (linear interpolation) empirical quantile. The input is copied.
double empirical_quantile(std::span<const double> values, double p);

/// Empirical quantile of an already sorted range.
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace metocean
