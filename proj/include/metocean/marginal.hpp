#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "metocean/ingest.hpp"
#include "metocean/random.hpp"

namespace metocean {

/// Piecewise-linear CDF of the below-threshold body of one covariate bin.
/// Knots are strictly increasing in both x and p; the first knot has p = 0 and
/// the last sits at (threshold, tau).
struct BodyTable {
  std::vector<double> x;
  std::vector<double> p;

  double cdf(double value) const;
  double quantile(double prob) const;
};

/// Penalised piecewise-constant GP tail model for one variable.
struct MarginalModel {
  std::string variable;
  double tau = 0.8;
  double xi = 0;
  std::vector<double> psi;         ///< per-bin thresholds
  std::vector<double> sigma;       ///< per-bin GP scales
  double penalty = 0;              ///< selected roughness-penalty weight
  std::vector<BodyTable> body;     ///< per-bin body CDF
  std::vector<double> bin_weight;  ///< share of observations in each bin

  std::size_t n_bins() const { return psi.size(); }
  double upper_endpoint(std::size_t bin) const;

  /// Composite (body + GP tail) CDF and survival.
  double cdf(double x, std::size_t bin) const;
  double survival(double x, std::size_t bin) const;
  /// Inverse composite CDF, given as (u, 1-u) for tail precision.
  double quantile(double u, double one_minus_u, std::size_t bin) const;
  double quantile(double u, std::size_t bin) const { return quantile(u, 1.0 - u, bin); }
};

struct PpcOptions {
  double tau = 0.8;
  std::vector<double> penalty_grid = {0.0, 1.0, 10.0, 100.0, 1e3, 1e4,
                                      std::numeric_limits<double>::infinity()};
  int cv_folds = 10;
  std::size_t min_exceedances = 20;
  std::uint64_t seed = 0;          ///< fold assignment
  double xi_lo = -0.5;
  double xi_hi = 0.5;
  double xi_grid_step = 0.1;
  double tie_tolerance = 0.1;      ///< log-likelihood units
  std::size_t max_body_knots = 512;
};

struct PpcDiagnostics {
  std::vector<double> penalty_grid;
  std::vector<double> cv_score;    ///< held-out log-likelihood per grid point
  std::size_t selected = 0;
  double neg_log_likelihood = 0;
};

/// Observations split into per-bin vectors.
std::vector<std::vector<double>> split_by_bin(std::span<const double> values,
                                              const CovariateBinning& bins);

/// Cross-validated roughness-penalised GP fit with shared shape.
MarginalModel fit_gp_ppc(const std::vector<std::vector<double>>& per_bin, const PpcOptions& options,
                         PpcDiagnostics* diagnostics = nullptr);

/// GP fit on fixed exceedances (threshold already removed) for a single
/// penalty weight. Exposed for cross-validation tests and bootstrap.
struct GpFit {
  double xi = 0;
  std::vector<double> sigma;
  double neg_log_likelihood = 0;   ///< penalised
};
GpFit fit_gp_exceedances(const std::vector<std::vector<double>>& exceedances, double penalty,
                         double xi_lo = -0.5, double xi_hi = 0.5, double xi_step = 0.1);

/// Held-out GP log-likelihood of exceedances under (xi, sigma).
double gp_log_likelihood(const std::vector<std::vector<double>>& exceedances, double xi,
                         std::span<const double> sigma);

/// T-year return value of the annual maximum under a Poisson storm rate.
/// Throws an extrapolation error if the level lies below the thresholds.
double return_value(const MarginalModel& model, double years, double annual_rate);

/// Physical -> standard Laplace, per observation with its bin label.
std::vector<double> to_laplace(const MarginalModel& model, std::span<const double> x,
                               std::span<const std::size_t> bins);
double to_laplace(const MarginalModel& model, double x, std::size_t bin);

/// Standard Laplace -> physical; exact inverse of to_laplace.
std::vector<double> from_laplace(const MarginalModel& model, std::span<const double> z,
                                 std::span<const std::size_t> bins);
double from_laplace(const MarginalModel& model, double z, std::size_t bin);

struct BootstrapOptions {
  std::size_t n_boot = 100;
  double tau_lo = 0.8;
  double tau_hi = 0.8;
  std::uint64_t seed = 0;
  int max_retries = 10;
  PpcOptions fit;  ///< tau here is overridden per replicate
  /// Returns indices into the original sample; defaults to draws with replacement.
  std::function<std::vector<std::size_t>(std::size_t n, RandomStream& rng)> resampler;
};

/// Storm-block bootstrap with per-replicate threshold probability drawn from
/// [tau_lo, tau_hi]. Replicate r uses random stream (seed, r).
std::vector<MarginalModel> bootstrap_marginal(std::span<const double> values,
                                              const CovariateBinning& bins,
                                              const BootstrapOptions& options);

}  // namespace metocean
