#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metocean/contour.hpp"
#include "metocean/environment.hpp"

namespace metocean {

/// e^-1, the default non-exceedance level for both q_R and q_C.
inline constexpr double kExpMinusOne = 0.36787944117144233;

/// Resonant form: R = alpha hs / (1 + beta (tp - tp0)^2).
struct SyntheticParams {
  double alpha = 1;
  double beta = 0;
  double tp0 = 1;
};

double eval_synthetic(const SyntheticParams& p, double hs, double tp);

enum class ResponseKind { Deterministic, Rayleigh };
enum class ResponseForm { Resonant, BaseShear };

/// Response per sea state. For the deterministic kind level() is the response
/// itself; for the Rayleigh kind it is the most probable maximum, used as the
/// Rayleigh scale.
struct ResponseModel {
  std::string name;
  ResponseKind kind = ResponseKind::Deterministic;
  ResponseForm form = ResponseForm::Resonant;
  /// Resonant: (alpha, beta, tp0). BaseShear: (c1, c2, exponent), m = c1 hs^e (1 + c2 / tp).
  std::array<double, 3> params{1, 0, 1};

  double level(double hs, double tp) const;

  static ResponseModel synthetic(std::string name, SyntheticParams p);
  static ResponseModel base_shear_like(std::string name, double c1 = 0.5, double c2 = 4.0, double exponent = 1.8);
  static ResponseModel heave_like(std::string name, SyntheticParams p);
};

/// Validates parameters; throws Config on violation.
void validate(const ResponseModel& m);

/// Conditional distribution of the maximum response in one sea state.
struct ShortTermDist {
  bool point_mass = true;
  double value = 0;  ///< atom location, or Rayleigh scale

  double cdf(double r) const;
  double pdf(double r) const;  ///< zero for point masses
  double quantile(double p) const;
};

ShortTermDist short_term_dist(const ResponseModel& model, double hs, double tp);

/// CDF of the maximum over independent sea states: product of the CDFs.
double storm_max_cdf(std::span<const ShortTermDist> states, double r);

/// How the sea states of a storm relate to its peak.
enum class StormProfile {
  Rectangular,  ///< all n_states share the peak (hs, tp)
  PeakOnly,     ///< only the peak sea state is evaluated
};

std::string to_string(StormProfile p);
StormProfile parse_storm_profile(const std::string& s);

/// One draw of the storm maximum response for a storm-peak event.
double draw_storm_max(const ResponseModel& model, const StormEvent& e, StormProfile profile, RandomStream& rng);

struct RealisationMax {
  double max_response = 0;  ///< zero when no storm occurred
  double hs = std::numeric_limits<double>::quiet_NaN();
  double tp = std::numeric_limits<double>::quiet_NaN();
};

struct LongTermOptions {
  double years = 100;
  double lambda = 1;
  std::size_t n_realisations = 1000;
  std::uint64_t seed = 1;
  StormProfile profile = StormProfile::Rectangular;
  std::vector<int> storm_sizes;  ///< resampled per storm; empty means single-state storms
  double p_R = kExpMinusOne;
};

struct LongTermEstimate {
  double N = 0;
  double lambda = 0;
  std::vector<RealisationMax> realisations;
  std::vector<double> sorted_max;
  double p_R = kExpMinusOne;
  double q_R = 0;

  double ecdf(double r) const;
  double quantile(double p) const;  ///< type-7 empirical quantile
};

/// Monte Carlo distribution of the N-year maximum response. Realisation r uses
/// environment stream r and response stream r, so results do not depend on threading.
LongTermEstimate long_term_dist(const EnvironmentModel& env, const ResponseModel& response,
                                const LongTermOptions& options);

/// Discrete approximation of the storm-peak response distribution F_R for a
/// deterministic response, by quadrature over the standard-normal image of the
/// environment.
struct StormResponseDistribution {
  std::vector<double> values;   ///< sorted
  std::vector<double> cum;      ///< cumulative probability, ends at 1
  double cdf(double r) const;
};

StormResponseDistribution storm_response_distribution(const Factorization& env, const ResponseModel& response,
                                                      int n_u1 = 2000, int n_u2 = 400, double u_max = 8.5);

/// F_M(r) = exp(-lambda N (1 - F_R(r))).
double long_term_cdf(const StormResponseDistribution& f, double lambda, double years, double r);

enum class ContourMode { Point, Frontier };

std::string to_string(ContourMode m);

struct ContourResponse {
  ContourMode mode = ContourMode::Point;
  double p_C = kExpMinusOne;
  double q_C = 0;
  std::vector<std::size_t> used;  ///< contour point indices
};

/// Short-term distributions at the contour points used by the mode.
std::vector<ShortTermDist> contour_short_terms(const Contour& contour, const ResponseModel& response,
                                               std::span<const std::size_t> used);

/// Point mode: max-hs contour point. Frontier mode: n_frontier equispaced points of
/// the frontier (mask) combined as an equal-weight mixture.
ContourResponse contour_response_point(const Contour& contour, const ResponseModel& response, ContourMode mode,
                                       const std::vector<bool>& frontier, std::size_t n_frontier = 10,
                                       double p_C = kExpMinusOne);

struct NeighbourhoodResponse {
  ContourMode mode = ContourMode::Point;
  double p_C = kExpMinusOne;
  double q_C = 0;
  std::size_t n_samples = 0;      ///< realisations in the neighbourhood
  std::vector<std::size_t> used;  ///< contour point indices
};

/// q_C as the empirical p_C-quantile of simulated N-year maxima whose driving
/// condition lies within `radius` (coordinates divided by `scale`) of the used
/// contour points. Point mode uses the max-hs point, frontier mode every attained
/// frontier point.
NeighbourhoodResponse neighbourhood_response(const Contour& contour, ContourMode mode,
                                             const std::vector<bool>& frontier,
                                             std::span<const RealisationMax> realisations,
                                             std::array<double, 2> scale, double radius,
                                             double p_C = kExpMinusOne);

/// Quantile of an equal-weight mixture of short-term distributions.
double mixture_quantile(std::span<const ShortTermDist> parts, double p);
double mixture_pdf(std::span<const ShortTermDist> parts, double r);

/// Index of the contour point with the largest hs (first on ties).
std::size_t max_hs_point(const Contour& contour);

double inflation_factor(double q_R, double q_C);

struct HeatmapCell {
  std::size_t i = 0, j = 0;
  double hs_lo = 0, hs_hi = 0, tp_lo = 0, tp_hi = 0;
  std::size_t count = 0;
  double mean = 0, min = 0, max = 0;  ///< NaN when count == 0
};

/// Aggregates realisation maxima over a regular (hs, tp) lattice.
std::vector<HeatmapCell> response_heatmap(std::span<const RealisationMax> realisations, std::array<double, 2> hs_range,
                                          std::array<double, 2> tp_range, std::size_t n_hs, std::size_t n_tp);

/// Number of realisations whose driving condition lies strictly inside the contour.
std::size_t count_inside(const Contour& contour, std::span<const RealisationMax> realisations);

}  // namespace metocean
