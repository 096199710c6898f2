#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "metocean/environment.hpp"
#include "metocean/kde.hpp"

namespace metocean {

enum class ContourMethod { DirectSampling, JointExceedance, Isodensity, Iform };

std::string to_string(ContourMethod m);
/// Accepts "direct-sampling", "joint-exceedance", "isodensity", "iform".
ContourMethod parse_contour_method(const std::string& name);

struct ContourPoint {
  double theta = 0;
  double x1 = 0;
  double x2 = 0;
  bool attained = true;
};

struct Contour {
  ContourMethod method = ContourMethod::DirectSampling;
  double T = 0;
  double alpha = 0;        ///< exceedance probability, or 1 - content for isodensity
  std::vector<ContourPoint> points;               ///< primary loop, ordered in theta
  std::vector<std::vector<ContourPoint>> extra;   ///< further isodensity loops
  std::array<double, 2> reference{0, 0};          ///< r* (joint exceedance), loop centre otherwise
  double enclosed_p = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> support;                    ///< raw C(theta) for direct sampling
  double level = 0;                               ///< density threshold (isodensity), radius (IFORM)
  std::vector<std::string> warnings;
};

/// Stack storm events into an n x 2 (hs, tp) matrix.
Points2 to_points(const std::vector<StormEvent>& events);

/// Exceedance probability per event for a T-year contour at storm rate lambda.
inline double event_alpha(double T, double lambda) { return 1.0 / (lambda * T); }

struct DirectSamplingOptions {
  int n_theta = 360;
  int smoothing_window = 5;  ///< moving average over C(theta); 1 disables
};

/// Support-function contour from empirical (1 - alpha) quantiles of projections.
Contour direct_sampling_contour(const Points2& sample, double alpha, const DirectSamplingOptions& options = {});

struct JointExceedanceOptions {
  int n_theta = 360;
  int smoothing_window = 1;
  std::size_t min_positive = 1;  ///< fewer than this many events beyond r* along a ray -> unattained
};

/// Points along rays from r* at which the empirical joint exceedance probability
/// of the ray's quadrant equals alpha.
Contour joint_exceedance_contour(const Points2& sample, double alpha, std::array<double, 2> r_star,
                                 const JointExceedanceOptions& options = {});

/// Empirical probability of the quadrant anchored at x, oriented by theta.
double quadrant_probability(const Points2& sample, double theta, double x1, double x2);

struct IsodensityOptions {
  KdeOptions kde;
};

/// Highest-density-region contour from a kernel density estimate of the sample.
Contour isodensity_contour(const Points2& sample, double level_p, const IsodensityOptions& options = {});
/// Same, from a density already evaluated on a grid.
Contour isodensity_contour(const DensityGrid& grid, double level_p);

/// IFORM radius for T years with n sea states (or events) per year.
double iform_radius(double T, double n_per_year);
/// Circle of radius beta in U-space mapped through the Rosenblatt inverse.
Contour iform_contour(const Factorization& model, double T, double n_per_year, int n_theta = 360);
Contour iform_contour_radius(const Factorization& model, double beta, int n_theta = 360);

/// Fraction of sample points inside the contour (even-odd rule over all loops).
double enclosed_fraction(const Contour& contour, const Points2& sample);

struct CalibrationOptions {
  double alpha_lo = 1e-7;
  double alpha_hi = 0.5;
  double tol = 1e-3;
  int max_iter = 60;
  double noise = 0;  ///< tolerated non-monotonicity of content estimates
};

struct CalibrationResult {
  double alpha = 0;
  double content = 0;
  int iterations = 0;
  bool at_bound = false;
  Contour contour;
};

/// Bisection on log(alpha) until the estimated content is within tol of target_p.
CalibrationResult calibrate_enclosed_probability(const std::function<Contour(double)>& builder,
                                                 const std::function<double(const Contour&)>& content,
                                                 double target_p, const CalibrationOptions& options = {});

struct FailureEstimate {
  double p = 0;
  double standard_error = 0;
  std::size_t n = 0;
};

/// p_F = Pr(g(X) < 0) by Monte Carlo over draws(rng).
FailureEstimate failure_probability_mc(const std::function<double(double, double)>& g,
                                       const std::function<std::array<double, 2>(RandomStream&)>& draw,
                                       std::size_t n, std::uint64_t seed);

/// Index of the contour point with the largest response; ties go to the first point.
std::size_t find_governing_point(const Contour& contour, const std::function<double(double, double)>& response);

/// Contour points whose nearest reference point lies within radius after
/// per-axis standardisation by the reference standard deviations.
std::vector<bool> frontier_mask(const Contour& contour, const Points2& reference, double radius = 0.5);

/// Convexity of a closed polygon: all turns share one orientation.
bool is_convex(const std::vector<ContourPoint>& points, double tol = 1e-9);

}  // namespace metocean
