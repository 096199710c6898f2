#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace metocean {

/// Conditional extremes model for one conditioned variable given the
/// conditioning variable q, both on standard Laplace scale:
///   z_other = alpha_k * z_q + z_q^beta * W,  z_q > psi_L.
struct CEModel {
  int q = 0;                       ///< conditioning variable index (0 = hs, 1 = tp)
  double kappa = 0.9;              ///< conditioning non-exceedance probability
  double psi_L = 0;                ///< Laplace threshold at kappa
  std::vector<double> alpha;       ///< per covariate bin, in [0, 1]
  double beta = 0;                 ///< shared over bins, <= 1
  double mu = 0;                   ///< working-likelihood residual mean
  double zeta = 1;                 ///< working-likelihood residual variance
  double penalty = 0;              ///< selected roughness weight on alpha
  std::vector<double> residuals;   ///< empirical W, stored sorted
  std::vector<std::string> warnings;

  std::size_t n_bins() const { return alpha.size(); }
};

struct CeOptions {
  double kappa = 0.9;
  std::size_t min_exceedances = 20;  ///< per bin
  std::vector<double> penalty_grid = {0.0, 1.0, 10.0, 100.0, 1e3,
                                      std::numeric_limits<double>::infinity()};
  int cv_folds = 10;
  std::uint64_t seed = 0;
  double beta_lo = -2.0;             ///< practical lower bound; the model allows beta -> -inf
  double tie_tolerance = 0.1;
};

struct CeDiagnostics {
  std::vector<double> penalty_grid;
  std::vector<double> cv_score;
  std::size_t selected = 0;
  double neg_log_likelihood = 0;
  std::size_t n_exceedances = 0;
};

/// Fit z_other | z_cond > psi_L. Inputs are aligned Laplace-scale samples with
/// 0-based bin labels (empty labels mean a single bin).
CEModel fit_ce(std::span<const double> z_cond, std::span<const double> z_other,
               std::span<const std::size_t> bins, std::size_t n_bins, int q,
               const CeOptions& options = {}, CeDiagnostics* diagnostics = nullptr);

/// Profile negative log-likelihood at fixed (alpha per bin, beta); mu and zeta
/// are profiled out. Exposed for tests.
double ce_profile_nll(std::span<const double> z_cond, std::span<const double> z_other,
                      std::span<const std::size_t> bins, std::span<const double> alpha, double beta);

/// Conditioned values given conditioning values above psi_L. W is drawn
/// uniformly with replacement from the stored residuals using stream (seed, 0).
std::vector<double> simulate_ce(const CEModel& model, std::span<const double> z_cond,
                                std::span<const std::size_t> bins, std::uint64_t seed);

/// Single draw with a caller-supplied residual.
inline double ce_apply(const CEModel& model, double z_cond, std::size_t bin, double w) {
  return model.alpha[bin] * z_cond + std::pow(z_cond, model.beta) * w;
}

}  // namespace metocean
