#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metocean/dependence.hpp"
#include "metocean/ingest.hpp"
#include "metocean/marginal.hpp"
#include "metocean/random.hpp"

namespace metocean {

/// One simulated storm-peak event.
struct StormEvent {
  double hs = 0;
  double tp = 0;
  std::size_t bin = 0;
  int n_states = 1;
};

/// Map between standard-normal U-space and the physical (hs, tp) plane.
class Factorization {
 public:
  virtual ~Factorization() = default;
  virtual std::array<double, 2> to_physical(double u1, double u2) const = 0;
  virtual std::array<double, 2> to_standard(double x1, double x2) const = 0;
};

/// x = u; used for standard bivariate normal environments.
class IdentityFactorization final : public Factorization {
 public:
  std::array<double, 2> to_physical(double u1, double u2) const override { return {u1, u2}; }
  std::array<double, 2> to_standard(double x1, double x2) const override { return {x1, x2}; }
};

/// Anything able to draw independent storm-peak events.
class EnvironmentModel {
 public:
  virtual ~EnvironmentModel() = default;
  virtual StormEvent draw(RandomStream& rng) const = 0;
  virtual std::string kind() const = 0;
};

/// Weibull hs with log-normal tp | hs:
///   ln tp ~ N(mu(h), v(h)),  mu(h) = a1 + a2 h^a3,  v(h) = b1 + b2 exp(-b3 h).
struct HierarchicalModel final : EnvironmentModel, Factorization {
  double shape = 1.5;
  double scale = 3.0;
  std::array<double, 3> a{1.0, 0.5, 0.6};
  std::array<double, 3> b{0.01, 0.04, 0.5};

  double log_tp_mean(double h) const;
  double log_tp_var(double h) const;
  double tp_cdf(double t, double h) const;
  double tp_quantile(double p, double h) const;
  double log_density(double h, double t) const;

  StormEvent draw(RandomStream& rng) const override;
  std::string kind() const override { return "hierarchical"; }
  std::array<double, 2> to_physical(double u1, double u2) const override;
  std::array<double, 2> to_standard(double x1, double x2) const override;
};

struct HierarchicalOptions {
  std::size_t min_peaks = 100;
  std::size_t moment_bins = 20;
};

/// Weibull by maximum likelihood; (a, b) by least squares on binned moments of
/// ln tp, then joint maximum-likelihood refinement.
HierarchicalModel fit_hierarchical(std::span<const double> hs, std::span<const double> tp,
                                   const HierarchicalOptions& options = {});

/// Two-parameter Weibull maximum-likelihood fit; returns {shape, scale}.
std::array<double, 2> fit_weibull(std::span<const double> x);

/// PPC marginals for hs and tp, CE fits in both conditioning directions, and
/// the empirical Laplace-scale body for non-extreme events.
struct JointExtremesModel final : EnvironmentModel {
  MarginalModel hs;
  MarginalModel tp;
  CEModel tp_given_hs;                       ///< q = 0
  CEModel hs_given_tp;                       ///< q = 1
  std::vector<std::array<double, 2>> body;   ///< Laplace pairs with both values <= psi_L
  std::vector<std::size_t> body_bin;
  double p_extreme = 0;                      ///< fraction of events with max(z) > psi_L

  /// Event on the Laplace scale. Extremes: choose the conditioning variable
  /// uniformly, draw its exceedance, apply its CE model and accept only if the
  /// conditioning variable is the larger.
  std::array<double, 2> draw_laplace(RandomStream& rng, std::size_t& bin) const;
  StormEvent draw(RandomStream& rng) const override;
  std::string kind() const override { return "ppc-ce"; }
};

struct JointOptions {
  PpcOptions hs;
  PpcOptions tp;
  CeOptions ce;
};

JointExtremesModel fit_joint_extremes(std::span<const double> hs, std::span<const double> tp,
                                      const CovariateBinning& bins, const JointOptions& options = {});

/// A simulated record of storms over a fixed duration.
struct EnvRealisation {
  double years = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<StormEvent> events;
};

/// Poisson(lambda * years) storms drawn from the model on stream (seed, stream).
/// Storm sizes are resampled from storm_sizes (all 1 if empty).
EnvRealisation simulate_environment(const EnvironmentModel& model, double years, double lambda,
                                    std::uint64_t seed, std::uint64_t stream = 0,
                                    std::span<const int> storm_sizes = {});

/// n independent events; convenient for contour estimation.
std::vector<StormEvent> simulate_events(const EnvironmentModel& model, std::size_t n, std::uint64_t seed,
                                        std::uint64_t stream = 0);

}  // namespace metocean
