#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metocean/ingest.hpp"

namespace metocean {

/// Parameters of a synthetic sea-state record. hs has Weibull margins driven by a
/// seasonal Gaussian AR(1) score; ln tp | hs ~ N(a1 + a2 hs^a3, b1 + b2 exp(-b3 hs))
/// with its own AR(1) noise. Direction is a wrapped normal about a prevailing
/// heading.
struct SyntheticOptions {
  double years = 30;
  double cadence_hours = 3;
  std::uint64_t seed = 1;
  double hs_shape = 1.35;
  double hs_scale = 2.3;
  double hs_rho = 0.97;        ///< lag-one correlation of the hs score
  double seasonal_amplitude = 0.35;
  double tp_a1 = 1.5, tp_a2 = 0.45, tp_a3 = 0.5;
  double tp_b1 = 0.005, tp_b2 = 0.04, tp_b3 = 0.4;
  double tp_rho = 0.8;
  double dir_mean = 270;
  double dir_sd = 50;
  double start_epoch = 631152000;  ///< 1990-01-01T00:00:00Z
};

std::vector<SeaStateRecord> synthetic_sea_states(const SyntheticOptions& options);

/// `time,hs,tp,dir` with epoch-second times.
std::string sea_states_csv(const std::vector<SeaStateRecord>& records);

}  // namespace metocean
