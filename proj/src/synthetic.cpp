#include "metocean/synthetic.hpp"

#include <cmath>

#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/random.hpp"
#include "metocean/serialize.hpp"

namespace metocean {

std::vector<SeaStateRecord> synthetic_sea_states(const SyntheticOptions& o) {
  if (!(o.years > 0) || !(o.cadence_hours > 0)) throw Error(ErrorKind::Config, "synthetic: years and cadence must be positive");
  if (!(std::abs(o.hs_rho) < 1) || !(std::abs(o.tp_rho) < 1)) throw Error(ErrorKind::Config, "synthetic: |rho| must be < 1");
  const auto n = static_cast<std::size_t>(o.years * 365.25 * 24 / o.cadence_hours);
  RandomStream rng(o.seed, 0x53594e54);
  std::vector<SeaStateRecord> out(n);
  const double s_hs = std::sqrt(1 - o.hs_rho * o.hs_rho), s_tp = std::sqrt(1 - o.tp_rho * o.tp_rho);
  const double season_scale = 1 / std::sqrt(1 + 0.5 * o.seasonal_amplitude * o.seasonal_amplitude);
  double z = rng.normal(), e = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    const double hours = static_cast<double>(i) * o.cadence_hours;
    z = o.hs_rho * z + s_hs * rng.normal();
    e = o.tp_rho * e + s_tp * rng.normal();
    // Winter peak at the start of the year; unit marginal variance overall.
    const double season = o.seasonal_amplitude * std::cos(2 * M_PI * hours / (365.25 * 24));
    const double score = (z + season) * season_scale;
    const double hs = o.hs_scale * std::pow(-std::log(dist::normal_cdf(-score)), 1 / o.hs_shape);
    const double mu = o.tp_a1 + o.tp_a2 * std::pow(hs, o.tp_a3);
    const double v = o.tp_b1 + o.tp_b2 * std::exp(-o.tp_b3 * hs);
    const double tp = std::exp(mu + std::sqrt(v) * e);
    double dir = std::fmod(o.dir_mean + o.dir_sd * rng.normal(), 360.0);
    if (dir < 0) dir += 360;
    out[i] = {o.start_epoch + hours * 3600, hs, tp, dir};
  }
  return out;
}

std::string sea_states_csv(const std::vector<SeaStateRecord>& records) {
  std::string s = "time,hs,tp,dir\n";
  s.reserve(records.size() * 48);
  for (const auto& r : records) {
    s += format_double(r.time) + ',' + format_double(r.hs) + ',' + format_double(r.tp) + ',' +
         (r.covariate ? format_double(*r.covariate) : std::string("nan")) + '\n';
  }
  return s;
}

}  // namespace metocean
