#include "metocean/response.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/parallel.hpp"

namespace metocean {

double eval_synthetic(const SyntheticParams& p, double hs, double tp) {
  const double d = tp - p.tp0;
  return p.alpha * hs / (1 + p.beta * d * d);
}

double ResponseModel::level(double hs, double tp) const {
  switch (form) {
    case ResponseForm::Resonant: return eval_synthetic({params[0], params[1], params[2]}, hs, tp);
    case ResponseForm::BaseShear: return params[0] * std::pow(std::max(hs, 0.0), params[2]) * (1 + params[1] / tp);
  }
  return 0;
}

ResponseModel ResponseModel::synthetic(std::string name, SyntheticParams p) {
  return {std::move(name), ResponseKind::Deterministic, ResponseForm::Resonant, {p.alpha, p.beta, p.tp0}};
}

ResponseModel ResponseModel::base_shear_like(std::string name, double c1, double c2, double exponent) {
  return {std::move(name), ResponseKind::Rayleigh, ResponseForm::BaseShear, {c1, c2, exponent}};
}

ResponseModel ResponseModel::heave_like(std::string name, SyntheticParams p) {
  return {std::move(name), ResponseKind::Rayleigh, ResponseForm::Resonant, {p.alpha, p.beta, p.tp0}};
}

void validate(const ResponseModel& m) {
  const auto& p = m.params;
  const bool ok = m.form == ResponseForm::Resonant ? (p[0] > 0 && p[1] > 0 && p[2] > 0)
                                                   : (p[0] > 0 && p[1] >= 0 && p[2] > 0);
  if (!ok) throw Error(ErrorKind::Config, "response '" + m.name + "': parameters must be positive");
}

double ShortTermDist::cdf(double r) const {
  if (point_mass) return r >= value ? 1.0 : 0.0;
  if (r <= 0) return 0.0;
  return -std::expm1(-r * r / (2 * value * value));
}

double ShortTermDist::pdf(double r) const {
  if (point_mass || r <= 0) return 0.0;
  return r / (value * value) * std::exp(-r * r / (2 * value * value));
}

double ShortTermDist::quantile(double p) const {
  if (!(p >= 0 && p < 1)) throw Error(ErrorKind::Config, "short-term quantile: p must lie in [0, 1)");
  if (point_mass) return value;
  return value * std::sqrt(-2 * std::log1p(-p));
}

ShortTermDist short_term_dist(const ResponseModel& model, double hs, double tp) {
  const double m = std::max(0.0, model.level(hs, tp));
  if (model.kind == ResponseKind::Deterministic || m == 0) return {true, m};
  return {false, m};
}

double storm_max_cdf(std::span<const ShortTermDist> states, double r) {
  double f = 1;
  for (const auto& s : states) f *= s.cdf(r);
  return f;
}

std::string to_string(StormProfile p) { return p == StormProfile::Rectangular ? "rectangular" : "peak-only"; }

StormProfile parse_storm_profile(const std::string& s) {
  if (s == "rectangular") return StormProfile::Rectangular;
  if (s == "peak-only") return StormProfile::PeakOnly;
  throw Error(ErrorKind::Config, "unknown storm profile '" + s + "'");
}

double draw_storm_max(const ResponseModel& model, const StormEvent& e, StormProfile profile, RandomStream& rng) {
  const auto st = short_term_dist(model, e.hs, e.tp);
  if (st.point_mass) return st.value;
  const int s = profile == StormProfile::Rectangular ? std::max(1, e.n_states) : 1;
  // Inverse of (1 - exp(-r^2 / 2 sigma^2))^s.
  const double u = rng.uniform();
  return st.value * std::sqrt(-2 * std::log(-std::expm1(std::log(u) / s)));
}

double LongTermEstimate::ecdf(double r) const {
  const auto it = std::upper_bound(sorted_max.begin(), sorted_max.end(), r);
  return static_cast<double>(it - sorted_max.begin()) / static_cast<double>(sorted_max.size());
}

double LongTermEstimate::quantile(double p) const {
  if (sorted_max.empty()) throw Error(ErrorKind::Input, "long-term quantile: no realisations");
  const double h = (static_cast<double>(sorted_max.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted_max.size() - 1);
  return sorted_max[lo] + (h - static_cast<double>(lo)) * (sorted_max[hi] - sorted_max[lo]);
}

LongTermEstimate long_term_dist(const EnvironmentModel& env, const ResponseModel& response,
                                const LongTermOptions& options) {
  validate(response);
  if (!(options.years > 0)) throw Error(ErrorKind::Config, "long-term: years must be positive");
  if (options.n_realisations < 1) throw Error(ErrorKind::Config, "long-term: need at least one realisation");
  LongTermEstimate est;
  est.N = options.years;
  est.lambda = options.lambda;
  est.p_R = options.p_R;
  est.realisations.resize(options.n_realisations);
  parallel_for(options.n_realisations, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const auto sim = simulate_environment(env, options.years, options.lambda, options.seed, r, options.storm_sizes);
      RandomStream rng(options.seed ^ 0x5245535030000000ULL, r);
      RealisationMax best;
      for (const auto& e : sim.events) {
        const double v = draw_storm_max(response, e, options.profile, rng);
        if (std::isnan(best.hs) || v > best.max_response) best = {v, e.hs, e.tp};
      }
      est.realisations[r] = best;
    }
  });
  est.sorted_max.reserve(est.realisations.size());
  for (const auto& r : est.realisations) est.sorted_max.push_back(r.max_response);
  std::sort(est.sorted_max.begin(), est.sorted_max.end());
  est.q_R = est.quantile(options.p_R);
  return est;
}

double StormResponseDistribution::cdf(double r) const {
  const auto it = std::upper_bound(values.begin(), values.end(), r);
  if (it == values.begin()) return 0.0;
  return cum[static_cast<std::size_t>(it - values.begin()) - 1];
}

namespace {

// Probabilities of the cells of a symmetric grid on [-u_max, u_max], the end
// cells absorbing the tails, with midpoints.
void normal_cells(int n, double u_max, std::vector<double>& mid, std::vector<double>& w) {
  mid.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  const double step = 2 * u_max / n;
  auto upper = [](double x) { return dist::normal_cdf(-x); };  // tail-precise on both sides
  for (int i = 0; i < n; ++i) {
    const double a = -u_max + i * step, b = a + step;
    mid[static_cast<std::size_t>(i)] = 0.5 * (a + b);
    const double pa = i == 0 ? 1.0 : upper(a);
    const double pb = i == n - 1 ? 0.0 : upper(b);
    w[static_cast<std::size_t>(i)] = pa - pb;
  }
}

}  // namespace

StormResponseDistribution storm_response_distribution(const Factorization& env, const ResponseModel& response,
                                                      int n_u1, int n_u2, double u_max) {
  if (response.kind != ResponseKind::Deterministic) {
    throw Error(ErrorKind::Config, "closed-form long-term distribution needs a deterministic response");
  }
  std::vector<double> m1, w1, m2, w2;
  normal_cells(n_u1, u_max, m1, w1);
  normal_cells(n_u2, u_max, m2, w2);
  std::vector<std::pair<double, double>> vw;
  vw.reserve(static_cast<std::size_t>(n_u1) * static_cast<std::size_t>(n_u2));
  for (std::size_t i = 0; i < m1.size(); ++i) {
    for (std::size_t j = 0; j < m2.size(); ++j) {
      const auto x = env.to_physical(m1[i], m2[j]);
      vw.emplace_back(response.level(x[0], x[1]), w1[i] * w2[j]);
    }
  }
  std::sort(vw.begin(), vw.end());
  StormResponseDistribution f;
  f.values.reserve(vw.size());
  f.cum.reserve(vw.size());
  double total = 0;
  for (const auto& [v, w] : vw) total += w;
  double c = 0;
  for (const auto& [v, w] : vw) {
    c += w / total;
    if (!f.values.empty() && f.values.back() == v) {
      f.cum.back() = c;
    } else {
      f.values.push_back(v);
      f.cum.push_back(c);
    }
  }
  f.cum.back() = 1.0;
  return f;
}

double long_term_cdf(const StormResponseDistribution& f, double lambda, double years, double r) {
  return std::exp(-lambda * years * (1 - f.cdf(r)));
}

std::string to_string(ContourMode m) { return m == ContourMode::Point ? "point" : "frontier"; }

std::size_t max_hs_point(const Contour& contour) {
  std::size_t best = contour.points.size();
  for (std::size_t i = 0; i < contour.points.size(); ++i) {
    if (!contour.points[i].attained) continue;
    if (best == contour.points.size() || contour.points[i].x1 > contour.points[best].x1) best = i;
  }
  if (best == contour.points.size()) throw Error(ErrorKind::Input, "contour has no attained points");
  return best;
}

std::vector<ShortTermDist> contour_short_terms(const Contour& contour, const ResponseModel& response,
                                               std::span<const std::size_t> used) {
  std::vector<ShortTermDist> out;
  out.reserve(used.size());
  for (auto k : used) out.push_back(short_term_dist(response, contour.points[k].x1, contour.points[k].x2));
  return out;
}

double mixture_pdf(std::span<const ShortTermDist> parts, double r) {
  double s = 0;
  for (const auto& p : parts) s += p.pdf(r);
  return s / static_cast<double>(parts.size());
}

double mixture_quantile(std::span<const ShortTermDist> parts, double p) {
  if (parts.empty()) throw Error(ErrorKind::Input, "mixture quantile: no components");
  auto cdf = [&](double r) {
    double s = 0;
    for (const auto& q : parts) s += q.cdf(r);
    return s / static_cast<double>(parts.size());
  };
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& q : parts) {
    lo = std::min(lo, q.quantile(p));
    hi = std::max(hi, q.quantile(p));
  }
  if (cdf(lo) >= p) return lo;
  // Smallest r with F(r) >= p; F is right-continuous.
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) >= p ? hi : lo) = mid;
  }
  return hi;
}

ContourResponse contour_response_point(const Contour& contour, const ResponseModel& response, ContourMode mode,
                                       const std::vector<bool>& frontier, std::size_t n_frontier, double p_C) {
  ContourResponse out;
  out.mode = mode;
  out.p_C = p_C;
  if (mode == ContourMode::Point) {
    out.used = {max_hs_point(contour)};
  } else {
    if (frontier.size() != contour.points.size()) throw Error(ErrorKind::Input, "frontier mask size mismatch");
    std::vector<std::size_t> f;
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (frontier[k] && contour.points[k].attained) f.push_back(k);
    }
    if (f.empty()) {
      throw Error(ErrorKind::Config, "contour frontier is empty; widen the frontier radius");
    }
    // Anchor the equispaced selection at the largest-hs frontier point.
    const auto top = std::max_element(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
      return contour.points[a].x1 < contour.points[b].x1;
    });
    std::rotate(f.begin(), top, f.end());
    const std::size_t n = std::max<std::size_t>(1, std::min(n_frontier, f.size()));
    for (std::size_t j = 0; j < n; ++j) out.used.push_back(f[j * f.size() / n]);
  }
  const auto parts = contour_short_terms(contour, response, out.used);
  out.q_C = mixture_quantile(parts, p_C);
  return out;
}

NeighbourhoodResponse neighbourhood_response(const Contour& contour, ContourMode mode,
                                             const std::vector<bool>& frontier,
                                             std::span<const RealisationMax> realisations,
                                             std::array<double, 2> scale, double radius, double p_C) {
  if (!(radius > 0) || !(scale[0] > 0) || !(scale[1] > 0)) {
    throw Error(ErrorKind::Config, "neighbourhood: radius and scales must be positive");
  }
  if (!(p_C >= 0 && p_C <= 1)) throw Error(ErrorKind::Config, "neighbourhood: p_C must lie in [0, 1]");
  NeighbourhoodResponse out;
  out.mode = mode;
  out.p_C = p_C;
  if (mode == ContourMode::Point) {
    out.used = {max_hs_point(contour)};
  } else {
    if (frontier.size() != contour.points.size()) throw Error(ErrorKind::Input, "frontier mask size mismatch");
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (frontier[k] && contour.points[k].attained) out.used.push_back(k);
    }
    if (out.used.empty()) throw Error(ErrorKind::Config, "contour frontier is empty; widen the frontier radius");
  }
  const double r2 = radius * radius;
  std::vector<double> sample;
  for (const auto& m : realisations) {
    if (!std::isfinite(m.hs) || !std::isfinite(m.tp)) continue;
    for (std::size_t k : out.used) {
      const double a = (m.hs - contour.points[k].x1) / scale[0];
      const double b = (m.tp - contour.points[k].x2) / scale[1];
      if (a * a + b * b < r2) {
        sample.push_back(m.max_response);
        break;
      }
    }
  }
  if (sample.empty()) {
    throw Error(ErrorKind::Input, "no realisations near the contour; widen the neighbourhood radius");
  }
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1) * p_C;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  out.q_C = sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
  out.n_samples = sample.size();
  return out;
}

double inflation_factor(double q_R, double q_C) {
  if (!(q_C > 0)) throw Error(ErrorKind::Input, "inflation factor undefined for non-positive q_C");
  return q_R / q_C;
}

std::vector<HeatmapCell> response_heatmap(std::span<const RealisationMax> realisations, std::array<double, 2> hs_range,
                                          std::array<double, 2> tp_range, std::size_t n_hs, std::size_t n_tp) {
  if (realisations.empty()) throw Error(ErrorKind::Input, "heatmap: no realisations");
  if (n_hs == 0 || n_tp == 0 || !(hs_range[1] > hs_range[0]) || !(tp_range[1] > tp_range[0])) {
    throw Error(ErrorKind::Config, "heatmap: invalid lattice");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double dh = (hs_range[1] - hs_range[0]) / static_cast<double>(n_hs);
  const double dt = (tp_range[1] - tp_range[0]) / static_cast<double>(n_tp);
  std::vector<HeatmapCell> cells(n_hs * n_tp);
  for (std::size_t i = 0; i < n_hs; ++i) {
    for (std::size_t j = 0; j < n_tp; ++j) {
      auto& c = cells[i * n_tp + j];
      c.i = i;
      c.j = j;
      c.hs_lo = hs_range[0] + static_cast<double>(i) * dh;
      c.hs_hi = c.hs_lo + dh;
      c.tp_lo = tp_range[0] + static_cast<double>(j) * dt;
      c.tp_hi = c.tp_lo + dt;
      c.mean = c.min = c.max = nan;
    }
  }
  for (const auto& r : realisations) {
    if (std::isnan(r.hs)) continue;
    const double fi = (r.hs - hs_range[0]) / dh, fj = (r.tp - tp_range[0]) / dt;
    if (fi < 0 || fj < 0) continue;
    const auto i = static_cast<std::size_t>(fi), j = static_cast<std::size_t>(fj);
    if (i >= n_hs || j >= n_tp) continue;
    auto& c = cells[i * n_tp + j];
    if (c.count == 0) {
      c.mean = 0;
      c.min = c.max = r.max_response;
    }
    ++c.count;
    c.mean += (r.max_response - c.mean) / static_cast<double>(c.count);
    c.min = std::min(c.min, r.max_response);
    c.max = std::max(c.max, r.max_response);
  }
  return cells;
}

std::size_t count_inside(const Contour& contour, std::span<const RealisationMax> realisations) {
  std::vector<std::array<double, 2>> pts;
  for (const auto& r : realisations) {
    if (!std::isnan(r.hs)) pts.push_back({r.hs, r.tp});
  }
  if (pts.empty()) return 0;
  Points2 p(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    p(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    p(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  return static_cast<std::size_t>(std::llround(enclosed_fraction(contour, p) * static_cast<double>(pts.size())));
}

}  // namespace metocean
