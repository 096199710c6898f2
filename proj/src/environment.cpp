#include "metocean/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/optimize.hpp"

namespace metocean {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weibull_survival_quantile(double s, double shape, double scale) {
  return scale * std::pow(-std::log(s), 1.0 / shape);
}

std::size_t draw_bin(const std::vector<double>& weights, RandomStream& rng) {
  if (weights.size() <= 1) return 0;
  double u = rng.uniform();
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return weights.size() - 1;
}

struct MomentBin {
  double h = 0, mean = 0, var = 0;
  double n = 0;
};

std::vector<MomentBin> binned_moments(std::span<const double> hs, std::span<const double> log_tp,
                                      std::size_t n_bins) {
  std::vector<std::size_t> order(hs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return hs[a] < hs[b]; });
  std::vector<MomentBin> out;
  const std::size_t n = hs.size();
  for (std::size_t j = 0; j < n_bins; ++j) {
    const std::size_t lo = j * n / n_bins, hi = (j + 1) * n / n_bins;
    if (hi - lo < 3) continue;
    MomentBin m;
    m.n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      m.h += hs[order[i]];
      m.mean += log_tp[order[i]];
    }
    m.h /= m.n;
    m.mean /= m.n;
    for (std::size_t i = lo; i < hi; ++i) m.var += std::pow(log_tp[order[i]] - m.mean, 2);
    m.var /= m.n - 1;
    out.push_back(m);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- hierarchical

double HierarchicalModel::log_tp_mean(double h) const { return a[0] + a[1] * std::pow(h, a[2]); }

double HierarchicalModel::log_tp_var(double h) const { return b[0] + b[1] * std::exp(-b[2] * h); }

double HierarchicalModel::tp_cdf(double t, double h) const {
  if (t <= 0) return 0.0;
  return dist::normal_cdf((std::log(t) - log_tp_mean(h)) / std::sqrt(log_tp_var(h)));
}

double HierarchicalModel::tp_quantile(double p, double h) const {
  return std::exp(log_tp_mean(h) + std::sqrt(log_tp_var(h)) * dist::normal_quantile(p));
}

double HierarchicalModel::log_density(double h, double t) const {
  if (h <= 0 || t <= 0) return -kInf;
  const double v = log_tp_var(h);
  const double r = std::log(t) - log_tp_mean(h);
  return dist::weibull_log_pdf(h, shape, scale) - std::log(t) - 0.5 * std::log(2 * M_PI * v) - r * r / (2 * v);
}

StormEvent HierarchicalModel::draw(RandomStream& rng) const {
  StormEvent e;
  e.hs = weibull_survival_quantile(rng.uniform(), shape, scale);
  e.tp = std::exp(log_tp_mean(e.hs) + std::sqrt(log_tp_var(e.hs)) * rng.normal());
  return e;
}

std::array<double, 2> HierarchicalModel::to_physical(double u1, double u2) const {
  // Work from whichever tail keeps precision.
  double h;
  if (u1 > 0) {
    h = weibull_survival_quantile(dist::normal_cdf(-u1), shape, scale);
  } else {
    h = scale * std::pow(-std::log1p(-dist::normal_cdf(u1)), 1.0 / shape);
  }
  const double t = std::exp(log_tp_mean(h) + std::sqrt(log_tp_var(h)) * u2);
  return {h, t};
}

std::array<double, 2> HierarchicalModel::to_standard(double x1, double x2) const {
  const double c = std::pow(x1 / scale, shape);  // cumulative hazard
  const double s = std::exp(-c);
  const double u1 = s < 0.5 ? dist::normal_upper_quantile(s) : dist::normal_quantile(-std::expm1(-c));
  const double u2 = (std::log(x2) - log_tp_mean(x1)) / std::sqrt(log_tp_var(x1));
  return {u1, u2};
}

std::array<double, 2> fit_weibull(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::Fit, "Weibull fit: need at least two observations");
  const double xmax = *std::max_element(x.begin(), x.end());
  double mean_log = 0;
  std::vector<double> lx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0)) throw Error(ErrorKind::Fit, "Weibull fit: observations must be positive");
    lx[i] = std::log(x[i] / xmax);
    mean_log += lx[i];
  }
  mean_log /= static_cast<double>(x.size());
  // Shape solves sum(y^k ln y)/sum(y^k) - 1/k - mean(ln y) = 0 (scale-free in y = x/xmax).
  auto score = [&](double k) {
    double s0 = 0, s1 = 0;
    for (double l : lx) {
      const double w = std::exp(k * l);
      s0 += w;
      s1 += w * l;
    }
    return s1 / s0 - 1.0 / k - mean_log;
  };
  double lo = 0.05, hi = 1.0;
  while (score(hi) < 0 && hi < 1e3) hi *= 2;
  while (score(lo) > 0 && lo > 1e-4) lo /= 2;
  if (score(lo) > 0 || score(hi) < 0) throw Error(ErrorKind::Fit, "Weibull fit: shape not bracketed");
  const double k = optim::brent_root(score, lo, hi, 1e-12);
  double s0 = 0;
  for (double l : lx) s0 += std::exp(k * l);
  const double scale = xmax * std::pow(s0 / static_cast<double>(x.size()), 1.0 / k);
  return {k, scale};
}

HierarchicalModel fit_hierarchical(std::span<const double> hs, std::span<const double> tp,
                                   const HierarchicalOptions& options) {
  if (hs.size() != tp.size()) throw Error(ErrorKind::Input, "hierarchical fit: hs and tp lengths differ");
  if (hs.size() < options.min_peaks) {
    throw Error(ErrorKind::Fit, "hierarchical fit: " + std::to_string(hs.size()) + " peaks, fewer than " +
                                    std::to_string(options.min_peaks));
  }
  HierarchicalModel m;
  const auto wb = fit_weibull(hs);
  m.shape = wb[0];
  m.scale = wb[1];

  std::vector<double> lt(tp.size());
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (!(tp[i] > 0)) throw Error(ErrorKind::Fit, "hierarchical fit: tp must be positive");
    lt[i] = std::log(tp[i]);
  }
  const double lt_mean = std::accumulate(lt.begin(), lt.end(), 0.0) / static_cast<double>(lt.size());
  double lt_var = 0;
  for (double v : lt) lt_var += (v - lt_mean) * (v - lt_mean);
  lt_var /= static_cast<double>(lt.size());
  if (lt_var < 1e-12) throw Error(ErrorKind::Degenerate, "hierarchical fit: ln tp has zero variance");

  const double h_lo = *std::min_element(hs.begin(), hs.end());
  const double h_hi = *std::max_element(hs.begin(), hs.end());
  const double h_ref = std::max(h_hi, 1e-9);

  // Stage 1: least squares on binned moments. h is scaled by h_ref inside the
  // optimisation so that parameters share a common magnitude.
  const auto bins = binned_moments(hs, lt, options.moment_bins);
  auto mean_sse = [&](const Eigen::VectorXd& p) {
    if (p(2) <= 0 || p(2) > 5) return kInf;
    double s = 0;
    for (const auto& bm : bins) s += bm.n * std::pow(bm.mean - (p(0) + p(1) * std::pow(bm.h / h_ref, p(2))), 2);
    return s;
  };
  double best_mean_val = kInf;
  Eigen::VectorXd pa(3);
  for (double a3 : {0.3, 0.6, 1.0, 2.0}) {
    // Linear least squares in (a1, a2) at fixed a3 for a starting point.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, sw = 0;
    for (const auto& bm : bins) {
      const double x = std::pow(bm.h / h_ref, a3);
      sw += bm.n;
      sx += bm.n * x;
      sy += bm.n * bm.mean;
      sxx += bm.n * x * x;
      sxy += bm.n * x * bm.mean;
    }
    const double det = sw * sxx - sx * sx;
    const double a2 = det != 0 ? (sw * sxy - sx * sy) / det : 0.0;
    const double a1 = (sy - a2 * sx) / sw;
    Eigen::VectorXd x0(3);
    x0 << a1, a2, a3;
    Eigen::VectorXd step(3);
    step << 0.1, 0.1, 0.1;
    const auto r = optim::nelder_mead(mean_sse, x0, step);
    if (r.value < best_mean_val) {
      best_mean_val = r.value;
      pa = r.x;
    }
  }

  auto var_sse = [&](const Eigen::VectorXd& p) {
    if (p(2) < 0 || p(2) > 100) return kInf;
    double s = 0;
    for (const auto& bm : bins) {
      const double v = p(0) + p(1) * std::exp(-p(2) * bm.h / h_ref);
      s += bm.n * std::pow(bm.var - v, 2);
    }
    return s;
  };
  double vmin = kInf, vmax = 0;
  for (const auto& bm : bins) {
    vmin = std::min(vmin, bm.var);
    vmax = std::max(vmax, bm.var);
  }
  Eigen::VectorXd pb(3);
  double best_var_val = kInf;
  for (double b3 : {0.5, 2.0, 5.0}) {
    Eigen::VectorXd x0(3);
    x0 << vmin, vmax - vmin, b3;
    Eigen::VectorXd step(3);
    step << 0.2 * std::max(vmin, 1e-6), 0.2 * std::max(vmax - vmin, 1e-6), 0.5;
    const auto r = optim::nelder_mead(var_sse, x0, step);
    if (r.value < best_var_val) {
      best_var_val = r.value;
      pb = r.x;
    }
  }

  // Stage 2: joint maximum likelihood of ln tp | h.
  auto v_at = [&](const Eigen::VectorXd& p, double hn) { return p(3) + p(4) * std::exp(-p(5) * hn); };
  auto nll = [&](const Eigen::VectorXd& p) {
    if (p(2) <= 0 || p(2) > 5 || p(5) < 0 || p(5) > 100) return kInf;
    if (v_at(p, h_lo / h_ref) <= 0 || v_at(p, 1.0) <= 0) return kInf;  // v is monotone in h
    double s = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double hn = hs[i] / h_ref;
      const double v = v_at(p, hn);
      const double r = lt[i] - (p(0) + p(1) * std::pow(hn, p(2)));
      s += 0.5 * std::log(v) + r * r / (2 * v);
    }
    return s;
  };
  Eigen::VectorXd p(6);
  p << pa(0), pa(1), pa(2), pb(0), pb(1), pb(2);
  if (!std::isfinite(nll(p))) {
    p(3) = std::max(vmin, 1e-6);
    p(4) = 0;
  }
  if (!std::isfinite(nll(p))) throw Error(ErrorKind::Fit, "hierarchical fit: no feasible starting point");
  optim::NelderMeadOptions nm;
  nm.max_iter = 20000;
  nm.f_tol = 1e-12;
  for (int restart = 0; restart < 3; ++restart) {
    Eigen::VectorXd step(6);
    step << 0.05, 0.05 + 0.1 * std::abs(p(1)), 0.1, 0.2 * std::abs(p(3)) + 1e-4, 0.2 * std::abs(p(4)) + 1e-4, 0.3;
    p = optim::nelder_mead(nll, p, step, nm).x;
  }

  // Back to unscaled h: a2 h_n^a3 = (a2 / h_ref^a3) h^a3 and exp(-b3 h / h_ref).
  m.a = {p(0), p(1) / std::pow(h_ref, p(2)), p(2)};
  m.b = {p(3), p(4), p(5) / h_ref};
  const double v_lo = m.log_tp_var(h_lo), v_hi = m.log_tp_var(h_hi);
  if (!(std::min(v_lo, v_hi) > 1e-10)) {
    throw Error(ErrorKind::Fit, "hierarchical fit: conditional variance of ln tp is not positive over the data");
  }
  return m;
}

// ---------------------------------------------------------------- PPC + CE

std::array<double, 2> JointExtremesModel::draw_laplace(RandomStream& rng, std::size_t& bin) const {
  if (!body.empty() && rng.uniform() >= p_extreme) {
    const std::size_t i = rng.index(body.size());
    bin = body_bin[i];
    return body[i];
  }
  bin = draw_bin(hs.bin_weight, rng);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int q = rng.uniform() < 0.5 ? 0 : 1;
    const CEModel& ce = q == 0 ? tp_given_hs : hs_given_tp;
    const double zq = ce.psi_L + rng.exponential();
    const double zo = ce_apply(ce, zq, bin, ce.residuals[rng.index(ce.residuals.size())]);
    if (zq >= zo) return q == 0 ? std::array<double, 2>{zq, zo} : std::array<double, 2>{zo, zq};
  }
  throw Error(ErrorKind::Simulation, "joint simulation: rejection sampler did not accept");
}

StormEvent JointExtremesModel::draw(RandomStream& rng) const {
  StormEvent e;
  const auto z = draw_laplace(rng, e.bin);
  e.hs = from_laplace(hs, z[0], e.bin);
  e.tp = from_laplace(tp, z[1], e.bin);
  return e;
}

JointExtremesModel fit_joint_extremes(std::span<const double> hs, std::span<const double> tp,
                                      const CovariateBinning& bins, const JointOptions& options) {
  if (hs.size() != tp.size()) throw Error(ErrorKind::Input, "joint fit: hs and tp lengths differ");
  JointExtremesModel m;
  m.hs = fit_gp_ppc(split_by_bin(hs, bins), options.hs);
  m.hs.variable = "hs";
  m.tp = fit_gp_ppc(split_by_bin(tp, bins), options.tp);
  m.tp.variable = "tp";
  const auto zh = to_laplace(m.hs, hs, bins.allocation);
  const auto zt = to_laplace(m.tp, tp, bins.allocation);
  m.tp_given_hs = fit_ce(zh, zt, bins.allocation, bins.n_bins, 0, options.ce);
  m.hs_given_tp = fit_ce(zt, zh, bins.allocation, bins.n_bins, 1, options.ce);
  const double u = m.tp_given_hs.psi_L;
  for (std::size_t i = 0; i < zh.size(); ++i) {
    if (std::max(zh[i], zt[i]) <= u) {
      m.body.push_back({zh[i], zt[i]});
      m.body_bin.push_back(bins.allocation[i]);
    }
  }
  m.p_extreme = 1.0 - static_cast<double>(m.body.size()) / static_cast<double>(zh.size());
  return m;
}

// ---------------------------------------------------------------- simulation

EnvRealisation simulate_environment(const EnvironmentModel& model, double years, double lambda,
                                    std::uint64_t seed, std::uint64_t stream, std::span<const int> storm_sizes) {
  if (!(years > 0) || !(lambda > 0)) throw Error(ErrorKind::Config, "simulation: years and lambda must be positive");
  RandomStream rng(seed, stream);
  EnvRealisation r;
  r.years = years;
  r.seed = seed;
  r.stream = stream;
  const auto n = rng.poisson(lambda * years);
  r.events.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    StormEvent e = model.draw(rng);
    e.n_states = storm_sizes.empty() ? 1 : storm_sizes[rng.index(storm_sizes.size())];
    r.events.push_back(e);
  }
  return r;
}

std::vector<StormEvent> simulate_events(const EnvironmentModel& model, std::size_t n, std::uint64_t seed,
                                        std::uint64_t stream) {
  RandomStream rng(seed, stream);
  std::vector<StormEvent> out(n);
  for (auto& e : out) e = model.draw(rng);
  return out;
}

}  // namespace metocean
