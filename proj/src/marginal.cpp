#include "metocean/marginal.hpp"

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

// Per-bin sufficient data for the inner scale solve.
struct BinData {
  std::span<const double> y;
  double y_max = 0;
  double y_mean = 0;
};

std::vector<BinData> describe(const std::vector<std::vector<double>>& exceedances) {
  std::vector<BinData> out;
  out.reserve(exceedances.size());
  for (const auto& y : exceedances) {
    BinData b{y, 0, 0};
    if (!y.empty()) {
      b.y_max = *std::max_element(y.begin(), y.end());
      b.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    }
    out.push_back(b);
  }
  return out;
}

double min_feasible_sigma(const BinData& b, double xi) {
  return xi < 0 ? -xi * b.y_max * (1 + 1e-10) + 1e-300 : 0.0;
}

// Negative log-likelihood of one bin with derivatives in sigma.
struct BinTerms {
  double value = 0;
  double grad = 0;
  double hess = 0;
};

BinTerms bin_terms(const BinData& b, double xi, double sigma) {
  BinTerms t;
  if (!(sigma > min_feasible_sigma(b, xi))) {
    t.value = kInf;
    return t;
  }
  const double n = static_cast<double>(b.y.size());
  const double log_sigma = std::log(sigma);
  double sum_log = 0, sum_g = 0, sum_h = 0;
  const bool exponential = std::abs(xi) < dist::kGpZeroShape<double>;
  for (double y : b.y) {
    const double a = sigma + xi * y;
    const double w = y / a;
    if (!exponential) sum_log += std::log1p(xi * y / sigma);
    sum_g += w;
    sum_h += w * (a + sigma) / a;
  }
  if (exponential) {
    double sy = 0;
    for (double y : b.y) sy += y;
    t.value = n * log_sigma + sy / sigma;
  } else {
    t.value = n * log_sigma + (1 + 1 / xi) * sum_log;
  }
  t.grad = n / sigma - (1 + xi) * sum_g / sigma;
  t.hess = -n / (sigma * sigma) + (1 + xi) * sum_h / (sigma * sigma);
  return t;
}

double penalty_value(std::span<const double> sigma, double kappa) {
  if (kappa <= 0 || sigma.size() < 2) return 0;
  const double mean = std::accumulate(sigma.begin(), sigma.end(), 0.0) / static_cast<double>(sigma.size());
  double s = 0;
  for (double v : sigma) s += (v - mean) * (v - mean);
  return kappa * s;
}

double penalised_nll(const std::vector<BinData>& bins, double xi, std::span<const double> sigma,
                     double kappa) {
  double total = 0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const auto t = bin_terms(bins[k], xi, sigma[k]);
    if (!std::isfinite(t.value)) return kInf;
    total += t.value;
  }
  return total + penalty_value(sigma, kappa);
}

// Damped Newton on the scale vector for fixed shape and finite penalty.
double solve_sigma(const std::vector<BinData>& bins, double xi, double kappa, Eigen::VectorXd& sigma) {
  const auto K = static_cast<Eigen::Index>(bins.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    const double lo = min_feasible_sigma(bins[static_cast<std::size_t>(k)], xi);
    if (!(sigma(k) > lo) || !std::isfinite(sigma(k))) {
      sigma(k) = std::max(bins[static_cast<std::size_t>(k)].y_mean * (1 - xi), lo * 1.05 + 1e-12);
    }
  }
  auto value_at = [&](const Eigen::VectorXd& s) {
    return penalised_nll(bins, xi, std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), kappa);
  };
  double f = value_at(sigma);
  Eigen::MatrixXd penalty_hess = Eigen::MatrixXd::Zero(K, K);
  if (kappa > 0 && K > 1) {
    penalty_hess = 2 * kappa *
                   (Eigen::MatrixXd::Identity(K, K) - Eigen::MatrixXd::Constant(K, K, 1.0 / static_cast<double>(K)));
  }

  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    Eigen::VectorXd g(K);
    Eigen::MatrixXd H = penalty_hess;
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto t = bin_terms(bins[static_cast<std::size_t>(k)], xi, sigma(k));
      g(k) = t.grad;
      H(k, k) += t.hess;
    }
    if (kappa > 0 && K > 1) g += 2 * kappa * (sigma.array() - sigma.mean()).matrix();

    const double scale = bins.empty() ? 1.0 : static_cast<double>(bins.front().y.size()) + 1.0;
    if (g.lpNorm<Eigen::Infinity>() * sigma.lpNorm<Eigen::Infinity>() < 1e-9 * scale) break;

    // Levenberg damping until the system is positive definite.
    double mu = 0;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::LLT<Eigen::MatrixXd> llt(H + mu * Eigen::MatrixXd::Identity(K, K));
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        break;
      }
      mu = mu == 0 ? 1e-6 * (H.diagonal().cwiseAbs().maxCoeff() + 1) : mu * 10;
    }
    if (step.size() == 0) step = -g;

    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd candidate = sigma + t * step;
      const double fc = value_at(candidate);
      if (std::isfinite(fc) && fc <= f + 1e-4 * t * g.dot(step)) {
        sigma = candidate;
        const double change = f - fc;
        f = fc;
        improved = true;
        converged = change < 1e-13 * (std::abs(f) + 1);
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return f;
}

// Minimum over sigma for a fixed shape; infinite penalty pools the bins.
double profile(const std::vector<BinData>& bins, const std::vector<BinData>& pooled, double xi,
               double kappa, Eigen::VectorXd& sigma) {
  if (std::isinf(kappa) && bins.size() > 1) {
    Eigen::VectorXd common(1);
    common(0) = sigma.mean();
    const double f = solve_sigma(pooled, xi, 0.0, common);
    sigma.setConstant(common(0));
    return f;
  }
  return solve_sigma(bins, xi, kappa, sigma);
}

std::vector<BinData> pool(const std::vector<std::vector<double>>& exceedances,
                          std::vector<double>& storage) {
  storage.clear();
  for (const auto& y : exceedances) storage.insert(storage.end(), y.begin(), y.end());
  BinData b{storage, 0, 0};
  if (!storage.empty()) {
    b.y_max = *std::max_element(storage.begin(), storage.end());
    b.y_mean = std::accumulate(storage.begin(), storage.end(), 0.0) / static_cast<double>(storage.size());
  }
  return {b};
}

BodyTable make_body(std::vector<double> below, double psi, double tau, std::size_t max_knots) {
  std::sort(below.begin(), below.end());
  BodyTable body;
  const std::size_t m = below.size();
  if (m == 0) {
    // Degenerate body: all mass of the body at a single point just below psi.
    body.x = {psi - 1e-9 * (std::abs(psi) + 1), psi};
    body.p = {0.0, tau};
    return body;
  }
  std::vector<double> kx, kp;
  const auto knots = std::min(m, std::max<std::size_t>(max_knots, 2));
  for (std::size_t j = 0; j < knots; ++j) {
    const double f = knots == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(knots - 1);
    const double x = sorted_quantile(below, f);
    const double rank = 1 + f * static_cast<double>(m - 1);
    const double p = tau * rank / static_cast<double>(m + 1);
    if (!kx.empty() && x <= kx.back()) {
      // Tied values collapse to one knot carrying the larger probability.
      kp.back() = p;
      continue;
    }
    kx.push_back(x);
    kp.push_back(p);
  }
  if (kx.back() >= psi) {
    kx.pop_back();
    kp.pop_back();
  }
  const double first = kx.empty() ? psi : kx.front();
  const double spacing = std::max((psi - first) / static_cast<double>(m), 1e-9 * (std::abs(psi) + 1));
  body.x.push_back(first - spacing);
  body.p.push_back(0.0);
  for (std::size_t i = 0; i < kx.size(); ++i) {
    body.x.push_back(kx[i]);
    body.p.push_back(kp[i]);
  }
  body.x.push_back(psi);
  body.p.push_back(tau);
  return body;
}

}  // namespace

double BodyTable::cdf(double value) const {
  if (value <= x.front()) return 0.0;
  if (value >= x.back()) return p.back();
  const auto it = std::upper_bound(x.begin(), x.end(), value);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (value - x[i - 1]) / (x[i] - x[i - 1]);
  return p[i - 1] + w * (p[i] - p[i - 1]);
}

double BodyTable::quantile(double prob) const {
  if (prob <= 0) return x.front();
  if (prob >= p.back()) return x.back();
  const auto it = std::upper_bound(p.begin(), p.end(), prob);
  const auto i = static_cast<std::size_t>(it - p.begin());
  const double w = (prob - p[i - 1]) / (p[i] - p[i - 1]);
  return x[i - 1] + w * (x[i] - x[i - 1]);
}

double MarginalModel::upper_endpoint(std::size_t bin) const {
  return psi[bin] + dist::gp_upper_endpoint(xi, sigma[bin]);
}

double MarginalModel::cdf(double x, std::size_t bin) const {
  if (x <= psi[bin]) return body[bin].cdf(x);
  return tau + (1 - tau) * dist::gp_cdf(x - psi[bin], xi, sigma[bin]);
}

double MarginalModel::survival(double x, std::size_t bin) const {
  if (x <= psi[bin]) return 1.0 - body[bin].cdf(x);
  return (1 - tau) * dist::gp_survival(x - psi[bin], xi, sigma[bin]);
}

double MarginalModel::quantile(double u, double one_minus_u, std::size_t bin) const {
  if (one_minus_u < 1 - tau) {
    return psi[bin] + dist::gp_quantile_survival(one_minus_u / (1 - tau), xi, sigma[bin]);
  }
  return body[bin].quantile(u);
}

std::vector<std::vector<double>> split_by_bin(std::span<const double> values,
                                              const CovariateBinning& bins) {
  if (bins.allocation.size() != values.size()) {
    throw Error(ErrorKind::Allocation, "allocation vector length does not match sample");
  }
  std::vector<std::vector<double>> out(bins.n_bins);
  for (std::size_t i = 0; i < values.size(); ++i) out[bins.allocation[i]].push_back(values[i]);
  return out;
}

double gp_log_likelihood(const std::vector<std::vector<double>>& exceedances, double xi,
                         std::span<const double> sigma) {
  // Points beyond a finite endpoint get a floor rather than -inf, so that one
  // held-out outlier cannot disqualify every candidate penalty.
  constexpr double kFloor = -50.0;
  double total = 0;
  for (std::size_t k = 0; k < exceedances.size(); ++k) {
    for (double y : exceedances[k]) total += std::max(dist::gp_log_pdf(y, xi, sigma[k]), kFloor);
  }
  return total;
}

GpFit fit_gp_exceedances(const std::vector<std::vector<double>>& exceedances, double penalty,
                         double xi_lo, double xi_hi, double xi_step) {
  const auto bins = describe(exceedances);
  std::vector<double> pooled_storage;
  const auto pooled = pool(exceedances, pooled_storage);
  const auto K = static_cast<Eigen::Index>(bins.size());
  for (const auto& b : bins) {
    if (b.y.empty()) throw Error(ErrorKind::Fit, "GP fit: empty covariate bin");
  }

  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(K, std::nan(""));
  double best_xi = xi_lo;
  double best_f = kInf;
  Eigen::VectorXd best_sigma = sigma;
  const int n_grid = std::max(2, static_cast<int>(std::lround((xi_hi - xi_lo) / xi_step)) + 1);
  for (int i = 0; i < n_grid; ++i) {
    const double xi = xi_lo + (xi_hi - xi_lo) * i / (n_grid - 1);
    const double f = profile(bins, pooled, xi, penalty, sigma);
    if (f < best_f) {
      best_f = f;
      best_xi = xi;
      best_sigma = sigma;
    }
  }
  const double h = (xi_hi - xi_lo) / (n_grid - 1);
  Eigen::VectorXd warm = best_sigma;
  auto objective = [&](double xi) {
    Eigen::VectorXd s = warm;
    const double f = profile(bins, pooled, xi, penalty, s);
    if (std::isfinite(f)) warm = s;
    return f;
  };
  const auto refined = optim::brent_minimize(objective, std::max(xi_lo, best_xi - h),
                                             std::min(xi_hi, best_xi + h), 1e-6);
  if (refined.value <= best_f) {
    best_xi = refined.x;
    Eigen::VectorXd s = best_sigma;
    best_f = profile(bins, pooled, best_xi, penalty, s);
    best_sigma = s;
  }
  if (!std::isfinite(best_f)) throw Error(ErrorKind::Fit, "GP fit: optimizer did not converge");

  GpFit fit;
  fit.xi = best_xi;
  fit.sigma.assign(best_sigma.data(), best_sigma.data() + K);
  fit.neg_log_likelihood = best_f;
  return fit;
}

MarginalModel fit_gp_ppc(const std::vector<std::vector<double>>& per_bin, const PpcOptions& options,
                         PpcDiagnostics* diagnostics) {
  if (!(options.tau > 0 && options.tau < 1)) throw Error(ErrorKind::Config, "tau must lie in (0,1)");
  if (per_bin.empty()) throw Error(ErrorKind::Fit, "no covariate bins");

  MarginalModel model;
  model.tau = options.tau;
  const std::size_t K = per_bin.size();
  std::size_t total = 0;
  for (const auto& v : per_bin) total += v.size();

  std::vector<std::vector<double>> exceedances(K);
  std::vector<std::vector<std::size_t>> exceed_index(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& x = per_bin[k];
    if (x.empty()) throw Error(ErrorKind::Fit, "covariate bin " + std::to_string(k) + " is empty");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double psi = sorted_quantile(sorted, options.tau);
    std::vector<double> below;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > psi) {
        exceedances[k].push_back(x[i] - psi);
        exceed_index[k].push_back(i);
      } else {
        below.push_back(x[i]);
      }
    }
    if (exceedances[k].size() < options.min_exceedances) {
      throw Error(ErrorKind::Fit, "bin " + std::to_string(k) + " has " +
                                      std::to_string(exceedances[k].size()) +
                                      " exceedances, fewer than the floor of " +
                                      std::to_string(options.min_exceedances));
    }
    const auto [mn, mx] = std::minmax_element(exceedances[k].begin(), exceedances[k].end());
    if (*mx - *mn <= 1e-12 * (std::abs(*mx) + 1)) {
      throw Error(ErrorKind::Degenerate, "bin " + std::to_string(k) + ": all exceedances identical");
    }
    model.psi.push_back(psi);
    model.body.push_back(make_body(std::move(below), psi, options.tau, options.max_body_knots));
    model.bin_weight.push_back(static_cast<double>(x.size()) / static_cast<double>(total));
  }

  double kappa = 0;
  PpcDiagnostics diag;
  if (K > 1 && options.penalty_grid.size() > 1) {
    // Storm-level folds: each observation is one storm, assigned round-robin
    // after a seeded shuffle.
    const int F = std::max(2, options.cv_folds);
    RandomStream rng(options.seed, 0xC5F01D5ULL);
    std::vector<std::vector<int>> fold_of(K);
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<std::size_t> order(per_bin[k].size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
      std::vector<int> fold(per_bin[k].size());
      for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(F));
      fold_of[k] = std::move(fold);
    }
    diag.penalty_grid = options.penalty_grid;
    diag.cv_score.assign(options.penalty_grid.size(), 0.0);
    for (int f = 0; f < F; ++f) {
      std::vector<std::vector<double>> train(K), test(K);
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < exceedances[k].size(); ++j) {
          const bool held_out = fold_of[k][exceed_index[k][j]] == f;
          (held_out ? test : train)[k].push_back(exceedances[k][j]);
        }
        if (train[k].size() < 2) throw Error(ErrorKind::Fit, "too few exceedances for cross-validation");
      }
      for (std::size_t g = 0; g < options.penalty_grid.size(); ++g) {
        const auto fit = fit_gp_exceedances(train, options.penalty_grid[g], options.xi_lo, options.xi_hi,
                                            options.xi_grid_step);
        diag.cv_score[g] += gp_log_likelihood(test, fit.xi, fit.sigma);
      }
    }
    const double best = *std::max_element(diag.cv_score.begin(), diag.cv_score.end());
    // Smallest penalty within tolerance of the best score.
    std::vector<std::size_t> by_penalty(options.penalty_grid.size());
    std::iota(by_penalty.begin(), by_penalty.end(), 0);
    std::sort(by_penalty.begin(), by_penalty.end(), [&](std::size_t a, std::size_t b) {
      return options.penalty_grid[a] < options.penalty_grid[b];
    });
    for (std::size_t g : by_penalty) {
      if (diag.cv_score[g] >= best - options.tie_tolerance) {
        diag.selected = g;
        break;
      }
    }
    kappa = options.penalty_grid[diag.selected];
  } else if (K > 1 && options.penalty_grid.size() == 1) {
    kappa = options.penalty_grid.front();
  }

  const auto fit = fit_gp_exceedances(exceedances, kappa, options.xi_lo, options.xi_hi, options.xi_grid_step);
  model.xi = fit.xi;
  model.sigma = fit.sigma;
  model.penalty = kappa;
  diag.neg_log_likelihood = fit.neg_log_likelihood;
  if (diagnostics) *diagnostics = std::move(diag);
  return model;
}

double return_value(const MarginalModel& model, double years, double annual_rate) {
  if (!(years > 0) || !(annual_rate > 0)) {
    throw Error(ErrorKind::Config, "return_value: T and annual rate must be positive");
  }
  if (years <= 1) throw Error(ErrorKind::Extrapolation, "return_value: T must exceed one year");
  // Pr(annual max <= x) = exp(-rate * sum_k w_k S_k(x)); solve for prob 1 - 1/T.
  const double target = -std::log1p(-1.0 / years) / annual_rate;
  auto expected_exceedances = [&](double x) {
    double s = 0;
    for (std::size_t k = 0; k < model.n_bins(); ++k) s += model.bin_weight[k] * model.survival(x, k);
    return s;
  };
  const double x_lo = *std::max_element(model.psi.begin(), model.psi.end());
  if (expected_exceedances(x_lo) < target) {
    throw Error(ErrorKind::Extrapolation,
                "return_value: level lies below the extreme-value threshold for T=" + std::to_string(years));
  }
  if (model.n_bins() == 1) {
    return model.psi[0] +
           dist::gp_quantile_survival(target / (1 - model.tau), model.xi, model.sigma[0]);
  }
  double x_hi = x_lo + *std::max_element(model.sigma.begin(), model.sigma.end());
  double endpoint = -kInf;
  for (std::size_t k = 0; k < model.n_bins(); ++k) endpoint = std::max(endpoint, model.upper_endpoint(k));
  while (expected_exceedances(x_hi) > target) {
    const double next = x_lo + 2 * (x_hi - x_lo);
    if (next >= endpoint) {
      x_hi = endpoint;
      break;
    }
    x_hi = next;
  }
  return optim::brent_root([&](double x) { return expected_exceedances(x) - target; }, x_lo, x_hi,
                           1e-12 * (std::abs(x_hi) + 1));
}

double to_laplace(const MarginalModel& model, double x, std::size_t bin) {
  if (bin >= model.n_bins()) throw Error(ErrorKind::Allocation, "to_laplace: bin out of range");
  if (x > model.psi[bin]) {
    if (x >= model.upper_endpoint(bin)) {
      throw Error(ErrorKind::Extrapolation, "to_laplace: value beyond the fitted upper endpoint");
    }
    const double s = (1 - model.tau) * dist::gp_survival(x - model.psi[bin], model.xi, model.sigma[bin]);
    return dist::laplace_from_probability(1 - s, s);
  }
  const double u = model.body[bin].cdf(x);
  if (!(u > 0)) throw Error(ErrorKind::Extrapolation, "to_laplace: value below the body support");
  return dist::laplace_from_probability(u, 1 - u);
}

std::vector<double> to_laplace(const MarginalModel& model, std::span<const double> x,
                               std::span<const std::size_t> bins) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = to_laplace(model, x[i], bins.empty() ? 0 : bins[i]);
  return z;
}

double from_laplace(const MarginalModel& model, double z, std::size_t bin) {
  if (bin >= model.n_bins()) throw Error(ErrorKind::Allocation, "from_laplace: bin out of range");
  if (!std::isfinite(z)) throw Error(ErrorKind::Extrapolation, "from_laplace: non-finite value");
  double u, s;
  if (z < 0) {
    u = 0.5 * std::exp(z);
    s = 1 - u;
  } else {
    s = 0.5 * std::exp(-z);
    u = 1 - s;
  }
  return model.quantile(u, s, bin);
}

std::vector<double> from_laplace(const MarginalModel& model, std::span<const double> z,
                                 std::span<const std::size_t> bins) {
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = from_laplace(model, z[i], bins.empty() ? 0 : bins[i]);
  return x;
}

std::vector<MarginalModel> bootstrap_marginal(std::span<const double> values,
                                              const CovariateBinning& bins,
                                              const BootstrapOptions& options) {
  if (options.n_boot < 1) throw Error(ErrorKind::Config, "bootstrap: n_boot must be >= 1");
  if (!(options.tau_lo > 0 && options.tau_hi < 1 && options.tau_lo <= options.tau_hi)) {
    throw Error(ErrorKind::Config, "bootstrap: invalid tau range");
  }
  const auto default_resampler = [](std::size_t n, RandomStream& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.index(n);
    return idx;
  };
  std::vector<MarginalModel> out;
  out.reserve(options.n_boot);
  for (std::size_t r = 0; r < options.n_boot; ++r) {
    RandomStream rng(options.seed, r);
    bool done = false;
    for (int attempt = 0; attempt <= options.max_retries && !done; ++attempt) {
      const auto idx = options.resampler ? options.resampler(values.size(), rng)
                                         : default_resampler(values.size(), rng);
      std::vector<std::vector<double>> per_bin(bins.n_bins);
      for (auto i : idx) per_bin[bins.allocation[i]].push_back(values[i]);
      PpcOptions fit = options.fit;
      fit.tau = options.tau_lo == options.tau_hi ? options.tau_lo : rng.uniform(options.tau_lo, options.tau_hi);
      fit.seed = rng.bits();
      try {
        out.push_back(fit_gp_ppc(per_bin, fit));
        done = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Fit && e.kind() != ErrorKind::Degenerate) throw;
      }
    }
    if (!done) {
      throw Error(ErrorKind::Fit, "bootstrap replicate " + std::to_string(r) +
                                      " failed after " + std::to_string(options.max_retries) + " retries");
    }
  }
  return out;
}

}  // namespace metocean
