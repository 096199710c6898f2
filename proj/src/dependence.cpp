#include "metocean/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/optimize.hpp"
#include "metocean/random.hpp"

namespace metocean {

namespace {

constexpr double kZetaFloor = 1e-12;

struct Exceedances {
  std::vector<double> z1, z2, log_z1;
  std::vector<std::size_t> bin;

  std::size_t size() const { return z1.size(); }
};

struct Moments {
  double mu = 0, zeta = 0;
};

Moments residual_moments(const Exceedances& e, std::span<const double> alpha, double beta) {
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double w = (e.z2[i] - alpha[e.bin[i]] * e.z1[i]) * std::exp(-beta * e.log_z1[i]);
    s += w;
    ss += w * w;
  }
  const double n = static_cast<double>(e.size());
  const double mu = s / n;
  return {mu, std::max(ss / n - mu * mu, kZetaFloor)};
}

double profile_nll(const Exceedances& e, std::span<const double> alpha, double beta) {
  const auto m = residual_moments(e, alpha, beta);
  double sum_log = 0;
  for (double l : e.log_z1) sum_log += l;
  const double n = static_cast<double>(e.size());
  return beta * sum_log + 0.5 * n * std::log(m.zeta) + 0.5 * n;
}

// Held-out Gaussian log-likelihood given fitted (alpha, beta, mu, zeta).
double held_out_loglik(const Exceedances& e, std::span<const double> alpha, double beta, Moments m) {
  double t = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double sd = std::exp(beta * e.log_z1[i]) * std::sqrt(m.zeta);
    const double r = (e.z2[i] - alpha[e.bin[i]] * e.z1[i] - std::exp(beta * e.log_z1[i]) * m.mu) / sd;
    t += std::max(-std::log(sd) - 0.5 * r * r - 0.5 * std::log(2 * M_PI), -50.0);
  }
  return t;
}

struct Fit {
  std::vector<double> alpha;
  double beta = 0;
  Moments m;
  double nll = 0;
};

Fit fit_fixed_penalty(const Exceedances& e, std::size_t K, double kappa, double beta_lo) {
  const bool pooled = std::isinf(kappa) || K == 1;
  const Eigen::Index dim = pooled ? 2 : static_cast<Eigen::Index>(K) + 1;
  auto unpack = [&](const Eigen::VectorXd& x, std::vector<double>& alpha) {
    alpha.resize(K);
    for (std::size_t k = 0; k < K; ++k) alpha[k] = pooled ? x(0) : x(static_cast<Eigen::Index>(k));
    return x(dim - 1);
  };
  std::vector<double> alpha_buf;
  auto objective = [&](const Eigen::VectorXd& x) {
    const double beta = unpack(x, alpha_buf);
    double f = profile_nll(e, alpha_buf, beta);
    if (!pooled && kappa > 0) {
      const double mean = std::accumulate(alpha_buf.begin(), alpha_buf.end(), 0.0) / static_cast<double>(K);
      for (double a : alpha_buf) f += kappa * (a - mean) * (a - mean);
    }
    return f;
  };
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(dim), hi = Eigen::VectorXd::Ones(dim);
  lo(dim - 1) = beta_lo;

  // Multi-start over a small (alpha, beta) lattice; the profile surface can be
  // flat near alpha = 0 and has a ridge near alpha = 1.
  optim::Minimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (double a0 : {0.1, 0.5, 0.9}) {
    for (double b0 : {0.0, 0.5}) {
      Eigen::VectorXd x0 = Eigen::VectorXd::Constant(dim, a0);
      x0(dim - 1) = b0;
      const auto r = optim::minimize_box(objective, x0, lo, hi);
      if (r.value < best.value) best = r;
    }
  }
  if (!std::isfinite(best.value)) throw Error(ErrorKind::Fit, "CE fit: optimizer did not converge");
  Fit fit;
  fit.beta = unpack(best.x, fit.alpha);
  fit.m = residual_moments(e, fit.alpha, fit.beta);
  fit.nll = best.value;
  return fit;
}

}  // namespace

double ce_profile_nll(std::span<const double> z_cond, std::span<const double> z_other,
                      std::span<const std::size_t> bins, std::span<const double> alpha, double beta) {
  Exceedances e;
  for (std::size_t i = 0; i < z_cond.size(); ++i) {
    e.z1.push_back(z_cond[i]);
    e.z2.push_back(z_other[i]);
    e.log_z1.push_back(std::log(z_cond[i]));
    e.bin.push_back(bins.empty() ? 0 : bins[i]);
  }
  return profile_nll(e, alpha, beta);
}

CEModel fit_ce(std::span<const double> z_cond, std::span<const double> z_other,
               std::span<const std::size_t> bins, std::size_t n_bins, int q, const CeOptions& options,
               CeDiagnostics* diagnostics) {
  if (!(options.kappa > 0 && options.kappa < 1)) throw Error(ErrorKind::Config, "CE: kappa must lie in (0,1)");
  if (z_cond.size() != z_other.size() || (!bins.empty() && bins.size() != z_cond.size())) {
    throw Error(ErrorKind::Input, "CE: sample lengths differ");
  }
  const std::size_t K = std::max<std::size_t>(n_bins, 1);
  CEModel model;
  model.q = q;
  model.kappa = options.kappa;
  model.psi_L = dist::laplace_quantile(options.kappa);

  Exceedances e;
  std::vector<std::size_t> per_bin(K, 0);
  for (std::size_t i = 0; i < z_cond.size(); ++i) {
    if (!(z_cond[i] > model.psi_L)) continue;
    const std::size_t k = bins.empty() ? 0 : bins[i];
    if (k >= K) throw Error(ErrorKind::Allocation, "CE: bin label out of range");
    e.z1.push_back(z_cond[i]);
    e.z2.push_back(z_other[i]);
    e.log_z1.push_back(std::log(z_cond[i]));
    e.bin.push_back(k);
    ++per_bin[k];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (per_bin[k] < options.min_exceedances) {
      throw Error(ErrorKind::Fit, "CE: bin " + std::to_string(k) + " has " + std::to_string(per_bin[k]) +
                                      " conditioning exceedances, fewer than the floor of " +
                                      std::to_string(options.min_exceedances));
    }
  }

  CeDiagnostics diag;
  diag.n_exceedances = e.size();
  double kappa = std::numeric_limits<double>::infinity();
  if (K > 1 && options.penalty_grid.size() > 1) {
    const int F = std::max(2, options.cv_folds);
    RandomStream rng(options.seed, 0xCE01ULL);
    std::vector<std::size_t> order(e.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    std::vector<int> fold(e.size());
    for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(F));

    diag.penalty_grid = options.penalty_grid;
    diag.cv_score.assign(options.penalty_grid.size(), 0.0);
    for (int f = 0; f < F; ++f) {
      Exceedances train, test;
      for (std::size_t i = 0; i < e.size(); ++i) {
        auto& dst = fold[i] == f ? test : train;
        dst.z1.push_back(e.z1[i]);
        dst.z2.push_back(e.z2[i]);
        dst.log_z1.push_back(e.log_z1[i]);
        dst.bin.push_back(e.bin[i]);
      }
      for (std::size_t g = 0; g < options.penalty_grid.size(); ++g) {
        const auto fit = fit_fixed_penalty(train, K, options.penalty_grid[g], options.beta_lo);
        diag.cv_score[g] += held_out_loglik(test, fit.alpha, fit.beta, fit.m);
      }
    }
    const double best = *std::max_element(diag.cv_score.begin(), diag.cv_score.end());
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

  const auto fit = fit_fixed_penalty(e, K, kappa, options.beta_lo);
  model.alpha = fit.alpha;
  model.beta = fit.beta;
  model.mu = fit.m.mu;
  model.zeta = fit.m.zeta;
  model.penalty = K > 1 ? kappa : 0.0;
  diag.neg_log_likelihood = fit.nll;

  model.residuals.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    model.residuals.push_back((e.z2[i] - model.alpha[e.bin[i]] * e.z1[i]) * std::exp(-model.beta * e.log_z1[i]));
  }
  std::sort(model.residuals.begin(), model.residuals.end());

  if (model.beta >= 1 - 1e-6) model.warnings.push_back("beta at upper boundary 1");
  if (model.beta <= options.beta_lo + 1e-6) model.warnings.push_back("beta at practical lower bound");
  for (std::size_t k = 0; k < K; ++k) {
    // Self-consistency region: alpha = 1 with beta > 0 lets the conditioned
    // variable outgrow the conditioning one.
    if (model.alpha[k] >= 1 - 1e-6 && model.beta > 1e-6) {
      model.warnings.push_back("bin " + std::to_string(k) + ": alpha = 1 with beta > 0");
    }
  }
  if (diagnostics) *diagnostics = std::move(diag);
  return model;
}

std::vector<double> simulate_ce(const CEModel& model, std::span<const double> z_cond,
                                std::span<const std::size_t> bins, std::uint64_t seed) {
  if (model.residuals.empty()) throw Error(ErrorKind::Simulation, "CE: empty residual set");
  // Canonical ordering makes the output independent of how residuals were stored.
  std::vector<double> sorted;
  std::span<const double> w = model.residuals;
  if (!std::is_sorted(w.begin(), w.end())) {
    sorted.assign(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    w = sorted;
  }
  RandomStream rng(seed, 0);
  std::vector<double> out(z_cond.size());
  for (std::size_t i = 0; i < z_cond.size(); ++i) {
    if (!(z_cond[i] > model.psi_L)) {
      throw Error(ErrorKind::Simulation, "CE: conditioning value below the Laplace threshold");
    }
    const std::size_t k = bins.empty() ? 0 : bins[i];
    out[i] = ce_apply(model, z_cond[i], k, w[rng.index(w.size())]);
  }
  return out;
}

}  // namespace metocean
