#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/marginal.hpp"
#include "test_support.hpp"

using namespace metocean;
using testing_support::gp_draws;

namespace {

PpcOptions single_bin_options() {
  PpcOptions o;
  o.penalty_grid = {0.0};
  return o;
}

// Hand-built model with an exact exponential tail above psi.
MarginalModel injected_model(double tau, double psi, double sigma, double xi) {
  MarginalModel m;
  m.tau = tau;
  m.xi = xi;
  m.psi = {psi};
  m.sigma = {sigma};
  m.bin_weight = {1.0};
  m.body = {BodyTable{{psi - 10, psi}, {0.0, tau}}};
  return m;
}

}  // namespace

TEST_CASE("GP recovery on a single bin") {
  RandomStream rng(11, 0);
  SUBCASE("xi = 0.1") {
    const auto y = gp_draws(10000, 0.1, 1.0, rng);
    const auto fit = fit_gp_exceedances({y}, 0.0);
    CHECK(std::abs(fit.xi - 0.1) < 0.05);
    CHECK(std::abs(fit.sigma[0] - 1.0) < 0.05);
  }
  SUBCASE("exponential") {
    const auto y = gp_draws(10000, 0.0, 1.0, rng);
    const auto fit = fit_gp_exceedances({y}, 0.0);
    CHECK(std::abs(fit.xi) < 0.05);
  }
}

TEST_CASE("GP fit matches a brute-force likelihood maximum") {
  RandomStream rng(5, 1);
  const auto y = gp_draws(2000, -0.2, 2.0, rng);
  const auto fit = fit_gp_exceedances({y}, 0.0);
  // Independent oracle: coarse-to-fine grid search over (xi, sigma).
  auto nll = [&](double xi, double s) {
    double t = 0;
    for (double v : y) {
      const double a = 1 + xi * v / s;
      if (a <= 0) return 1e300;
      t += std::log(s) + (1 / xi + 1) * std::log(a);
    }
    return t;
  };
  double bx = 0, bs = 1, bf = 1e300;
  for (double xi = -0.5; xi <= 0.0; xi += 0.005)
    for (double s = 1.0; s <= 3.0; s += 0.005)
      if (const double f = nll(xi, s); f < bf) bf = f, bx = xi, bs = s;
  CHECK(fit.xi == doctest::Approx(bx).epsilon(0.03));
  CHECK(fit.sigma[0] == doctest::Approx(bs).epsilon(0.01));
  CHECK(fit.neg_log_likelihood <= bf + 1e-6);
}

TEST_CASE("infinite penalty pools the scales") {
  RandomStream rng(3, 0);
  const auto a = gp_draws(500, 0.05, 1.0, rng);
  const auto b = gp_draws(800, 0.05, 1.0, rng);
  const auto fit = fit_gp_exceedances({a, b}, std::numeric_limits<double>::infinity());
  CHECK(fit.sigma[0] == fit.sigma[1]);

  // Penalty monotonicity: spread shrinks as kappa grows.
  const auto c = gp_draws(800, 0.05, 2.0, rng);
  double prev = 1e300;
  for (double k : {0.0, 10.0, 1e3, 1e5, 1e8}) {
    const auto f = fit_gp_exceedances({a, c}, k);
    const double spread = std::abs(f.sigma[1] - f.sigma[0]);
    CHECK(spread <= prev + 1e-9);
    prev = spread;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("fit_gp_ppc error paths") {
  std::vector<double> few(50, 0.0);
  std::iota(few.begin(), few.end(), 0.0);
  CHECK_THROWS_AS(fit_gp_ppc({few}, single_bin_options()), Error);  // 10 exceedances < 20

  std::vector<double> flat(200, 1.0);
  for (std::size_t i = 0; i < 160; ++i) flat[i] = static_cast<double>(i) / 200.0;
  flat.push_back(2.0);
  for (auto& v : flat) if (v == 1.0) v = 3.0;  // 40 identical exceedances
  try {
    fit_gp_ppc({flat}, single_bin_options());
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::Degenerate || e.kind() == ErrorKind::Fit));
  }

  PpcOptions bad = single_bin_options();
  bad.tau = 1.0;
  try {
    fit_gp_ppc({few}, bad);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("composite CDF: threshold, continuity, and Laplace transform") {
  RandomStream rng(21, 0);
  std::vector<double> x(4000);
  for (auto& v : x) v = -std::log(rng.uniform()) * 1.3 + 0.5;  // shifted exponential
  const auto model = fit_gp_ppc({x}, single_bin_options());

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  CHECK(model.psi[0] == doctest::Approx(sorted_quantile(sorted, 0.8)));

  const double psi = model.psi[0];
  CHECK(std::abs(model.cdf(psi, 0) - 0.8) < 1e-9);
  CHECK(std::abs(model.cdf(std::nextafter(psi, 1e9), 0) - 0.8) < 1e-9);

  // Monotone across the whole range.
  double prev = -1;
  for (double v = sorted.front() - 1; v < sorted.back() + 5; v += 0.01) {
    const double c = model.cdf(v, 0);
    CHECK(c >= prev);
    prev = c;
  }

  // Laplace median and the u = 0.975 point.
  CHECK(std::abs(to_laplace(model, model.quantile(0.5, 0), 0)) < 1e-9);
  CHECK(dist::laplace_from_probability(0.975, 0.025) == doctest::Approx(-std::log(0.05)).epsilon(1e-12));
  const double q975 = model.quantile(0.975, 0);
  CHECK(to_laplace(model, q975, 0) == doctest::Approx(std::log(20.0)).epsilon(1e-9));
  CHECK(from_laplace(model, std::log(20.0), 0) == doctest::Approx(q975).epsilon(1e-9));
  CHECK(from_laplace(model, 0.0, 0) == doctest::Approx(model.quantile(0.5, 0)));

  // Round trip and order preservation.
  std::vector<double> z;
  for (double v = -8; v <= 12; v += 0.37) z.push_back(v);
  const std::vector<std::size_t> bins(z.size(), 0);
  const auto phys = from_laplace(model, z, bins);
  CHECK(std::is_sorted(phys.begin(), phys.end()));
  const auto back = to_laplace(model, phys, bins);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(back[i] - z[i]) <= 1e-9 * std::max(1.0, std::abs(z[i])));

  // Well-specified model: Laplace-scale sample is close to standard Laplace.
  const std::vector<std::size_t> xb(x.size(), 0);
  const auto zl = to_laplace(model, x, xb);
  const double d = testing_support::ks_distance(zl, [](double v) { return dist::laplace_cdf(v); });
  CHECK(d < testing_support::dkw_bound(x.size()));
}

TEST_CASE("to_laplace rejects values beyond a finite endpoint") {
  const auto m = injected_model(0.5, 0.0, 1.0, -0.5);  // endpoint 2
  CHECK(m.upper_endpoint(0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(to_laplace(m, 2.5, 0), Error);
  CHECK(std::isfinite(to_laplace(m, 1.9, 0)));
}

TEST_CASE("return values") {
  // Exponential tail with rate 2 * (1 - 0.5) = 1 exceedance of 0 per year:
  // the annual maximum is exactly Gumbel(0, 1).
  const auto g = injected_model(0.5, 0.0, 1.0, 0.0);
  CHECK(return_value(g, 100, 2.0) == doctest::Approx(-std::log(-std::log(0.99))).epsilon(1e-9));
  CHECK(return_value(g, 100, 2.0) == doctest::Approx(4.600).epsilon(1e-3));
  CHECK(return_value(g, 100, 2.0) >= return_value(g, 50, 2.0));

  const auto bounded = injected_model(0.5, 0.0, 1.0, -0.25);  // endpoint 4
  double prev = 0;
  for (double T : {10.0, 100.0, 1e4, 1e8, 1e12}) {
    const double v = return_value(bounded, T, 2.0);
    CHECK(v >= prev);
    CHECK(v < 4.0);
    prev = v;
  }
  CHECK(prev == doctest::Approx(4.0).epsilon(1e-3));

  try {
    return_value(g, 2, 0.1);  // expected exceedances of psi per year far below 1/T
    FAIL("expected extrapolation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Extrapolation);
  }

  // Two bins: root-finding path agrees with a direct evaluation of the defining equation.
  MarginalModel two = injected_model(0.8, 1.0, 1.0, 0.1);
  two.psi.push_back(2.0);
  two.sigma.push_back(0.5);
  two.body.push_back(BodyTable{{-8, 2.0}, {0, 0.8}});
  two.bin_weight = {0.3, 0.7};
  const double x = return_value(two, 100, 5.0);
  const double lhs = 5.0 * (0.3 * two.survival(x, 0) + 0.7 * two.survival(x, 1));
  CHECK(lhs == doctest::Approx(-std::log1p(-0.01)).epsilon(1e-9));
}

TEST_CASE("CV penalty selection on two bins") {
  RandomStream rng(8, 2);
  // Equal scales: strong penalty should win or tie.
  auto a = gp_draws(600, 0.1, 1.0, rng);
  auto b = gp_draws(600, 0.1, 1.0, rng);
  PpcDiagnostics diag;
  PpcOptions o;
  o.tau = 0.01;  // treat nearly everything as exceedance
  const auto m = fit_gp_ppc({a, b}, o, &diag);
  REQUIRE(diag.cv_score.size() == o.penalty_grid.size());
  const double best = *std::max_element(diag.cv_score.begin(), diag.cv_score.end());
  CHECK(diag.cv_score[diag.selected] >= best - o.tie_tolerance);
  CHECK(diag.cv_score[diag.selected] >= diag.cv_score.front() - o.tie_tolerance);
  CHECK(m.penalty == o.penalty_grid[diag.selected]);
  for (std::size_t g = 0; g < diag.selected; ++g) CHECK(diag.cv_score[g] < best - o.tie_tolerance);
}

TEST_CASE("bootstrap determinism and degenerate resample") {
  RandomStream rng(30, 0);
  const auto y = gp_draws(1000, 0.1, 1.0, rng);
  const auto bins = single_bin(y.size());
  BootstrapOptions o;
  o.n_boot = 5;
  o.tau_lo = 0.7;
  o.tau_hi = 0.9;
  o.seed = 99;
  o.fit = single_bin_options();
  const auto r1 = bootstrap_marginal(y, bins, o);
  const auto r2 = bootstrap_marginal(y, bins, o);
  REQUIRE(r1.size() == 5);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].xi == r2[i].xi);
    CHECK(r1[i].sigma == r2[i].sigma);
    CHECK(r1[i].tau == r2[i].tau);
  }

  BootstrapOptions id = o;
  id.n_boot = 1;
  id.tau_lo = id.tau_hi = 0.8;
  id.resampler = [](std::size_t n, RandomStream&) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  };
  const auto point = fit_gp_ppc({y}, single_bin_options());
  const auto boot = bootstrap_marginal(y, bins, id);
  CHECK(boot[0].xi == point.xi);
  CHECK(boot[0].sigma == point.sigma);
  CHECK(boot[0].psi == point.psi);

  BootstrapOptions empty = o;
  empty.max_retries = 2;
  empty.resampler = [](std::size_t, RandomStream&) { return std::vector<std::size_t>(30, 0); };
  CHECK_THROWS_AS(bootstrap_marginal(y, bins, empty), Error);
}

TEST_CASE("bootstrap percentile interval coverage for xi") {
  // 200 meta-replicates of GP(0.1, 1); nominal 95% percentile interval.
  const int meta = 200;
  int covered = 0;
  for (int r = 0; r < meta; ++r) {
    RandomStream rng(4242, static_cast<std::uint64_t>(r));
    const auto y = gp_draws(1000, 0.1, 1.0, rng);
    BootstrapOptions o;
    o.n_boot = 100;
    o.tau_lo = o.tau_hi = 0.5;
    o.seed = 1000 + static_cast<std::uint64_t>(r);
    o.fit = single_bin_options();
    o.fit.xi_lo = -0.6;
    o.fit.xi_hi = 0.8;
    const auto boot = bootstrap_marginal(y, single_bin(y.size()), o);
    std::vector<double> xi;
    for (const auto& m : boot) xi.push_back(m.xi);
    std::sort(xi.begin(), xi.end());
    const double lo = sorted_quantile(xi, 0.025), hi = sorted_quantile(xi, 0.975);
    if (lo <= 0.1 && 0.1 <= hi) ++covered;
  }
  const double rate = static_cast<double>(covered) / meta;
  MESSAGE("coverage = " << rate);
  CHECK(rate >= 0.90);
  CHECK(rate <= 1.00);
}
