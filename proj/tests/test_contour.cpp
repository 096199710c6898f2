#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "metocean/contour.hpp"
#include "metocean/error.hpp"
#include "metocean/random.hpp"

using namespace metocean;

namespace {

Points2 gaussian_sample(std::size_t n, std::uint64_t seed, double shift = 0) {
  RandomStream rng(seed, 0);
  Points2 p(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p(r, 0) = rng.normal() + shift;
    p(r, 1) = rng.normal();
  }
  return p;
}

// Independent oracle: bisection on the closed-form upper tail.
double upper_normal_oracle(double p) {
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / std::sqrt(2.0)) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  return v[lo] + (h - static_cast<double>(lo)) * (v[std::min(lo + 1, v.size() - 1)] - v[lo]);
}

Contour polygon(const std::vector<std::array<double, 2>>& v) {
  Contour c;
  for (const auto& p : v) c.points.push_back({0, p[0], p[1], true});
  return c;
}

}  // namespace

TEST_CASE("direct sampling on a standard normal is a circle at the 0.99 quantile") {
  const auto s = gaussian_sample(400000, 11);
  const auto c = direct_sampling_contour(s, 0.01);
  const double z = upper_normal_oracle(0.01);
  CHECK(z == doctest::Approx(2.326).epsilon(1e-3));
  REQUIRE(c.points.size() == 360);
  for (const auto& p : c.points) CHECK(std::abs(std::hypot(p.x1, p.x2) - z) < 0.03);
  CHECK(is_convex(c.points, 1e-7));

  std::vector<double> x1(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) x1[static_cast<std::size_t>(r)] = s(r, 0);
  CHECK(c.support[0] == doctest::Approx(type7(x1, 0.99)).epsilon(1e-12));
}

TEST_CASE("direct sampling: each support value leaves alpha of the projections beyond it") {
  const auto s = gaussian_sample(50000, 12);
  const double alpha = 0.02;
  const auto c = direct_sampling_contour(s, alpha, {72, 1});
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const double th = c.points[k].theta;
    const auto beyond = ((s.col(0) * std::cos(th) + s.col(1) * std::sin(th)).array() > c.support[k]).count();
    CHECK(std::abs(static_cast<double>(beyond) / 50000.0 - alpha) <= 1.0 / 50000.0 + 1e-12);
  }
}

TEST_CASE("direct sampling: larger alpha shrinks toward the centre and contours nest") {
  const auto s = gaussian_sample(200000, 13);
  const auto big = direct_sampling_contour(s, 0.001);
  const auto mid = direct_sampling_contour(s, 0.01);
  const auto small = direct_sampling_contour(s, 0.45);
  double r_small = 0;
  for (const auto& p : small.points) r_small = std::max(r_small, std::hypot(p.x1, p.x2));
  CHECK(r_small < 0.3);
  Points2 mid_pts(static_cast<Eigen::Index>(mid.points.size()), 2);
  for (std::size_t i = 0; i < mid.points.size(); ++i) {
    mid_pts(static_cast<Eigen::Index>(i), 0) = mid.points[i].x1;
    mid_pts(static_cast<Eigen::Index>(i), 1) = mid.points[i].x2;
  }
  CHECK(enclosed_fraction(big, mid_pts) == 1.0);
}

TEST_CASE("direct sampling errors on too few tail points and warns on thin samples") {
  const auto s = gaussian_sample(500, 14);
  try {
    direct_sampling_contour(s, 0.01);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientTail);
  }
  const auto c = direct_sampling_contour(s, 0.05);
  CHECK(!c.warnings.empty());
}

TEST_CASE("joint exceedance on independent exponentials hits ln 10 on the diagonal") {
  RandomStream rng(21, 0);
  const std::size_t n = 400000;
  Points2 s(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    s(r, 0) = rng.exponential();
    s(r, 1) = rng.exponential();
  }
  // n_theta = 4 puts rays at 45, 135, 225, 315 degrees.
  const auto c = joint_exceedance_contour(s, 0.01, {0, 0}, {4, 1, 1});
  REQUIRE(c.points.size() == 4);
  CHECK(c.points[0].theta == doctest::Approx(M_PI / 4));
  CHECK(c.points[0].x1 == doctest::Approx(std::log(10.0)).epsilon(0.015));
  CHECK(c.points[0].x2 == doctest::Approx(c.points[0].x1));
  for (const auto& p : c.points) {
    if (p.attained) CHECK(quadrant_probability(s, p.theta, p.x1, p.x2) == doctest::Approx(0.01).epsilon(1e-12));
  }
}

TEST_CASE("joint exceedance quadrant probability is exact under monotone transforms") {
  const auto s = gaussian_sample(20000, 22);
  Points2 t = s;
  t.col(0) = s.col(0).array().exp();
  t.col(1) = s.col(1).array().cube();
  const double alpha = 0.005;
  const auto k = std::ceil(alpha * 20000 - 1e-9);
  const auto ct = joint_exceedance_contour(t, alpha, {1.0, 0.0});
  for (const auto& p : ct.points) {
    if (!p.attained) continue;
    CHECK(quadrant_probability(t, p.theta, p.x1, p.x2) == doctest::Approx(k / 20000.0).epsilon(1e-12));
    // Same quadrant after mapping the point back through the inverse transforms.
    CHECK(quadrant_probability(s, p.theta, std::log(p.x1), std::cbrt(p.x2)) ==
          doctest::Approx(k / 20000.0).epsilon(1e-12));
  }
}

TEST_CASE("joint exceedance under perfect dependence collapses the off-diagonal quadrants") {
  RandomStream rng(23, 0);
  Points2 s(10000, 2);
  for (Eigen::Index r = 0; r < s.rows(); ++r) s(r, 0) = s(r, 1) = rng.normal();
  const auto c = joint_exceedance_contour(s, 0.01, {0, 0}, {4, 1, 1});
  CHECK(c.points[0].attained);
  CHECK(!c.points[1].attained);  // X1 < 0 < X2 never happens
  CHECK(!c.points[3].attained);
  CHECK(!c.warnings.empty());
}

TEST_CASE("isodensity on an analytic standard normal recovers the HDR radius") {
  auto phi2 = [](double x, double y) { return std::exp(-0.5 * (x * x + y * y)) / (2 * M_PI); };
  const auto g = density_grid(phi2, {-6, -6}, {6, 6}, 400);
  const auto c = isodensity_contour(g, 0.99);
  const double r = std::sqrt(-2 * std::log(0.01));
  CHECK(r == doctest::Approx(3.035).epsilon(1e-3));
  for (const auto& p : c.points) CHECK(std::abs(std::hypot(p.x1, p.x2) - r) < 0.02);
  CHECK(c.extra.empty());
  for (std::size_t i = 1; i < c.points.size(); ++i) CHECK(c.points[i].theta >= c.points[i - 1].theta);
}

TEST_CASE("isodensity: two separated modes give two loops") {
  auto mix = [](double x, double y) {
    auto b = [](double u, double v) { return std::exp(-0.5 * (u * u + v * v)) / (2 * M_PI); };
    return 0.5 * b(x + 5, y) + 0.5 * b(x - 5, y);
  };
  const auto g = density_grid(mix, {-11, -6}, {11, 6}, 400);
  const auto c = isodensity_contour(g, 0.9);
  CHECK(c.extra.size() == 1);
}

TEST_CASE("isodensity from a KDE sits on a constant estimated density") {
  const auto s = gaussian_sample(20000, 31);
  KdeOptions ko;
  const auto g = kde_grid(s, ko);
  const auto c = isodensity_contour(g, 0.95);
  for (const auto& p : c.points) CHECK(std::abs(g.at(p.x1, p.x2) / c.level - 1) < 0.02);
  // Binned estimate against the direct kernel sum.
  const auto h = g.bandwidth;
  CHECK(g.at(0.5, -0.3) == doctest::Approx(kde_exact(s, h, 0.5, -0.3)).epsilon(0.01));
}

TEST_CASE("isodensity fails when the level set reaches the grid edge") {
  auto flat = [](double, double) { return 1.0; };
  const auto g = density_grid(flat, {0, 0}, {1, 1}, 50);
  try {
    isodensity_contour(g, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
  }
}

TEST_CASE("IFORM radius and identity-model circle") {
  const double beta = iform_radius(100, 2922);
  CHECK(beta == doctest::Approx(upper_normal_oracle(1.0 / 292200)).epsilon(1e-9));
  CHECK(beta == doctest::Approx(4.50).epsilon(2e-3));
  IdentityFactorization id;
  const auto c = iform_contour(id, 100, 2922, 90);
  for (const auto& p : c.points) CHECK(std::abs(std::hypot(p.x1, p.x2) - beta) < 1e-12);
}

TEST_CASE("IFORM through the hierarchical model: u2 = 0 gives the conditional median") {
  HierarchicalModel m;
  m.shape = 1.5;
  m.scale = 3.0;
  const auto c = iform_contour_radius(m, 3.0, 4);
  const double h = c.points[0].x1;
  const double hs_oracle = 3.0 * std::pow(-std::log(0.5 * std::erfc(3.0 / std::sqrt(2.0))), 1 / 1.5);
  CHECK(h == doctest::Approx(hs_oracle).epsilon(1e-10));
  CHECK(c.points[0].x2 == doctest::Approx(std::exp(m.log_tp_mean(h))).epsilon(1e-10));
}

TEST_CASE("enclosed fraction matches an analytic square") {
  const auto sq = polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  RandomStream rng(41, 0);
  Points2 s(100000, 2);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    s(r, 0) = rng.uniform(-1, 3);
    s(r, 1) = rng.uniform(-1, 1);
  }
  const auto oracle = ((s.col(0).array() > 0) && (s.col(0).array() < 1) && (s.col(1).array() > 0)).count();
  CHECK(enclosed_fraction(sq, s) == doctest::Approx(static_cast<double>(oracle) / 100000.0).epsilon(1e-12));
}

TEST_CASE("convexity check") {
  CHECK(is_convex(polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}).points));
  CHECK(!is_convex(polygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}).points));
  // Pentagram: every turn has the same sign but it winds twice.
  std::vector<std::array<double, 2>> star;
  for (int k = 0; k < 5; ++k) star.push_back({std::cos(4 * M_PI * k / 5), std::sin(4 * M_PI * k / 5)});
  CHECK(!is_convex(polygon(star).points));
}

TEST_CASE("calibration hits the target content on an independent sample") {
  const auto fit = gaussian_sample(100000, 51);
  const auto check = gaussian_sample(100000, 52);
  auto builder = [&](double a) { return direct_sampling_contour(fit, a); };
  auto content = [&](const Contour& c) { return enclosed_fraction(c, check); };
  CalibrationOptions o;
  o.alpha_lo = 1e-4;
  o.alpha_hi = 0.2;
  o.tol = 0.002;
  const auto r = calibrate_enclosed_probability(builder, content, 0.99, o);
  CHECK(!r.at_bound);
  CHECK(std::abs(r.content - 0.99) <= 0.002);
  CHECK(r.contour.enclosed_p == r.content);

  o.alpha_lo = 0.05;
  const auto b = calibrate_enclosed_probability(builder, content, 0.99, o);
  CHECK(b.at_bound);
  CHECK(b.alpha == 0.05);
}

TEST_CASE("Monte Carlo failure probability of a linear limit state") {
  auto g = [](double x1, double) { return 3.0 - x1; };
  auto draw = [](RandomStream& r) { return std::array<double, 2>{r.normal(), r.normal()}; };
  const auto f = failure_probability_mc(g, draw, 1000000, 61);
  const double truth = 0.5 * std::erfc(3.0 / std::sqrt(2.0));
  CHECK(std::abs(f.p - truth) < 4 * f.standard_error);
  CHECK(f.standard_error == doctest::Approx(std::sqrt(f.p * (1 - f.p) / 1e6)));
  const auto again = failure_probability_mc(g, draw, 1000000, 61);
  CHECK(again.p == f.p);
}

TEST_CASE("governing point takes the maximum and the first of ties") {
  const auto c = polygon({{0, 0}, {2, 1}, {2, 3}, {0, 3}});
  CHECK(find_governing_point(c, [](double x, double) { return x; }) == 1);
  CHECK(find_governing_point(c, [](double, double) { return 1.0; }) == 0);
}

TEST_CASE("frontier mask flags points near the reference cloud") {
  const auto ref = gaussian_sample(5000, 71);
  const auto c = polygon({{0.1, 0.1}, {50, 50}, {-0.2, 0.3}});
  const auto m = frontier_mask(c, ref, 0.5);
  CHECK(m == std::vector<bool>{true, false, true});
}

TEST_CASE("method names round trip") {
  for (auto m : {ContourMethod::DirectSampling, ContourMethod::JointExceedance, ContourMethod::Isodensity,
                 ContourMethod::Iform}) {
    CHECK(parse_contour_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_contour_method("bogus"), Error);
}
