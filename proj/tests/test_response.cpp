#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "metocean/error.hpp"
#include "metocean/response.hpp"
#include "test_support.hpp"

using namespace metocean;

namespace {

const SyntheticParams kR3{2, 0.007, 7};
const SyntheticParams kR4{2, 0.005, 26};

struct FixedEnvironment final : EnvironmentModel {
  double hs = 10, tp = 7;
  StormEvent draw(RandomStream&) const override { return {hs, tp, 0, 1}; }
  std::string kind() const override { return "fixed"; }
};

HierarchicalModel truth() {
  HierarchicalModel m;
  m.shape = 1.5;
  m.scale = 3.0;
  return m;
}

Contour polygon(const std::vector<std::array<double, 2>>& v) {
  Contour c;
  for (const auto& p : v) c.points.push_back({0, p[0], p[1], true});
  return c;
}

}  // namespace

TEST_CASE("synthetic resonant response values") {
  CHECK(eval_synthetic(kR3, 10, 7) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(eval_synthetic(kR4, 10, 26) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(eval_synthetic(kR3, 10, 7 + std::sqrt(1 / 0.007)) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(7 + std::sqrt(1 / 0.007) == doctest::Approx(18.95).epsilon(1e-3));
  CHECK_THROWS_AS(validate(ResponseModel::synthetic("bad", {2, -1, 7})), Error);
}

TEST_CASE("short-term distributions") {
  const auto ray = short_term_dist(ResponseModel::heave_like("h", {1, 0.001, 10}), 4, 10);
  REQUIRE(!ray.point_mass);
  const double s = ray.value;
  CHECK(s == doctest::Approx(4.0));
  // Mode of the density sits at the scale.
  double best_r = 0, best_f = -1;
  for (int i = 1; i < 20000; ++i) {
    const double r = i * 1e-3;
    if (ray.pdf(r) > best_f) best_f = ray.pdf(r), best_r = r;
  }
  CHECK(std::abs(best_r - s) < 2e-3);
  CHECK(ray.quantile(1 - std::exp(-1.0)) == doctest::Approx(s * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ray.cdf(ray.quantile(kExpMinusOne)) == doctest::Approx(kExpMinusOne).epsilon(1e-12));

  const auto det = short_term_dist(ResponseModel::synthetic("r3", kR3), 10, 7);
  CHECK(det.point_mass);
  for (double p : {0.0, 0.1, kExpMinusOne, 0.9}) CHECK(det.quantile(p) == 20.0);

  const auto zero = short_term_dist(ResponseModel::heave_like("h", {1, 0.001, 10}), 0, 10);
  CHECK(zero.point_mass);
  CHECK(zero.value == 0.0);
}

TEST_CASE("storm maximum is the product of sea-state CDFs") {
  const ShortTermDist a{false, 2.0};
  const std::vector<ShortTermDist> one{a};
  for (double r : {0.5, 1.0, 3.0}) CHECK(storm_max_cdf(one, r) == a.cdf(r));

  const int s = 6;
  const std::vector<ShortTermDist> many(s, a);
  const double median = 2.0 * std::sqrt(-2 * std::log(1 - std::pow(0.5, 1.0 / s)));
  CHECK(storm_max_cdf(many, median) == doctest::Approx(0.5).epsilon(1e-12));
  auto more = many;
  more.push_back({false, 1.0});
  for (double r : {0.5, 2.0, 4.0, 8.0}) CHECK(storm_max_cdf(more, r) <= storm_max_cdf(many, r));

  // Draws follow the product law.
  RandomStream rng(5, 0);
  const auto model = ResponseModel::heave_like("h", {1, 0.001, 10});
  StormEvent e{2.0, 10.0, 0, s};
  std::vector<double> draws(20000);
  for (auto& d : draws) d = draw_storm_max(model, e, StormProfile::Rectangular, rng);
  const auto ks = testing_support::ks_distance(draws, [&](double r) { return storm_max_cdf(many, r); });
  CHECK(ks < testing_support::ks_critical_1pct(draws.size()));
  // Peak-only ignores the storm size.
  StormEvent single{2.0, 10.0, 0, 1}, big{2.0, 10.0, 0, 40};
  RandomStream r1(6, 0), r2(6, 0);
  CHECK(draw_storm_max(model, big, StormProfile::PeakOnly, r1) == draw_storm_max(model, single, StormProfile::Rectangular, r2));
}

TEST_CASE("long-term distribution for identical single-state storms is a step with an atom") {
  FixedEnvironment env;
  LongTermOptions o;
  o.years = 3;
  o.lambda = 1;
  o.n_realisations = 5000;
  o.seed = 9;
  const auto est = long_term_dist(env, ResponseModel::synthetic("r3", kR3), o);
  const double r0 = 20.0;
  CHECK(std::abs(est.ecdf(r0 - 1e-9) - std::exp(-3.0)) < testing_support::dkw_bound(5000));
  CHECK(est.ecdf(r0) == 1.0);
}

TEST_CASE("closed-form and Monte Carlo long-term distributions agree") {
  const auto env = truth();
  const auto r4 = ResponseModel::synthetic("r4", kR4);
  LongTermOptions o;
  o.years = 50;
  o.lambda = 2;
  o.n_realisations = 1000;
  o.seed = 17;
  const auto est = long_term_dist(env, r4, o);
  const auto f = storm_response_distribution(env, r4);
  double sup = 0;
  for (std::size_t i = 0; i < est.sorted_max.size(); ++i) {
    const double r = est.sorted_max[i];
    const double F = long_term_cdf(f, o.lambda, o.years, r);
    sup = std::max({sup, std::abs(F - static_cast<double>(i + 1) / 1000.0), std::abs(F - static_cast<double>(i) / 1000.0)});
  }
  CHECK(sup < testing_support::dkw_bound(1000));

  // exp(-1) level: one expected exceedance in N years.
  auto q_closed = [&](double years) {
    double lo = 0, hi = 200;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (long_term_cdf(f, o.lambda, years, mid) < kExpMinusOne ? lo : hi) = mid;
    }
    return hi;
  };
  const double q = q_closed(o.years);
  CHECK(o.lambda * o.years * (1 - f.cdf(q)) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(est.ecdf(q) - kExpMinusOne) < testing_support::dkw_bound(1000));
  CHECK(q_closed(10) <= q_closed(50));
  CHECK(q_closed(50) <= q_closed(100));
}

TEST_CASE("contour-based quantiles") {
  const auto c = polygon({{1, 5}, {6, 8}, {9, 12}, {4, 14}});
  const auto r3 = ResponseModel::synthetic("r3", kR3);
  const std::vector<bool> all(4, true);
  const auto point = contour_response_point(c, r3, ContourMode::Point, all);
  CHECK(point.used == std::vector<std::size_t>{2});
  CHECK(point.q_C == eval_synthetic(kR3, 9, 12));

  const auto one = contour_response_point(c, r3, ContourMode::Frontier, all, 1);
  CHECK(one.q_C == point.q_C);

  const auto same = polygon({{3, 9}, {3, 9}, {3, 9}});
  const auto heave = ResponseModel::heave_like("h", {1, 0.01, 10});
  const auto mix = contour_response_point(same, heave, ContourMode::Frontier, std::vector<bool>(3, true), 3);
  CHECK(mix.q_C == doctest::Approx(short_term_dist(heave, 3, 9).quantile(kExpMinusOne)).epsilon(1e-10));

  try {
    contour_response_point(c, r3, ContourMode::Frontier, std::vector<bool>(4, false));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("widen") != std::string::npos);
  }

  // Deterministic point mixture: smallest value with F >= p.
  const std::vector<ShortTermDist> atoms{{true, 1}, {true, 2}, {true, 3}};
  CHECK(mixture_quantile(atoms, 0.3) == doctest::Approx(1.0));
  CHECK(mixture_quantile(atoms, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("governing point of an hs-monotone response is the max-hs point") {
  const auto env = truth();
  const auto sample = to_points(simulate_events(env, 200000, 3));
  const auto c = direct_sampling_contour(sample, 0.001);
  const auto model = ResponseModel::base_shear_like("bs");
  const auto g = find_governing_point(c, [&](double h, double) { return ResponseModel::synthetic("lin", {1, 1e-9, 10}).level(h, 10); });
  CHECK(g == max_hs_point(c));
  CHECK(model.level(2, 10) < model.level(3, 10));
}

TEST_CASE("inflation factor is invariant to rescaling a deterministic response") {
  const auto env = truth();
  const auto sample = to_points(simulate_events(env, 200000, 4));
  const auto c = direct_sampling_contour(sample, 0.001);
  LongTermOptions o;
  o.years = 20;
  o.lambda = 2;
  o.n_realisations = 300;
  o.seed = 2;
  std::vector<double> deltas;
  for (double k : {1.0, 3.5}) {
    const auto m = ResponseModel::synthetic("r4", {2 * k, 0.005, 26});
    const auto est = long_term_dist(env, m, o);
    const auto q = contour_response_point(c, m, ContourMode::Point, {});
    deltas.push_back(inflation_factor(est.q_R, q.q_C));
  }
  CHECK(deltas[0] == doctest::Approx(deltas[1]).epsilon(1e-12));
  CHECK(inflation_factor(2.0, 2.0) == 1.0);
  CHECK(inflation_factor(1.09, 1.0) == doctest::Approx(1.09));
  CHECK_THROWS_AS(inflation_factor(1.0, 0.0), Error);
}

TEST_CASE("response heatmap aggregation") {
  const std::vector<RealisationMax> one{{5.0, 1.5, 10.5}};
  auto cells = response_heatmap(one, {0, 4}, {5, 15}, 4, 10);
  std::size_t filled = 0;
  for (const auto& c : cells) {
    if (c.count == 0) {
      CHECK(std::isnan(c.mean));
      continue;
    }
    ++filled;
    CHECK(c.i == 1);
    CHECK(c.j == 5);
    CHECK(c.mean == 5.0);
    CHECK(c.min == 5.0);
    CHECK(c.max == 5.0);
  }
  CHECK(filled == 1);

  const std::vector<RealisationMax> two{{1.0, 1.2, 10.1}, {3.0, 1.3, 10.2}};
  cells = response_heatmap(two, {0, 4}, {5, 15}, 4, 10);
  const auto& c = cells[1 * 10 + 5];
  CHECK(c.count == 2);
  CHECK(c.mean == 2.0);
  CHECK(c.min == 1.0);
  CHECK(c.max == 3.0);
  CHECK_THROWS_AS(response_heatmap({}, {0, 4}, {5, 15}, 4, 10), Error);
}

TEST_CASE("driving conditions inside a contour are counted") {
  const auto sq = polygon({{0, 0}, {4, 0}, {4, 4}, {0, 4}});
  const std::vector<RealisationMax> r{{1, 1, 1}, {1, 5, 1}, {1, 3, 3}, {0, std::nan(""), std::nan("")}};
  CHECK(count_inside(sq, r) == 2);
}

TEST_CASE("neighbourhood quantile uses realisations close to the contour") {
  // Square with max-hs point (4, 0) first on ties; frontier = right edge only.
  const auto c = polygon({{4, 0}, {4, 4}, {0, 4}, {0, 0}});
  std::vector<bool> frontier = {true, true, false, false};
  std::vector<RealisationMax> rs;
  for (int i = 0; i < 9; ++i) rs.push_back({static_cast<double>(i + 1), 4.1, 0.1 * i});  // near (4, 0)
  rs.push_back({100, 4.0, 3.9});   // near (4, 4) only
  rs.push_back({500, 0.0, 0.0});   // near a non-frontier vertex
  rs.push_back({700, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});

  const auto pt = neighbourhood_response(c, ContourMode::Point, frontier, rs, {1, 1}, 1.0, 0.5);
  CHECK(pt.n_samples == 9);
  CHECK(pt.q_C == doctest::Approx(5.0));  // type-7 median of 1..9

  const auto fr = neighbourhood_response(c, ContourMode::Frontier, frontier, rs, {1, 1}, 1.0, 1.0);
  CHECK(fr.n_samples == 10);
  CHECK(fr.q_C == doctest::Approx(100.0));

  // Scaling hs by 10 and the radius scale with it leaves the selection unchanged.
  auto c10 = c;
  for (auto& p : c10.points) p.x1 *= 10;
  auto rs10 = rs;
  for (auto& r : rs10) r.hs *= 10;
  const auto pt10 = neighbourhood_response(c10, ContourMode::Point, frontier, rs10, {10, 1}, 1.0, 0.5);
  CHECK(pt10.n_samples == 9);
  CHECK(pt10.q_C == doctest::Approx(pt.q_C));

  CHECK_THROWS_AS(neighbourhood_response(c, ContourMode::Point, frontier, rs, {1, 1}, 0.01), Error);
  CHECK_THROWS_AS(neighbourhood_response(c, ContourMode::Point, frontier, rs, {1, 1}, 0.0), Error);
}
