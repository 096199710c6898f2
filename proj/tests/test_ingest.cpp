#include <cmath>
#include <vector>

#include "doctest.h"
#include "metocean/error.hpp"
#include "metocean/ingest.hpp"

using namespace metocean;

namespace {

std::vector<SeaStateRecord> series(const std::vector<double>& hs, double t0 = 0, double cadence_h = 3) {
  std::vector<SeaStateRecord> r;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    r.push_back({t0 + static_cast<double>(i) * cadence_h * 3600.0, hs[i], 8.0 + hs[i], std::nullopt});
  }
  return r;
}

// Brute-force storm count: maximal runs of exceedances, merging runs whose
// separating below-threshold stretch is shorter than the gap (in samples).
std::size_t brute_force_storms(const std::vector<double>& hs, double threshold, std::size_t gap_samples) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (hs[i] <= threshold) continue;
    std::size_t j = i;
    while (j + 1 < hs.size() && hs[j + 1] > threshold) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  std::size_t storms = runs.empty() ? 0 : 1;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const std::size_t below = runs[r].first - runs[r - 1].second - 1;
    if (below >= gap_samples) ++storms;
  }
  return storms;
}

}  // namespace

TEST_CASE("load_csv parses valid rows and reports rejects") {
  const auto ok = parse_csv("time,hs,tp\n0,1.0,8\n10800,2.0,9\n21600,1.5,7\n");
  CHECK(ok.records.size() == 3);
  CHECK(ok.rejects.empty());
  CHECK_FALSE(ok.has_covariate);

  const auto nan = parse_csv("time,hs,tp\n0,1.0,8\n10800,NaN,9\n21600,1.5,7\n");
  CHECK(nan.records.size() == 2);
  CHECK(nan.rejects.size() == 1);
  CHECK(nan.rejects[0].line == 3);

  const auto unsorted = parse_csv("time,hs,tp,dir\n21600,1.5,7,10\n0,1.0,8,370\n10800,2.0,9,90\n");
  REQUIRE(unsorted.records.size() == 3);
  CHECK(unsorted.records[0].time == 0);
  CHECK(unsorted.records[1].time == 10800);
  CHECK(unsorted.records[2].time == 21600);
  CHECK(unsorted.has_covariate);
  CHECK(*unsorted.records[0].covariate == doctest::Approx(10.0));
}

TEST_CASE("load_csv structural errors") {
  CHECK_THROWS_AS(parse_csv(""), Error);
  try {
    parse_csv("time,hs\n0,1\n");
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
  }
  try {
    load_csv("/nonexistent/file.csv");
    FAIL("expected input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  const auto neg = parse_csv("time,hs,tp\n0,-1,8\n3600,1,0\n7200,1,abc\n10800,1,9\n");
  CHECK(neg.records.size() == 1);
  CHECK(neg.rejects.size() == 3);
}

TEST_CASE("ISO-8601 timestamps") {
  CHECK(*parse_timestamp("1970-01-01T00:00:00Z") == 0.0);
  CHECK(*parse_timestamp("1970-01-02") == 86400.0);
  CHECK(*parse_timestamp("2000-03-01T03:00") == doctest::Approx(951879600.0));
  CHECK(*parse_timestamp("951879600") == 951879600.0);
  CHECK_FALSE(parse_timestamp("2000-13-01").has_value());
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
}

TEST_CASE("decluster: single run, two runs, and no exceedances") {
  DeclusterOptions opt;
  opt.threshold = 2.0;
  opt.min_gap_hours = 24;
  opt.cadence_hours = 3;

  const auto one = decluster(series({1, 1, 2.5, 3, 4.2, 3.1, 1, 1}), opt);
  REQUIRE(one.storms.size() == 1);
  CHECK(one.storms[0].peak_hs == 4.2);
  CHECK(one.storms[0].assoc_tp == doctest::Approx(12.2));
  CHECK(one.storms[0].n_sea_states == 4);

  // Two runs separated by 10 below-threshold states (30 h > 24 h).
  std::vector<double> hs = {1, 3, 5, 3};
  for (int i = 0; i < 10; ++i) hs.push_back(1);
  hs.insert(hs.end(), {4, 6, 2.5, 1});
  const auto two = decluster(series(hs), opt);
  CHECK(two.storms.size() == brute_force_storms(hs, 2.0, 8));
  CHECK(two.storms.size() == 2);

  // Separation of 4 states (12 h) merges them.
  std::vector<double> close = {1, 3, 5, 1, 1, 1, 1, 6, 1};
  const auto merged = decluster(series(close), opt);
  CHECK(merged.storms.size() == brute_force_storms(close, 2.0, 8));
  CHECK(merged.storms.size() == 1);
  CHECK(merged.storms[0].peak_hs == 6);

  const auto none = decluster(series(std::vector<double>(100, 1.0)), opt);
  CHECK(none.storms.empty());
  CHECK(none.rate_per_year == 0);
  CHECK_FALSE(none.warnings.empty());
}

TEST_CASE("decluster: brute-force agreement on a pseudo-random series") {
  std::vector<double> hs;
  std::uint64_t state = 12345;
  for (int i = 0; i < 5000; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    hs.push_back(static_cast<double>(state >> 40) / static_cast<double>(1ULL << 24) * 4.0);
  }
  DeclusterOptions opt;
  opt.threshold = 3.6;
  opt.min_gap_hours = 24;
  opt.cadence_hours = 3;
  const auto res = decluster(series(hs), opt);
  CHECK(res.storms.size() == brute_force_storms(hs, 3.6, 8));
  std::size_t states = 0;
  for (const auto& s : res.storms) states += static_cast<std::size_t>(s.n_sea_states);
  CHECK(states <= hs.size());
}

TEST_CASE("decluster: idempotent on the peaks series") {
  std::vector<double> hs;
  for (int i = 0; i < 2000; ++i) hs.push_back(2.0 + 1.5 * std::sin(i * 0.13) + 0.8 * std::sin(i * 0.029));
  DeclusterOptions opt;
  opt.threshold = 3.5;
  opt.cadence_hours = 3;
  const auto first = decluster(series(hs), opt);
  REQUIRE(first.storms.size() > 3);

  std::vector<SeaStateRecord> peaks;
  for (const auto& s : first.storms) {
    // Time of the peak: scan within the storm window.
    peaks.push_back({s.start, s.peak_hs, s.assoc_tp, s.covariate});
  }
  const auto second = decluster(peaks, opt);
  REQUIRE(second.storms.size() == first.storms.size());
  for (std::size_t i = 0; i < first.storms.size(); ++i) {
    CHECK(second.storms[i].peak_hs == first.storms[i].peak_hs);
    CHECK(second.storms[i].assoc_tp == first.storms[i].assoc_tp);
  }
}

TEST_CASE("decluster: rate scales inversely with span under quiet padding") {
  std::vector<double> hs = {1, 3, 5, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 4, 6, 1};
  DeclusterOptions opt;
  opt.threshold = 2.0;
  opt.cadence_hours = 3;
  const auto base = decluster(series(hs), opt);
  std::vector<double> padded = hs;
  padded.resize(hs.size() * 4, 1.0);
  const auto longer = decluster(series(padded), opt);
  REQUIRE(base.storms.size() == longer.storms.size());
  CHECK(longer.rate_per_year * 4 == doctest::Approx(base.rate_per_year));
}

TEST_CASE("decluster: data gaps terminate clusters") {
  auto recs = series({1, 3, 5, 3, 4, 1});
  for (std::size_t i = 3; i < recs.size(); ++i) recs[i].time += 2 * 3600.0 * 3;  // outage before index 3
  DeclusterOptions opt;
  opt.threshold = 2.0;
  opt.cadence_hours = 3;
  const auto res = decluster(recs, opt);
  CHECK(res.storms.size() == 2);
}

TEST_CASE("allocate_bins") {
  const std::vector<double> edges = {0, 180, 360};
  const std::vector<double> v90 = {90};
  auto b = allocate_bins(v90, edges);
  CHECK(b.n_bins == 2);
  CHECK(b.allocation[0] == 0);

  const std::vector<double> v360 = {360, 180, 359.9};
  b = allocate_bins(v360, edges);
  CHECK(b.allocation[0] == 0);  // wraps
  CHECK(b.allocation[1] == 1);
  CHECK(b.allocation[2] == 1);
  const auto counts = b.counts();
  CHECK(counts[0] + counts[1] == 3);

  const auto none = single_bin(5);
  CHECK(none.n_bins == 1);
  CHECK(none.allocation == std::vector<std::size_t>(5, 0));

  const std::vector<double> linear_edges = {0, 1, 2};
  const std::vector<double> outside = {2.5};
  CHECK_THROWS_AS(allocate_bins(outside, linear_edges), Error);
}

TEST_CASE("empirical quantile (type 7)") {
  const std::vector<double> v = {4, 1, 3, 2};
  CHECK(empirical_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile(v, 0.0) == 1);
  CHECK(empirical_quantile(v, 1.0) == 4);
}
