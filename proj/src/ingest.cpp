#include "metocean/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "metocean/error.hpp"

namespace metocean {

namespace {

constexpr double kSecondsPerYear = 365.25 * 86400.0;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    out.push_back(trim(std::string_view(line).substr(begin, comma - begin)));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

int parse_int(std::string_view s, bool& ok) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) ok = false;
  return v;
}

}  // namespace

std::optional<double> parse_timestamp(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') {
    auto v = parse_number(s);
    if (v && std::isfinite(*v)) return v;
    return std::nullopt;
  }
  bool ok = true;
  const int year = parse_int(std::string_view(s).substr(0, 4), ok);
  const int month = parse_int(std::string_view(s).substr(5, 2), ok);
  const int day = parse_int(std::string_view(s).substr(8, 2), ok);
  int hour = 0, minute = 0;
  double second = 0;
  std::string rest = s.substr(10);
  if (!rest.empty() && (rest.back() == 'Z' || rest.back() == 'z')) rest.pop_back();
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    if (rest.size() < 6 || rest[3] != ':') return std::nullopt;
    hour = parse_int(std::string_view(rest).substr(1, 2), ok);
    minute = parse_int(std::string_view(rest).substr(4, 2), ok);
    if (rest.size() > 6) {
      if (rest[6] != ':') return std::nullopt;
      const auto sec = parse_number(rest.substr(7));
      if (!sec) return std::nullopt;
      second = *sec;
    }
  }
  if (!ok) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 ||
      second >= 61) {
    return std::nullopt;
  }
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second;
}

LoadResult parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::Input, "csv: empty file");

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto time_col = column(schema.time);
  const auto hs_col = column(schema.hs);
  const auto tp_col = column(schema.tp);
  const auto cov_col = schema.covariate.empty() ? std::nullopt : column(schema.covariate);
  for (const auto& [name, col] : {std::pair{schema.time, time_col}, std::pair{schema.hs, hs_col},
                                  std::pair{schema.tp, tp_col}}) {
    if (!col) throw Error(ErrorKind::Schema, "csv: missing column '" + name + "'");
  }

  LoadResult result;
  result.has_covariate = cov_col.has_value();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };
    const std::size_t needed = std::max({*time_col, *hs_col, *tp_col, cov_col.value_or(0)}) + 1;
    if (fields.size() < needed) {
      reject("too few fields");
      continue;
    }
    const auto t = parse_timestamp(fields[*time_col]);
    const auto hs = parse_number(fields[*hs_col]);
    const auto tp = parse_number(fields[*tp_col]);
    if (!t) {
      reject("invalid time '" + fields[*time_col] + "'");
      continue;
    }
    if (!hs || !std::isfinite(*hs) || *hs < 0) {
      reject("invalid hs '" + fields[*hs_col] + "'");
      continue;
    }
    if (!tp || !std::isfinite(*tp) || *tp <= 0) {
      reject("invalid tp '" + fields[*tp_col] + "'");
      continue;
    }
    SeaStateRecord rec{*t, *hs, *tp, std::nullopt};
    if (cov_col) {
      const auto c = parse_number(fields[*cov_col]);
      if (!c || !std::isfinite(*c)) {
        reject("invalid covariate '" + fields[*cov_col] + "'");
        continue;
      }
      rec.covariate = std::fmod(std::fmod(*c, 360.0) + 360.0, 360.0);
    }
    result.records.push_back(rec);
  }

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  // Duplicated timestamps violate the strictly increasing invariant; keep the first.
  std::vector<SeaStateRecord> unique;
  unique.reserve(result.records.size());
  for (const auto& r : result.records) {
    if (!unique.empty() && unique.back().time == r.time) {
      result.rejects.push_back({0, "duplicate timestamp " + std::to_string(r.time)});
      continue;
    }
    unique.push_back(r);
  }
  result.records = std::move(unique);
  if (result.records.empty()) throw Error(ErrorKind::Input, "csv: no valid records");
  return result;
}

LoadResult load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Input, "csv: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), schema);
}

void write_reject_report(const std::string& path, const LoadResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Input, "cannot write reject report '" + path + "'");
  out << "rejected " << result.rejects.size() << '\n';
  for (const auto& r : result.rejects) out << "line " << r.line << ": " << r.reason << '\n';
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::Input, "quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> values, double p) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return sorted_quantile(v, p);
}

DeclusterResult decluster(std::span<const SeaStateRecord> records, const DeclusterOptions& options) {
  if (!options.threshold && !(options.threshold_q > 0 && options.threshold_q < 1)) {
    throw Error(ErrorKind::Config, "decluster: threshold_q must lie in (0,1)");
  }
  if (!(options.min_gap_hours > 0)) throw Error(ErrorKind::Config, "decluster: min_gap must be > 0");
  DeclusterResult out;
  if (records.empty()) {
    out.warnings.push_back("no records");
    return out;
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].time > records[i - 1].time)) {
      throw Error(ErrorKind::Input, "decluster: records not strictly increasing in time");
    }
  }

  double cadence_s = 0;
  if (options.cadence_hours) {
    cadence_s = *options.cadence_hours * 3600.0;
  } else if (records.size() > 1) {
    std::vector<double> diffs;
    diffs.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) diffs.push_back(records[i].time - records[i - 1].time);
    std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2), diffs.end());
    cadence_s = diffs[diffs.size() / 2];
  } else {
    cadence_s = 3 * 3600.0;
  }
  out.cadence_hours = cadence_s / 3600.0;

  if (options.threshold) {
    out.threshold = *options.threshold;
  } else {
    std::vector<double> hs;
    hs.reserve(records.size());
    for (const auto& r : records) hs.push_back(r.hs);
    out.threshold = empirical_quantile(hs, options.threshold_q);
  }
  out.span_years = (records.back().time - records.front().time + cadence_s) / kSecondsPerYear;

  const double min_gap_s = options.min_gap_hours * 3600.0;
  // Records further apart than this are separated by missing data.
  const double gap_tolerance = 1.5 * cadence_s;

  bool open = false;
  std::size_t first_idx = 0, last_exceed_idx = 0, peak_idx = 0;
  double below_s = 0;

  auto close = [&] {
    if (!open) return;
    StormPeak peak;
    peak.peak_hs = records[peak_idx].hs;
    peak.assoc_tp = records[peak_idx].tp;
    peak.covariate = records[peak_idx].covariate;
    peak.start = records[first_idx].time;
    peak.end = records[last_exceed_idx].time;
    peak.n_sea_states = static_cast<int>(last_exceed_idx - first_idx + 1);
    out.storms.push_back(peak);
    open = false;
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0 && r.time - records[i - 1].time > gap_tolerance) {
      close();
      below_s = 0;
    }
    if (r.hs > out.threshold) {
      if (open && below_s >= min_gap_s) close();
      if (!open) {
        open = true;
        first_idx = i;
        peak_idx = i;
      }
      last_exceed_idx = i;
      if (r.hs > records[peak_idx].hs) peak_idx = i;
      below_s = 0;
    } else if (open) {
      below_s += cadence_s;
    }
  }
  close();

  out.rate_per_year = out.span_years > 0 ? static_cast<double>(out.storms.size()) / out.span_years : 0;
  if (out.storms.empty()) out.warnings.push_back("no threshold exceedances; storm rate is zero");
  return out;
}

std::vector<std::size_t> CovariateBinning::counts() const {
  std::vector<std::size_t> c(n_bins, 0);
  for (auto k : allocation) ++c[k];
  return c;
}

std::size_t CovariateBinning::bin_of(double value) const {
  if (edges.empty()) return 0;
  const double lo = edges.front();
  const double hi = edges.back();
  double v = value;
  const bool periodic = std::abs((hi - lo) - 360.0) < 1e-9;
  if (periodic) {
    v = lo + std::fmod(std::fmod(v - lo, 360.0) + 360.0, 360.0);
  } else if (v < lo || v > hi || !std::isfinite(v)) {
    throw Error(ErrorKind::Allocation,
                "covariate value " + std::to_string(value) + " outside binning domain");
  }
  // upper_bound gives the first edge strictly greater than v; bins are [e_k, e_{k+1}).
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  auto k = static_cast<std::size_t>(it - edges.begin());
  k = k == 0 ? 0 : k - 1;
  return std::min(k, n_bins - 1);
}

CovariateBinning allocate_bins(std::span<const double> values, std::span<const double> edges) {
  CovariateBinning b;
  if (edges.empty()) return single_bin(values.size());
  if (edges.size() < 2) throw Error(ErrorKind::Config, "binning needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error(ErrorKind::Config, "bin edges must be increasing");
  }
  b.edges.assign(edges.begin(), edges.end());
  b.n_bins = edges.size() - 1;
  b.allocation.reserve(values.size());
  for (double v : values) b.allocation.push_back(b.bin_of(v));
  return b;
}

CovariateBinning single_bin(std::size_t n) {
  CovariateBinning b;
  b.n_bins = 1;
  b.allocation.assign(n, 0);
  return b;
}

}  // namespace metocean
