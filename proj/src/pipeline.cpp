#include "metocean/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "metocean/error.hpp"

namespace metocean {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      return json_to_double(j.at(key));
    } else {
      return j.at(key).get<T>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config field '") + key + "': " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("config field '") + key + "': " + e.what());
  }
}

std::vector<double> doubles_or(const Json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_array()) throw Error(ErrorKind::Config, std::string("config field '") + key + "' must be an array");
  std::vector<double> v;
  for (const auto& x : j.at(key)) {
    try {
      v.push_back(json_to_double(x));
    } catch (const Error&) {
      throw Error(ErrorKind::Config, std::string("config field '") + key + "' must hold numbers");
    }
  }
  return v;
}

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config section '" + where + "' must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw Error(ErrorKind::Config, "unknown config field '" + where + (where.empty() ? "" : ".") + k + "'");
  }
}

const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  return j.contains(key) ? j.at(key) : empty;
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

std::vector<ResponseModel> default_responses() {
  return {ResponseModel::synthetic("R3", {2, 0.007, 7}), ResponseModel::synthetic("R4", {2, 0.005, 26}),
          ResponseModel::base_shear_like("base-shear", 0.5, 4.0, 1.8),
          ResponseModel::heave_like("heave", {1, 0.01, 16})};
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (c.input_path.empty()) fail("input.path is required");
  if (!c.seed) fail("seed is required (config 'seed' or --seed)");
  for (const auto* p : {&c.hs_marginal, &c.tp_marginal}) {
    if (!(p->tau > 0 && p->tau < 1)) fail("marginal.tau must lie in (0, 1)");
    if (p->cv_folds < 2) fail("marginal.cv_folds must be at least 2");
    if (p->penalty_grid.empty()) fail("marginal.penalty_grid must not be empty");
  }
  if (!(c.ce.kappa > 0 && c.ce.kappa < 1)) fail("dependence.kappa must lie in (0, 1)");
  if (c.ce.penalty_grid.empty()) fail("dependence.penalty_grid must not be empty");
  if (!(c.decluster.threshold_q > 0 && c.decluster.threshold_q < 1)) fail("decluster.threshold_q must lie in (0, 1)");
  if (!(c.decluster.min_gap_hours > 0)) fail("decluster.min_gap_hours must be positive");
  if (c.environment != "ppc-ce" && c.environment != "hierarchical") fail("environment must be 'ppc-ce' or 'hierarchical'");
  if (!(c.years > 0)) fail("simulation.years must be positive");
  if (c.n_realisations < 100) fail("simulation.n_realisations must be at least 100");
  if (c.contour_events < 1000) fail("simulation.contour_events must be at least 1000");
  if (c.T.empty()) fail("contour.T must not be empty");
  for (double t : c.T) {
    if (!(t > 0)) fail("contour.T values must be positive");
  }
  if (c.methods.empty()) fail("contour.methods must not be empty");
  for (const auto& m : c.methods) parse_contour_method(m);
  if (c.n_theta < 8) fail("contour.n_theta must be at least 8");
  if (c.smoothing_window < 1 || c.smoothing_window % 2 == 0) fail("contour.smoothing_window must be odd and positive");
  if (c.kde_grid < 16) fail("contour.kde_grid must be at least 16");
  if (!(c.frontier_radius > 0)) fail("contour.frontier_radius must be positive");
  if (std::find(c.T.begin(), c.T.end(), c.compare_T) == c.T.end()) fail("contour.compare_T must be one of contour.T");
  if (std::find(c.T.begin(), c.T.end(), c.inside_T) == c.T.end()) fail("contour.inside_T must be one of contour.T");
  if (!(c.p_C > 0 && c.p_C < 1) || !(c.p_R > 0 && c.p_R < 1)) fail("response.p_C and p_R must lie in (0, 1)");
  if (c.n_frontier < 1) fail("response.n_frontier must be at least 1");
  if (!(c.neighbourhood_radius > 0)) fail("response.neighbourhood_radius must be positive");
  if (c.responses.empty()) fail("response.models must not be empty");
  std::set<std::string> names;
  for (const auto& r : c.responses) {
    validate(r);
    if (r.name.empty() || r.name.find_first_of("/\\ ") != std::string::npos) fail("response names must be non-empty without spaces or slashes");
    if (!names.insert(r.name).second) fail("duplicate response name '" + r.name + "'");
  }
}

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

std::string longterm_csv(const LongTermEstimate& est) {
  std::string s = "realisation,max_response,hs,tp\n";
  for (std::size_t i = 0; i < est.realisations.size(); ++i) {
    const auto& r = est.realisations[i];
    s += std::to_string(i) + ',' + format_double(r.max_response) + ',' + format_double(r.hs) + ',' +
         format_double(r.tp) + '\n';
  }
  return s;
}

std::vector<RealisationMax> parse_longterm_csv(const std::string& text) {
  std::vector<RealisationMax> out;
  std::size_t pos = text.find('\n');
  if (text.rfind("realisation,max_response,hs,tp", 0) != 0 || pos == std::string::npos) {
    throw Error(ErrorKind::Schema, "long-term file: bad header");
  }
  while (pos + 1 < text.size()) {
    const auto end = text.find('\n', pos + 1);
    const std::string line = text.substr(pos + 1, end - pos - 1);
    pos = end == std::string::npos ? text.size() : end;
    if (line.empty()) continue;
    double v[4];
    std::size_t start = 0;
    for (int k = 0; k < 4; ++k) {
      const auto comma = line.find(',', start);
      const std::string f = line.substr(start, comma - start);
      v[k] = f == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f);
      start = comma + 1;
    }
    out.push_back({v[1], v[2], v[3]});
  }
  return out;
}

std::string heatmap_csv(const std::vector<HeatmapCell>& cells) {
  std::string s = "hs_lo,hs_hi,tp_lo,tp_hi,count,mean,min,max\n";
  for (const auto& c : cells) {
    s += format_double(c.hs_lo) + ',' + format_double(c.hs_hi) + ',' + format_double(c.tp_lo) + ',' +
         format_double(c.tp_hi) + ',' + std::to_string(c.count) + ',' + format_double(c.mean) + ',' +
         format_double(c.min) + ',' + format_double(c.max) + '\n';
  }
  return s;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

RunConfig parse_config(const Json& j, const std::string& config_dir) {
  allow_keys(j, "", {"input", "decluster", "marginal", "dependence", "hierarchical", "environment", "seed",
                     "simulation", "contour", "response", "output"});
  RunConfig c;
  c.config_dir = config_dir;

  const auto& in = section(j, "input");
  allow_keys(in, "input", {"path", "time_column", "hs_column", "tp_column", "covariate_column", "covariate_edges"});
  c.input_path = get_or<std::string>(in, "path", "");
  c.schema.time = get_or<std::string>(in, "time_column", c.schema.time);
  c.schema.hs = get_or<std::string>(in, "hs_column", c.schema.hs);
  c.schema.tp = get_or<std::string>(in, "tp_column", c.schema.tp);
  c.schema.covariate = get_or<std::string>(in, "covariate_column", c.schema.covariate);
  c.covariate_edges = doubles_or(in, "covariate_edges", {});

  const auto& dc = section(j, "decluster");
  allow_keys(dc, "decluster", {"threshold_q", "threshold", "min_gap_hours", "cadence_hours"});
  c.decluster.threshold_q = get_or<double>(dc, "threshold_q", c.decluster.threshold_q);
  if (dc.contains("threshold")) c.decluster.threshold = get_or<double>(dc, "threshold", 0);
  c.decluster.min_gap_hours = get_or<double>(dc, "min_gap_hours", c.decluster.min_gap_hours);
  if (dc.contains("cadence_hours")) c.decluster.cadence_hours = get_or<double>(dc, "cadence_hours", 0);

  const auto& mg = section(j, "marginal");
  allow_keys(mg, "marginal", {"tau", "penalty_grid", "cv_folds", "min_exceedances"});
  for (auto* p : {&c.hs_marginal, &c.tp_marginal}) {
    p->tau = get_or<double>(mg, "tau", p->tau);
    p->penalty_grid = doubles_or(mg, "penalty_grid", p->penalty_grid);
    p->cv_folds = get_or<int>(mg, "cv_folds", p->cv_folds);
    p->min_exceedances = get_or<std::size_t>(mg, "min_exceedances", p->min_exceedances);
  }

  const auto& dp = section(j, "dependence");
  allow_keys(dp, "dependence", {"kappa", "penalty_grid", "cv_folds", "min_exceedances"});
  c.ce.kappa = get_or<double>(dp, "kappa", c.ce.kappa);
  c.ce.penalty_grid = doubles_or(dp, "penalty_grid", c.ce.penalty_grid);
  c.ce.cv_folds = get_or<int>(dp, "cv_folds", c.ce.cv_folds);
  c.ce.min_exceedances = get_or<std::size_t>(dp, "min_exceedances", c.ce.min_exceedances);

  const auto& hi = section(j, "hierarchical");
  allow_keys(hi, "hierarchical", {"min_peaks", "moment_bins"});
  c.hierarchical.min_peaks = get_or<std::size_t>(hi, "min_peaks", c.hierarchical.min_peaks);
  c.hierarchical.moment_bins = get_or<std::size_t>(hi, "moment_bins", c.hierarchical.moment_bins);

  c.environment = get_or<std::string>(j, "environment", c.environment);
  if (j.contains("seed")) c.seed = get_or<std::uint64_t>(j, "seed", 0);

  const auto& sm = section(j, "simulation");
  allow_keys(sm, "simulation", {"years", "n_realisations", "contour_events"});
  c.years = get_or<double>(sm, "years", c.years);
  c.n_realisations = get_or<std::size_t>(sm, "n_realisations", c.n_realisations);
  c.contour_events = get_or<std::size_t>(sm, "contour_events", c.contour_events);

  const auto& ct = section(j, "contour");
  allow_keys(ct, "contour", {"methods", "T", "n_theta", "smoothing_window", "kde_grid", "frontier_radius", "compare_T",
                             "inside_T"});
  c.methods = get_or<std::vector<std::string>>(ct, "methods", c.methods);
  c.T = doubles_or(ct, "T", c.T);
  c.n_theta = get_or<int>(ct, "n_theta", c.n_theta);
  c.smoothing_window = get_or<int>(ct, "smoothing_window", c.smoothing_window);
  c.kde_grid = get_or<int>(ct, "kde_grid", c.kde_grid);
  c.frontier_radius = get_or<double>(ct, "frontier_radius", c.frontier_radius);
  c.compare_T = get_or<double>(ct, "compare_T", c.compare_T);
  c.inside_T = get_or<double>(ct, "inside_T", c.inside_T);

  const auto& rs = section(j, "response");
  allow_keys(rs, "response", {"models", "modes", "p_C", "p_R", "n_frontier", "neighbourhood_radius", "profile",
                              "heatmap", "density_points"});
  if (rs.contains("models")) {
    for (const auto& m : rs.at("models")) c.responses.push_back(response_from_json(m));
  } else {
    c.responses = default_responses();
  }
  if (rs.contains("modes")) {
    c.modes.clear();
    for (const auto& m : rs.at("modes")) {
      const auto s = m.get<std::string>();
      if (s == "point") {
        c.modes.push_back(ContourMode::Point);
      } else if (s == "frontier") {
        c.modes.push_back(ContourMode::Frontier);
      } else {
        throw Error(ErrorKind::Config, "unknown response mode '" + s + "'");
      }
    }
  }
  c.p_C = get_or<double>(rs, "p_C", c.p_C);
  c.p_R = get_or<double>(rs, "p_R", c.p_R);
  c.n_frontier = get_or<std::size_t>(rs, "n_frontier", c.n_frontier);
  c.neighbourhood_radius = get_or<double>(rs, "neighbourhood_radius", c.neighbourhood_radius);
  c.profile = parse_storm_profile(get_or<std::string>(rs, "profile", to_string(c.profile)));
  if (rs.contains("heatmap")) {
    const auto h = get_or<std::vector<std::size_t>>(rs, "heatmap", {});
    if (h.size() != 2 || h[0] == 0 || h[1] == 0) throw Error(ErrorKind::Config, "response.heatmap must be [n_hs, n_tp]");
    c.heatmap_hs = h[0];
    c.heatmap_tp = h[1];
  }
  c.density_points = get_or<std::size_t>(rs, "density_points", c.density_points);

  c.out_dir = get_or<std::string>(j, "output", c.out_dir);
  return c;
}

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::Config, "config file '" + path + "' not found");
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Config, "config is not valid JSON: " + std::string(e.what()));
  }
  auto dir = fs::path(path).parent_path().string();
  return parse_config(j, dir.empty() ? "." : dir);
}

Json materialize(const RunConfig& c) {
  Json responses = Json::array();
  for (const auto& r : c.responses) responses.push_back(to_json(r));
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  Json decl = {{"threshold_q", json_number(c.decluster.threshold_q)},
               {"min_gap_hours", json_number(c.decluster.min_gap_hours)}};
  if (c.decluster.threshold) decl["threshold"] = json_number(*c.decluster.threshold);
  if (c.decluster.cadence_hours) decl["cadence_hours"] = json_number(*c.decluster.cadence_hours);
  return {
      {"input",
       {{"path", c.input_path},
        {"time_column", c.schema.time},
        {"hs_column", c.schema.hs},
        {"tp_column", c.schema.tp},
        {"covariate_column", c.schema.covariate},
        {"covariate_edges", numbers(c.covariate_edges)}}},
      {"decluster", decl},
      {"marginal",
       {{"tau", json_number(c.hs_marginal.tau)},
        {"penalty_grid", numbers(c.hs_marginal.penalty_grid)},
        {"cv_folds", c.hs_marginal.cv_folds},
        {"min_exceedances", c.hs_marginal.min_exceedances}}},
      {"dependence",
       {{"kappa", json_number(c.ce.kappa)},
        {"penalty_grid", numbers(c.ce.penalty_grid)},
        {"cv_folds", c.ce.cv_folds},
        {"min_exceedances", c.ce.min_exceedances}}},
      {"hierarchical", {{"min_peaks", c.hierarchical.min_peaks}, {"moment_bins", c.hierarchical.moment_bins}}},
      {"environment", c.environment},
      {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
      {"simulation",
       {{"years", json_number(c.years)}, {"n_realisations", c.n_realisations}, {"contour_events", c.contour_events}}},
      {"contour",
       {{"methods", c.methods},
        {"T", numbers(c.T)},
        {"n_theta", c.n_theta},
        {"smoothing_window", c.smoothing_window},
        {"kde_grid", c.kde_grid},
        {"frontier_radius", json_number(c.frontier_radius)},
        {"compare_T", json_number(c.compare_T)},
        {"inside_T", json_number(c.inside_T)}}},
      {"response",
       {{"models", responses},
        {"modes", modes},
        {"p_C", json_number(c.p_C)},
        {"p_R", json_number(c.p_R)},
        {"n_frontier", c.n_frontier},
        {"neighbourhood_radius", json_number(c.neighbourhood_radius)},
        {"profile", to_string(c.profile)},
        {"heatmap", {c.heatmap_hs, c.heatmap_tp}},
        {"density_points", c.density_points}}},
  };
}

std::string config_hash(const RunConfig& c) { return fnv1a_hex(materialize(c).dump()); }

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Input:
    case ErrorKind::Schema: return 2;
    default: return 3;
  }
}

OutputLock::OutputLock(const std::string& dir) : path_((fs::path(dir) / ".lock").string()) {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    path_.clear();
    throw Error(ErrorKind::Config, "output directory '" + dir + "' is locked by another run (remove .lock if stale)");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  if (!path_.empty()) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  validate_config(config_);
  hash_ = config_hash(config_);
  fs::create_directories(config_.out_dir);
}

std::string Pipeline::path(const std::string& name) const { return (fs::path(config_.out_dir) / name).string(); }

std::string Pipeline::contour_name(const std::string& method, double T) {
  return "contour_" + method + "_T" + format_double(T);
}

Json Pipeline::sidecar(const std::string& kind) const {
  return {{"schema", kSchemaVersion}, {"kind", kind}, {"config_hash", hash_}, {"seed", *config_.seed}};
}

void Pipeline::require_hash(const Json& j, const std::string& what) const {
  if (!j.contains("config_hash") || j.at("config_hash") != hash_) {
    throw Error(ErrorKind::Config, what + " was produced with a different configuration (config hash mismatch); rerun the earlier stages");
  }
}

void Pipeline::record_time(const std::string& stage, std::chrono::steady_clock::time_point start) {
  timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json t = Json::object();
  if (fs::exists(path("timing.json"))) {
    try {
      t = read_json(path("timing.json"));
    } catch (const Error&) {
      t = Json::object();
    }
  }
  t[stage] = timings_[stage];
  write_json(path("timing.json"), t);
}

double Pipeline::storm_rate() const {
  const auto r = read_json(path("fit_report.json"));
  require_hash(r, "fit_report.json");
  return json_to_double(r.at("lambda"));
}

std::unique_ptr<EnvironmentModel> Pipeline::environment() const {
  if (config_.environment == "hierarchical") {
    const auto j = read_json(path("hierarchical.json"));
    require_hash(j, "hierarchical.json");
    return std::make_unique<HierarchicalModel>(hierarchical_from_json(j.at("model")));
  }
  const auto mj = read_json(path("marginal.json"));
  const auto cj = read_json(path("ce.json"));
  require_hash(mj, "marginal.json");
  require_hash(cj, "ce.json");
  Json joint = {{"schema", kSchemaVersion},     {"type", "ppc-ce"},
                {"hs", mj.at("hs")},            {"tp", mj.at("tp")},
                {"tp_given_hs", cj.at("tp_given_hs")}, {"hs_given_tp", cj.at("hs_given_tp")},
                {"p_extreme", cj.at("p_extreme")},     {"body", cj.at("body")}};
  return std::make_unique<JointExtremesModel>(joint_from_json(joint));
}

void Pipeline::fit() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto input = (fs::path(config_.config_dir) / config_.input_path).string();
  if (!fs::exists(input)) throw Error(ErrorKind::Input, "input file '" + input + "' not found");
  const auto text = read_text(input);
  const auto loaded = parse_csv(text, config_.schema);
  write_reject_report(path("rejects.txt"), loaded);
  const auto storms = decluster(loaded.records, config_.decluster);

  std::vector<double> hs, tp, cov;
  std::vector<int> sizes;
  std::string storms_text = "storm,start,end,peak_hs,assoc_tp,covariate,n_sea_states\n";
  for (std::size_t i = 0; i < storms.storms.size(); ++i) {
    const auto& s = storms.storms[i];
    hs.push_back(s.peak_hs);
    tp.push_back(s.assoc_tp);
    sizes.push_back(s.n_sea_states);
    if (s.covariate) cov.push_back(*s.covariate);
    storms_text += std::to_string(i) + ',' + format_double(s.start) + ',' + format_double(s.end) + ',' +
                   format_double(s.peak_hs) + ',' + format_double(s.assoc_tp) + ',' +
                   (s.covariate ? format_double(*s.covariate) : std::string("nan")) + ',' +
                   std::to_string(s.n_sea_states) + '\n';
  }
  write_text(path("storms.csv"), storms_text);
  if (hs.empty()) throw Error(ErrorKind::Fit, "no storms above the declustering threshold");

  CovariateBinning bins;
  if (config_.covariate_edges.empty()) {
    bins = single_bin(hs.size());
  } else {
    if (cov.size() != hs.size()) throw Error(ErrorKind::Input, "covariate edges given but some storms lack a covariate value");
    bins = allocate_bins(cov, config_.covariate_edges);
  }

  JointOptions jo{config_.hs_marginal, config_.tp_marginal, config_.ce};
  jo.hs.seed = jo.tp.seed = jo.ce.seed = *config_.seed;
  const auto joint = fit_joint_extremes(hs, tp, bins, jo);
  const auto hier = fit_hierarchical(hs, tp, config_.hierarchical);

  auto marginal = sidecar("marginal");
  marginal["hs"] = to_json(joint.hs);
  marginal["tp"] = to_json(joint.tp);
  write_json(path("marginal.json"), marginal);

  const auto jj = to_json(joint);
  auto ce = sidecar("conditional-extremes");
  for (const char* k : {"tp_given_hs", "hs_given_tp", "p_extreme", "body"}) ce[k] = jj.at(k);
  write_json(path("ce.json"), ce);

  auto hj = sidecar("hierarchical");
  hj["model"] = to_json(hier);
  write_json(path("hierarchical.json"), hj);

  auto report = sidecar("fit-report");
  report["input_hash"] = fnv1a_hex(text);
  report["n_records"] = loaded.records.size();
  report["n_rejected"] = loaded.rejects.size();
  report["n_storms"] = hs.size();
  report["lambda"] = json_number(storms.rate_per_year);
  report["threshold"] = json_number(storms.threshold);
  report["span_years"] = json_number(storms.span_years);
  report["cadence_hours"] = json_number(storms.cadence_hours);
  report["bin_counts"] = bins.counts();
  report["hs_penalty"] = json_number(joint.hs.penalty);
  report["tp_penalty"] = json_number(joint.tp.penalty);
  report["ce_penalty"] = {json_number(joint.tp_given_hs.penalty), json_number(joint.hs_given_tp.penalty)};
  std::vector<std::string> warnings = storms.warnings;
  for (const auto& w : joint.tp_given_hs.warnings) warnings.push_back("tp|hs: " + w);
  for (const auto& w : joint.hs_given_tp.warnings) warnings.push_back("hs|tp: " + w);
  report["warnings"] = warnings;
  report["storm_sizes"] = sizes;
  write_json(path("fit_report.json"), report);
  record_time("fit", t0);
}

void Pipeline::simulate() {
  const auto t0 = std::chrono::steady_clock::now();
  const double lambda = storm_rate();
  const auto env = environment();
  const auto events = simulate_events(*env, config_.contour_events, *config_.seed, std::uint64_t{1} << 40);
  write_text(path("events.csv"), events_csv(events));
  auto side = sidecar("events");
  const std::string model_file = config_.environment == "hierarchical" ? "hierarchical.json" : "ce.json";
  side["model_hash"] = fnv1a_hex(read_text(path(model_file)) +
                                 (config_.environment == "hierarchical" ? "" : read_text(path("marginal.json"))));
  side["environment"] = config_.environment;
  side["n_events"] = events.size();
  side["lambda"] = json_number(lambda);
  side["duration_years"] = json_number(static_cast<double>(events.size()) / lambda);
  write_json(path("events.json"), side);
  record_time("simulate", t0);
}

void Pipeline::contour() {
  const auto t0 = std::chrono::steady_clock::now();
  const double lambda = storm_rate();
  const auto ej = read_json(path("events.json"));
  require_hash(ej, "events.json");
  const auto events_text = read_text(path("events.csv"));
  const auto events_hash = fnv1a_hex(events_text);
  const auto pts = to_points(parse_events_csv(events_text));
  const auto methods = config_.methods;

  std::optional<DensityGrid> kde;
  std::optional<HierarchicalModel> hier;
  const std::array<double, 2> r_star{
      median_of({pts.col(0).data(), pts.col(0).data() + pts.rows()}),
      median_of({pts.col(1).data(), pts.col(1).data() + pts.rows()})};

  for (const auto& name : methods) {
    const auto method = parse_contour_method(name);
    if (method == ContourMethod::Isodensity && !kde) kde = kde_grid(pts, {config_.kde_grid, std::nullopt, 4.0});
    if (method == ContourMethod::Iform && !hier) {
      const auto hj = read_json(path("hierarchical.json"));
      require_hash(hj, "hierarchical.json");
      hier = hierarchical_from_json(hj.at("model"));
    }
    for (double T : config_.T) {
      const double alpha = event_alpha(T, lambda);
      Contour c;
      switch (method) {
        case ContourMethod::DirectSampling:
          c = direct_sampling_contour(pts, alpha, {config_.n_theta, config_.smoothing_window});
          break;
        case ContourMethod::JointExceedance:
          c = joint_exceedance_contour(pts, alpha, r_star, {config_.n_theta, 1, 1});
          break;
        case ContourMethod::Isodensity:
          c = isodensity_contour(*kde, 1 - alpha);
          break;
        case ContourMethod::Iform:
          c = iform_contour(*hier, T, lambda, config_.n_theta);
          break;
      }
      c.T = T;
      const auto base = contour_name(name, T);
      write_text(path(base + ".csv"), contour_csv(c));
      auto side = sidecar("contour");
      side["model_hash"] = ej.at("model_hash");
      side["events_hash"] = events_hash;
      const auto meta = contour_sidecar(c);
      for (const auto& [k, v] : meta.items()) side[k] = v;
      write_json(path(base + ".json"), side);
    }
  }
  record_time("contour", t0);
}

void Pipeline::respond() {
  const auto t0 = std::chrono::steady_clock::now();
  const double lambda = storm_rate();
  const auto report = read_json(path("fit_report.json"));
  const auto sizes = report.at("storm_sizes").get<std::vector<int>>();
  const auto env = environment();
  for (const auto& response : config_.responses) {
    LongTermOptions o;
    o.years = config_.years;
    o.lambda = lambda;
    o.n_realisations = config_.n_realisations;
    o.seed = *config_.seed;
    o.profile = config_.profile;
    if (config_.profile == StormProfile::Rectangular) o.storm_sizes = sizes;
    o.p_R = config_.p_R;
    const auto est = long_term_dist(*env, response, o);
    write_text(path("longterm_" + response.name + ".csv"), longterm_csv(est));

    double hs_max = 0, tp_lo = std::numeric_limits<double>::infinity(), tp_hi = 0;
    for (const auto& r : est.realisations) {
      if (std::isnan(r.hs)) continue;
      hs_max = std::max(hs_max, r.hs);
      tp_lo = std::min(tp_lo, r.tp);
      tp_hi = std::max(tp_hi, r.tp);
    }
    if (hs_max > 0 && tp_hi > tp_lo) {
      const auto cells = response_heatmap(est.realisations, {0, hs_max * 1.0001}, {tp_lo, tp_hi * 1.0001},
                                          config_.heatmap_hs, config_.heatmap_tp);
      write_text(path("heatmap_" + response.name + ".csv"), heatmap_csv(cells));
    }
    auto side = sidecar("long-term");
    side["response"] = to_json(response);
    side["N"] = json_number(config_.years);
    side["lambda"] = json_number(lambda);
    side["n_realisations"] = config_.n_realisations;
    side["profile"] = to_string(config_.profile);
    side["p_R"] = json_number(config_.p_R);
    side["q_R"] = json_number(est.q_R);
    write_json(path("respond_" + response.name + ".json"), side);
  }
  record_time("respond", t0);
}

void Pipeline::compare() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ej = read_json(path("events.json"));
  require_hash(ej, "events.json");
  const auto events = to_points(parse_events_csv(read_text(path("events.csv"))));
  // Standardisation for the neighbourhood estimator: event-sample standard deviations.
  std::array<double, 2> scale{1, 1};
  if (events.rows() > 1) {
    for (int d = 0; d < 2; ++d) {
      const auto col = events.col(d);
      scale[d] = std::sqrt((col.array() - col.mean()).square().sum() / static_cast<double>(events.rows() - 1));
    }
  }

  auto load_contour = [&](const std::string& method, double T) {
    const auto base = contour_name(method, T);
    const auto side = read_json(path(base + ".json"));
    require_hash(side, base + ".json");
    auto c = parse_contour_csv(read_text(path(base + ".csv")));
    c.method = parse_contour_method(method);
    c.T = T;
    c.alpha = json_to_double(side.at("alpha"));
    return c;
  };

  struct Loaded {
    std::string method;
    Contour cmp, inside;
    std::vector<bool> frontier;
  };
  std::vector<Loaded> contours;
  for (const auto& m : config_.methods) {
    Loaded l{m, load_contour(m, config_.compare_T), load_contour(m, config_.inside_T), {}};
    l.frontier = frontier_mask(l.cmp, events, config_.frontier_radius);
    contours.push_back(std::move(l));
  }

  Json rows = Json::array();
  Json inside = Json::array();
  std::string density = "response,method,T,r,f\n";
  for (const auto& response : config_.responses) {
    const auto rj = read_json(path("respond_" + response.name + ".json"));
    require_hash(rj, "respond_" + response.name + ".json");
    const double q_R = json_to_double(rj.at("q_R"));
    const auto realisations = parse_longterm_csv(read_text(path("longterm_" + response.name + ".csv")));
    for (const auto& l : contours) {
      const auto g = find_governing_point(l.cmp, [&](double h, double t) { return response.level(h, t); });
      const auto mh = max_hs_point(l.cmp);
      for (auto mode : config_.modes) {
        Json row = {{"response", response.name}, {"method", l.method}, {"mode", to_string(mode)},
                    {"T", json_number(config_.compare_T)}};
        try {
          const auto cr = contour_response_point(l.cmp, response, mode, l.frontier, config_.n_frontier, config_.p_C);
          const double delta = inflation_factor(q_R, cr.q_C);
          row["q_R"] = json_number(q_R);
          row["q_C"] = json_number(cr.q_C);
          row["p_C"] = json_number(config_.p_C);
          row["p_R"] = json_number(config_.p_R);
          row["Delta"] = json_number(delta);
          row["Delta_3dp"] = json_number(round3(delta));
          row["n_points"] = cr.used.size();
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Config && e.kind() != ErrorKind::Input) throw;
          row["error"] = e.what();
        }
        try {
          const auto nr = neighbourhood_response(l.cmp, mode, l.frontier, realisations, scale,
                                                 config_.neighbourhood_radius, config_.p_C);
          const double delta = inflation_factor(q_R, nr.q_C);
          row["q_C_neighbourhood"] = json_number(nr.q_C);
          row["Delta_neighbourhood"] = json_number(delta);
          row["Delta_neighbourhood_3dp"] = json_number(round3(delta));
          row["n_neighbourhood"] = nr.n_samples;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Config && e.kind() != ErrorKind::Input) throw;
          row["error_neighbourhood"] = e.what();
        }
        row["governing_point"] = {json_number(l.cmp.points[g].x1), json_number(l.cmp.points[g].x2)};
        row["max_hs_point"] = {json_number(l.cmp.points[mh].x1), json_number(l.cmp.points[mh].x2)};
        rows.push_back(row);
      }
      inside.push_back({{"response", response.name},
                        {"method", l.method},
                        {"T", json_number(config_.inside_T)},
                        {"count", count_inside(l.inside, realisations)},
                        {"of", realisations.size()}});
    }
    if (response.kind == ResponseKind::Rayleigh && !contours.empty()) {
      for (const auto& l : contours) {
        for (double T : config_.T) {
          const auto c = T == config_.compare_T ? l.cmp : load_contour(l.method, T);
          const auto mask = frontier_mask(c, events, config_.frontier_radius);
          std::vector<std::size_t> used;
          for (std::size_t k = 0; k < mask.size(); ++k) {
            if (mask[k] && c.points[k].attained) used.push_back(k);
          }
          if (used.empty()) continue;
          const auto parts = contour_short_terms(c, response, used);
          double r_hi = 0;
          for (const auto& p : parts) r_hi = std::max(r_hi, p.quantile(0.9999));
          for (std::size_t i = 0; i < config_.density_points; ++i) {
            const double r = r_hi * static_cast<double>(i) / static_cast<double>(config_.density_points - 1);
            density += response.name + ',' + l.method + ',' + format_double(T) + ',' + format_double(r) + ',' +
                       format_double(mixture_pdf(parts, r)) + '\n';
          }
        }
      }
    }
  }
  write_text(path("density.csv"), density);
  auto summary = sidecar("summary");
  summary["N"] = json_number(config_.years);
  summary["n_realisations"] = config_.n_realisations;
  summary["rows"] = rows;
  summary["inside"] = inside;
  write_json(path("summary.json"), summary);
  record_time("compare", t0);
}

void Pipeline::all() {
  write_json(path("config.resolved.json"), materialize(config_));
  fit();
  simulate();
  contour();
  respond();
  compare();
}

}  // namespace metocean
