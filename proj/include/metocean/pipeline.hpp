#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metocean/contour.hpp"
#include "metocean/error.hpp"
#include "metocean/ingest.hpp"
#include "metocean/marginal.hpp"
#include "metocean/response.hpp"
#include "metocean/serialize.hpp"

namespace metocean {

/// Fully materialised run configuration.
struct RunConfig {
  std::string config_dir = ".";  ///< base for relative paths; not hashed
  std::string input_path;
  CsvSchema schema;
  std::vector<double> covariate_edges;
  DeclusterOptions decluster;
  PpcOptions hs_marginal;
  PpcOptions tp_marginal;
  CeOptions ce;
  HierarchicalOptions hierarchical;
  std::string environment = "ppc-ce";  ///< or "hierarchical"
  std::optional<std::uint64_t> seed;
  double years = 100;
  std::size_t n_realisations = 1000;
  std::size_t contour_events = 1000000;
  std::vector<std::string> methods = {"direct-sampling", "joint-exceedance", "isodensity", "iform"};
  std::vector<double> T = {20, 30, 40, 50, 70, 100, 200};
  int n_theta = 360;
  int smoothing_window = 5;
  int kde_grid = 400;
  double frontier_radius = 0.5;
  double compare_T = 100;
  double inside_T = 20;  ///< contour used to count driving conditions strictly inside
  std::vector<ResponseModel> responses;
  std::vector<ContourMode> modes = {ContourMode::Point, ContourMode::Frontier};
  double p_C = kExpMinusOne;
  double p_R = kExpMinusOne;
  std::size_t n_frontier = 10;
  double neighbourhood_radius = 0.5;  ///< in event-sample standard deviations
  StormProfile profile = StormProfile::PeakOnly;
  std::size_t heatmap_hs = 30;
  std::size_t heatmap_tp = 30;
  std::size_t density_points = 200;
  std::string out_dir = "out";  ///< not hashed
};

/// Parses and validates a JSON configuration; unspecified fields take defaults.
RunConfig parse_config(const Json& j, const std::string& config_dir = ".");
RunConfig load_config(const std::string& path);

/// Every hashed setting with its effective value.
Json materialize(const RunConfig& c);
std::string config_hash(const RunConfig& c);

/// Exit code for an error kind: 1 configuration, 2 data, 3 fitting/simulation.
int exit_code(ErrorKind kind);

/// Exclusive lock on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

/// Stages of the pipeline; each reads its inputs from and writes its outputs to
/// the output directory, so runs can resume from any stage.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  void fit();
  void simulate();
  void contour();
  void respond();
  void compare();
  void all();

  const RunConfig& config() const { return config_; }
  const std::string& hash() const { return hash_; }
  std::string path(const std::string& name) const;
  /// Stage runtimes in seconds, also written to timing.json.
  const std::map<std::string, double>& timings() const { return timings_; }

  static std::string contour_name(const std::string& method, double T);

 private:
  Json sidecar(const std::string& kind) const;
  void require_hash(const Json& j, const std::string& what) const;
  double storm_rate() const;
  std::unique_ptr<EnvironmentModel> environment() const;
  void record_time(const std::string& stage, std::chrono::steady_clock::time_point start);

  RunConfig config_;
  std::string hash_;
  std::map<std::string, double> timings_;
};

}  // namespace metocean
