#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "metocean/pipeline.hpp"
#include "metocean/serialize.hpp"
#include "metocean/synthetic.hpp"

using namespace metocean;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(METOCEAN_TEST_SCRATCH) / "pipeline";

const std::string& data_path() {
  static const std::string path = [] {
    fs::create_directories(kRoot);
    SyntheticOptions o;
    o.years = 25;
    o.seed = 3;
    const auto p = (kRoot / "data.csv").string();
    write_text(p, sea_states_csv(synthetic_sea_states(o)));
    return p;
  }();
  return path;
}

// Small but complete run; `extra` is merged over the defaults.
std::string write_config(const std::string& name, const Json& extra) {
  Json j = {{"input", {{"path", data_path()}}},
            {"seed", 5},
            {"simulation", {{"years", 50}, {"n_realisations", 100}, {"contour_events", 100000}}},
            {"contour",
             {{"methods", {"direct-sampling"}}, {"T", {20, 100}}, {"n_theta", 72}, {"kde_grid", 120}}},
            {"response", {{"heatmap", {10, 10}}, {"density_points", 20}}},
            {"output", (kRoot / name / "out").string()}};
  j.merge_patch(extra);
  fs::create_directories(kRoot / name);
  const auto p = (kRoot / name / "config.json").string();
  write_json(p, j);
  fs::remove_all(kRoot / name / "out");
  return p;
}

struct RunResult {
  int code = -1;
  std::string err;
};

RunResult cli(const std::string& args) {
  const auto err_path = (kRoot / "stderr.txt").string();
  const std::string cmd = std::string(METOCEAN_CLI) + " " + args + " >/dev/null 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text(err_path);
  return r;
}

std::set<std::string> files_with_prefix(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto n = e.path().filename().string();
    if (n.rfind(prefix, 0) == 0 && e.path().extension() == ext) out.insert(n);
  }
  return out;
}

}  // namespace

TEST_CASE("fit writes the three model files") {
  const auto cfg = write_config("fit", Json::object());
  const auto r = cli("--config " + cfg + " fit");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto out = kRoot / "fit" / "out";
  for (const char* f : {"marginal.json", "ce.json", "hierarchical.json"}) CHECK(fs::exists(out / f));
  const auto m = read_json((out / "marginal.json").string());
  CHECK(m.at("config_hash").get<std::string>().size() == 16);
  CHECK(m.contains("hs"));
  CHECK(m.contains("tp"));
}

TEST_CASE("configuration and input errors map to exit codes") {
  SUBCASE("missing input file") {
    const auto cfg = write_config("missing", {{"input", {{"path", (kRoot / "nope.csv").string()}}}});
    const auto r = cli("--config " + cfg + " fit");
    CHECK(r.code == 2);
    CHECK(r.err.find("error kind=") == 0);
  }
  SUBCASE("tau outside (0, 1)") {
    const auto cfg = write_config("tau", {{"marginal", {{"tau", 1.2}}}});
    CHECK(cli("--config " + cfg + " fit").code == 1);
  }
  SUBCASE("unknown contour method") {
    const auto cfg = write_config("method", {{"contour", {{"methods", {"bogus"}}}}});
    const auto r = cli("--config " + cfg + " fit");
    CHECK(r.code == 1);
    CHECK(r.err.find("kind=config") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const auto cfg = write_config("key", {{"contour", {{"thetas", 10}}}});
    CHECK(cli("--config " + cfg + " fit").code == 1);
  }
  SUBCASE("missing seed") {
    const auto cfg = write_config("seed", {{"seed", nullptr}});
    CHECK(cli("--config " + cfg + " fit").code == 1);
    CHECK(cli("--config " + cfg + " --seed 5 fit").code == 0);
  }
  SUBCASE("missing config") { CHECK(cli("--config " + (kRoot / "absent.json").string() + " fit").code == 1); }
}

TEST_CASE("contour files follow the configured methods and return periods") {
  SUBCASE("one method, one period") {
    const auto cfg = write_config("one", {{"contour", {{"T", {100}}, {"compare_T", 100}, {"inside_T", 100}}}});
    REQUIRE(cli("--config " + cfg + " fit").code == 0);
    REQUIRE(cli("--config " + cfg + " simulate").code == 0);
    REQUIRE(cli("--config " + cfg + " contour").code == 0);
    CHECK(files_with_prefix(kRoot / "one" / "out", "contour_", ".csv") ==
          std::set<std::string>{"contour_direct-sampling_T100.csv"});
  }
  SUBCASE("three methods, seven periods") {
    const auto cfg = write_config(
        "many", {{"contour", {{"methods", {"direct-sampling", "joint-exceedance", "iform"}},
                              {"T", {20, 30, 40, 50, 70, 100, 200}}}}});
    REQUIRE(cli("--config " + cfg + " fit").code == 0);
    REQUIRE(cli("--config " + cfg + " simulate").code == 0);
    REQUIRE(cli("--config " + cfg + " contour").code == 0);
    CHECK(files_with_prefix(kRoot / "many" / "out", "contour_", ".csv").size() == 21);
    CHECK(files_with_prefix(kRoot / "many" / "out", "contour_", ".json").size() == 21);
  }
}

TEST_CASE("summary rows cover responses x methods x modes") {
  const Json r34 = {{"models",
                     {{{"name", "R3"}, {"kind", "deterministic"}, {"form", "resonant"}, {"params", {2, 0.007, 7}}},
                      {{"name", "R4"}, {"kind", "deterministic"}, {"form", "resonant"}, {"params", {2, 0.005, 26}}}}},
                    {"modes", {"point"}}};
  SUBCASE("direct sampling") {
    const auto cfg = write_config("rows2", {{"response", r34}});
    REQUIRE(cli("--config " + cfg + " all").code == 0);
    const auto s = read_json((kRoot / "rows2" / "out" / "summary.json").string());
    CHECK(s.at("rows").size() == 2);
    CHECK(s.at("rows")[0].contains("Delta"));
  }
  SUBCASE("three methods") {
    const auto cfg = write_config(
        "rows6", {{"response", r34}, {"contour", {{"methods", {"direct-sampling", "joint-exceedance", "isodensity"}}}}});
    REQUIRE(cli("--config " + cfg + " all").code == 0);
    const auto s = read_json((kRoot / "rows6" / "out" / "summary.json").string());
    CHECK(s.at("rows").size() == 6);
  }
}

TEST_CASE("stages refuse outputs from a different configuration") {
  const auto cfg = write_config("mixed", Json::object());
  REQUIRE(cli("--config " + cfg + " fit").code == 0);
  const auto r = cli("--config " + cfg + " --seed 6 simulate");
  CHECK(r.code == 1);
  CHECK(r.err.find("hash") != std::string::npos);
  CHECK(cli("--config " + cfg + " --seed 5 simulate").code == 0);
}

TEST_CASE("an existing lock blocks a second run") {
  const auto cfg = write_config("lock", Json::object());
  const auto out = kRoot / "lock" / "out";
  fs::create_directories(out);
  write_text((out / ".lock").string(), "");
  const auto r = cli("--config " + cfg + " fit");
  CHECK(r.code == 1);
  CHECK(r.err.find("locked") != std::string::npos);
  fs::remove(out / ".lock");
  CHECK(cli("--config " + cfg + " fit").code == 0);
  CHECK_FALSE(fs::exists(out / ".lock"));
}

TEST_CASE("config hash ignores the output directory only") {
  Json base = {{"input", {{"path", "x.csv"}}}, {"seed", 1}};
  auto a = parse_config(base);
  base["output"] = "elsewhere";
  auto b = parse_config(base);
  CHECK(config_hash(a) == config_hash(b));
  base["seed"] = 2;
  CHECK(config_hash(parse_config(base)) != config_hash(a));
}

TEST_CASE("model and table serialisation round-trips") {
  ResponseModel rm = ResponseModel::base_shear_like("bs", 0.5, 4, 1.8);
  const auto back = response_from_json(to_json(rm));
  CHECK(to_json(back).dump() == to_json(rm).dump());

  CHECK(format_double(0.1) == "0.1");
  CHECK(json_to_double(json_number(std::numeric_limits<double>::infinity())) == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(json_to_double(json_number(std::numeric_limits<double>::quiet_NaN()))));
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);

  std::vector<StormEvent> ev = {{1.5, 7.25, 0, 3}, {12.0625, 15.5, 0, 1}};
  const auto parsed = parse_events_csv(events_csv(ev));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1].hs == ev[1].hs);
  CHECK(parsed[0].n_states == 3);

  Contour c;
  c.points = {{0.1, 1, 2, true}, {0.2, 3, 4, false}};
  const auto pc = parse_contour_csv(contour_csv(c));
  REQUIRE(pc.points.size() == 2);
  CHECK(pc.points[1].x2 == 4);
  CHECK_FALSE(pc.points[1].attained);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}
