#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metocean/error.hpp"
#include "metocean/parallel.hpp"
#include "metocean/pipeline.hpp"

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int fail(const char* kind, const std::string& reason, int code) {
  std::fprintf(stderr, "error kind=%s reason=\"%s\"\n", kind, escape(reason).c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metocean extremes: fit, simulate, contour, respond, compare"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads (0 = all cores)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", "decluster the input and fit marginal, dependence and hierarchical models"},
      {"simulate", "draw the storm-event sample used for contours"},
      {"contour", "estimate contours for every method and return period"},
      {"respond", "Monte Carlo long-term response distributions"},
      {"compare", "contour-based versus long-term response quantiles"},
      {"all", "run every stage in order"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("config", e.what(), 1);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    metocean::set_thread_count(jobs);
    auto config = metocean::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out.empty()) config.out_dir = out;
    metocean::Pipeline pipeline(std::move(config));
    metocean::OutputLock lock(pipeline.config().out_dir);
    if (command == "fit") pipeline.fit();
    if (command == "simulate") pipeline.simulate();
    if (command == "contour") pipeline.contour();
    if (command == "respond") pipeline.respond();
    if (command == "compare") pipeline.compare();
    if (command == "all") pipeline.all();
    std::cout << command << " ok config_hash=" << pipeline.hash() << " out=" << pipeline.config().out_dir << "\n";
    return 0;
  } catch (const metocean::Error& e) {
    return fail(metocean::to_string(e.kind()), e.what(), metocean::exit_code(e.kind()));
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("input", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
}
