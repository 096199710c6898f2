#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "metocean/error.hpp"
#include "metocean/serialize.hpp"
#include "metocean/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic North-Sea-like sea-state series (time,hs,tp,dir)"};
  metocean::SyntheticOptions o;
  std::string out;
  app.add_option("--out", out, "output CSV path")->required();
  app.add_option("--years", o.years, "record length in years");
  app.add_option("--seed", o.seed, "random seed")->required();
  app.add_option("--cadence-hours", o.cadence_hours, "sampling interval");
  app.add_option("--hs-shape", o.hs_shape, "Weibull shape of hs");
  app.add_option("--hs-scale", o.hs_scale, "Weibull scale of hs");
  CLI11_PARSE(app, argc, argv);
  try {
    metocean::write_text(out, metocean::sea_states_csv(metocean::synthetic_sea_states(o)));
  } catch (const metocean::Error& e) {
    std::fprintf(stderr, "error kind=%s reason=\"%s\"\n", metocean::to_string(e.kind()), e.what());
    return 1;
  }
  return 0;
}
