#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "nnlif/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nnlif-lab: numerical laboratory for the delayed NNLIF model"};

  std::string scenario, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  app.add_option("scenario", scenario,
                 "simulate | steady | stefan-oracle | entropy | "
                 "periodicity-scan | particle-compare | supersolution-check")
      ->required();
  app.add_option("--config", config_path, "path to config file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : nnlif::EXIT_VALIDATION;
  }

  try {
    nnlif::Config cfg = nnlif::Config::parse_file(config_path);
    if (cfg.has("output.seed") && seed == 0)
      seed = (std::uint64_t)cfg.get_num("output.seed");
    return nnlif::run_scenario(scenario, cfg, out_dir, seed);
  } catch (const nnlif::InvalidParameter& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return nnlif::EXIT_VALIDATION;
  } catch (const nnlif::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return nnlif::EXIT_NUMERIC;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nnlif::EXIT_NUMERIC;
  }
}
