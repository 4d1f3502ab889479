// stackseek: run, audit and reference-solve experiment configs.

#include "stackseek/experiment/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace ex = stackseek::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order Stackelberg equilibrium seeking with equilibrium selection"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<std::string> out;
  std::optional<int> replicates;
  bool paper_sign = false;

  auto* run = app.add_subcommand("run", "run Algorithm 1 or an illustrative regime");
  run->add_option("config", config_path, "config file (key = value or JSON)")->required();
  run->add_option("--seed", seed, "base seed");
  run->add_option("--iters", iters, "number of leader iterations K");
  run->add_option("--out", out, "output directory");
  run->add_option("--replicates", replicates, "replicates with seeds seed, seed+1, ...");
  run->add_flag("--paper-sign", paper_sign, "use the reversed estimator difference");

  int samples = 1000;
  auto* check = app.add_subcommand("check", "audit monotonicity, convexity and feasibility");
  check->add_option("config", config_path, "config file")->required();
  check->add_option("--samples", samples, "sampled pairs per audit");

  auto* oracle = app.add_subcommand("oracle", "write reference values from analytic or grid oracles");
  oracle->add_option("config", config_path, "config file")->required();
  oracle->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = ex::parse_config(config_path);
    if (seed) cfg.seed = *seed;
    if (iters) cfg.iterations = *iters;
    if (out) cfg.out = *out;
    if (replicates) cfg.replicates = *replicates;
    if (paper_sign) cfg.paper_sign = true;
    ex::validate(cfg);

    if (*run) {
      const auto sm = ex::run_experiment(cfg);
      for (const auto& r : sm.replicates) {
        std::printf("seed %llu: %ld records, final J0 %.6g", static_cast<unsigned long long>(r.seed),
                    r.records, r.final_J0);
        if (r.stationarity) std::printf(", stationarity %.6g", *r.stationarity);
        std::printf("\n");
        if (r.fault) std::fprintf(stderr, "seed %llu fault: %s\n",
                                  static_cast<unsigned long long>(r.seed), r.fault->c_str());
      }
      std::printf("summary: %s\n", sm.summary_csv.c_str());
      return sm.ok() ? 0 : 3;
    }
    if (*check) {
      bool ok = true;
      for (const auto& line : ex::run_checks(cfg, samples)) {
        std::printf("%-4s %s: %s\n", line.passed ? "ok" : "FAIL", line.name.c_str(),
                    line.detail.c_str());
        ok = ok && line.passed;
      }
      return ok ? 0 : 4;
    }
    if (*oracle) {
      std::cout << ex::run_oracle(cfg);
      return 0;
    }
  } catch (const ex::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
