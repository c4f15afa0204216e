// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

// sphere-sapt: command-line runner for the quantization and SAPT checks.
//
//   sphere-sapt <subcommand> [flags] [--config FILE]
//
// Flags override values from the key=value config file. The output directory
// comes from --out, then the config file, then SPHERE_SAPT_OUT.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sphere_sapt/harness.hpp"

namespace {

using sphere_sapt::RunConfig;

struct Flags {
  std::vector<int> two_js;
  std::vector<int> two_ss;
  std::vector<double> lambdas;
  int order = 1;
  int grid = 40;
  int thetas = 64;
  std::uint64_t seed = 0;
  std::string output = "sphere-sapt-out";
  std::string coefficient_set = "calibrated";
  int band = 0;
  double t_final = 1.0;
  std::string observable = "n1";
};

const std::vector<std::pair<std::string, std::string>>& commands() {
  static const std::vector<std::pair<std::string, std::string>> list{
      {"kernel-check", "kernel properties, round trips and exact model symbols"},
      {"star-slopes", "truncation-error slopes of the star products"},
      {"calibrate", "least-squares calibration of the order-1 coefficients"},
      {"gap", "band gap N(theta, lambda) profiles"},
      {"chern", "plaquette Chern numbers of the principal bands"},
      {"bands", "effective band spectra and the first-order effective symbol"},
      {"obstruction", "exact band ranks against the reference rank"},
      {"invariance-slopes", "almost-invariance of the quantized Moyal projections"},
      {"egorov", "Heisenberg evolution against the classical band flow"}};
  return list;
}

void add_options(CLI::App& sub, Flags& f, std::string& config, bool with_env) {
  sub.add_option("--two-j,--two-js", f.two_js, "twice the orbital spin (comma-separated list)")
      ->delimiter(',');
  sub.add_option("--two-s", f.two_ss, "twice the internal spin (comma-separated list)")->delimiter(',');
  sub.add_option("--lambda,--lambdas", f.lambdas, "coupling values in [0, 1] (comma-separated list)")
      ->delimiter(',');
  sub.add_option("--order", f.order, "highest order of the SAPT constructions (0 or 1)");
  sub.add_option("--grid", f.grid, "Chern lattice size per direction");
  sub.add_option("--thetas", f.thetas, "number of theta intervals in the gap profile");
  sub.add_option("--seed", f.seed, "seed of the random corpus or group elements");
  CLI::Option* out = sub.add_option("--out", f.output, "output directory (default: $SPHERE_SAPT_OUT)");
  if (with_env) out->envname("SPHERE_SAPT_OUT");
  sub.add_option("--coefficient-set", f.coefficient_set, "printed or calibrated")
      ->check(CLI::IsMember({"printed", "calibrated"}));
  sub.add_option("--band", f.band, "band index a = s - m");
  sub.add_option("--t-final", f.t_final, "flow time of the Egorov comparison");
  sub.add_option("--observable", f.observable, "Egorov observable")
      ->check(CLI::IsMember({"n1", "n2", "n3"}));
  sub.add_option("--config", config, "key=value configuration file; flags take precedence");
}

struct Parser {
  CLI::App app{"Stratonovich-Weyl quantization and space adiabatic perturbation theory on the sphere",
               "sphere-sapt"};
  Flags flags;
  std::string config;

  explicit Parser(bool with_env) {
    app.require_subcommand(1);
    for (const auto& [name, help] : commands()) add_options(*app.add_subcommand(name, help), flags, config, with_env);
  }
  const CLI::App& sub() const { return *app.get_subcommands().front(); }
};

RunConfig to_config(const CLI::App& sub, const Flags& f) {
  RunConfig cfg;
  cfg.subcommand = sub.get_name();
  cfg.two_js = f.two_js;
  cfg.two_ss = f.two_ss;
  cfg.lambdas = f.lambdas;
  cfg.order = f.order;
  cfg.grid = f.grid;
  cfg.thetas = f.thetas;
  if (sub.count("--seed") > 0) cfg.seed = f.seed;
  cfg.output = f.output;
  cfg.coefficient_set = sphere_sapt::parse_coefficient_set(f.coefficient_set);
  if (sub.count("--band") > 0) cfg.band = f.band;
  cfg.t_final = f.t_final;
  cfg.observable = f.observable;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  // Pass one finds the subcommand, the config file and the flags on the
  // command line. Pass two parses config entries for the remaining keys
  // followed by the command-line flags, with SPHERE_SAPT_OUT as the last resort.
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> merged;
  {
    Parser first(false);
    try {
      first.app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
      return first.app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return first.app.exit(e);
    } catch (const CLI::ParseError& e) {
      first.app.exit(e);
      return sphere_sapt::kExitInvalidArguments;
    }
    const CLI::App& sub = first.sub();
    merged.push_back(sub.get_name());
    if (!first.config.empty()) {
      try {
        for (const auto& [key, value] : sphere_sapt::read_config_file(first.config)) {
          const CLI::Option* opt = sub.get_option_no_throw("--" + key);
          if (opt == nullptr || key == "config")
            throw std::invalid_argument("unknown config key '" + key + "'");
          if (opt->count() == 0) merged.push_back("--" + key + "=" + value);
        }
      } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return sphere_sapt::kExitInvalidArguments;
      }
    }
    const auto pos = std::find(args.begin(), args.end(), sub.get_name());
    merged.insert(merged.end(), pos + 1, args.end());
  }

  Parser second(true);
  try {
    second.app.parse(std::vector<std::string>(merged.rbegin(), merged.rend()));
  } catch (const CLI::ParseError& e) {
    second.app.exit(e);
    return sphere_sapt::kExitInvalidArguments;
  }
  RunConfig cfg;
  try {
    cfg = to_config(second.sub(), second.flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return sphere_sapt::kExitInvalidArguments;
  }
  return sphere_sapt::run(cfg, std::cout, std::cerr);
}
