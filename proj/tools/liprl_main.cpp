#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "liprl/liprl.hpp"

int main(int argc, char** argv) {
  CLI::App app{"liprl - Lipschitz reward-extension backtester"};
  app.require_subcommand(1);

  // run
  liprl::RunConfig run_cfg;
  auto* run = app.add_subcommand("run", "run a backtest scenario");
  run->add_option("--scenario", run_cfg.scenario,
                  "currency | allocation")->required();
  run->add_option("--input", run_cfg.input, "input CSV")->required();
  run->add_option("--output", run_cfg.output,
                  "report path (default: $LIPRL_OUT_DIR or cwd)");
  run->add_option("--format", run_cfg.format, "csv | json");
  run->add_option("--epsilon", run_cfg.epsilon,
                  "Euclidean weight of the metric (default 0.1)");
  run->add_option("--extension", run_cfg.extension,
                  "mcshane | whitney | blend:<lambda>");
  run->add_option("--beta", run_cfg.beta,
                  "dream fraction, allocation only (default 0.5)");
  run->add_option("--actions", run_cfg.actions,
                  "size of the action pool (default 30)");
  run->add_option("--sim-epsilon", run_cfg.sim_epsilon,
                  "similarity radius, allocation only (default 0.5)");
  run->add_option("--seed", run_cfg.seed, "RNG seed");

  // synth
  liprl::SynthParams synth_params;
  std::string synth_output;
  auto* synth = app.add_subcommand("synth", "generate a synthetic market");
  synth->add_option("--steps", synth_params.n_steps, "rows (default 800)");
  synth->add_option("--products", synth_params.n_products,
                    "products (default 4)");
  synth->add_option("--drift", synth_params.drift, "per-step drift");
  synth->add_option("--volatility", synth_params.volatility,
                    "per-step noise std (default 1)");
  synth->add_option("--seed", synth_params.seed, "RNG seed");
  synth->add_option("--output", synth_output, "output CSV")->required();

  // verify
  std::uint64_t verify_seed = 0;
  bool verify_verbose = false;
  double inject_k = 1.0;
  auto* verify = app.add_subcommand(
      "verify", "run the built-in correctness battery");
  verify->add_option("--seed", verify_seed, "RNG seed for the battery");
  verify->add_flag("--verbose", verify_verbose, "print every check");
  verify->add_option("--inject-k", inject_k,
                     "multiply the Lipschitz constant (test hook; any value "
                     "other than 1 must fail the battery)")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "config error: " << e.what() << "\n";
    return liprl::exit_config;
  }

  if (run->parsed())
    return liprl::cmd_run(run_cfg, std::cout, std::cerr);
  if (synth->parsed())
    return liprl::cmd_synth(synth_params, synth_output, std::cout, std::cerr);
  if (verify->parsed())
    return liprl::cmd_verify(verify_seed, verify_verbose, std::cout,
                             std::cerr, inject_k);
  return liprl::exit_config;
}
